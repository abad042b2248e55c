#include "nansde/parallel.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <thread>

namespace nansde {

unsigned resolve_threads(unsigned threads) noexcept {
  if (threads != 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(resolve_threads(threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::size_t> failed_at(workers, std::numeric_limits<std::size_t>::max());
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) {
          try {
            fn(i);
          } catch (...) {
            failed_at[w] = i;
            errors[w] = std::current_exception();
            return;
          }
        }
      });
    }
  }
  const auto first = std::min_element(failed_at.begin(), failed_at.end());
  if (*first != std::numeric_limits<std::size_t>::max()) {
    std::rethrow_exception(errors[static_cast<std::size_t>(first - failed_at.begin())]);
  }
}

}  // namespace nansde
