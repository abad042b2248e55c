#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace nansde {

/// 0 means std::thread::hardware_concurrency().
unsigned resolve_threads(unsigned threads) noexcept;

/// Calls fn(i) for every i in [0, n) on up to `threads` workers. Each call
/// must only touch state owned by index i. If any call throws, the exception
/// from the lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Pairwise tree reduction in index order; the result does not depend on
/// how `items` were produced.
template <typename T, typename Combine>
T tree_reduce(std::vector<T> items, Combine combine) {
  while (items.size() > 1) {
    std::vector<T> next;
    next.reserve((items.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < items.size(); i += 2) {
      combine(items[i], items[i + 1]);
      next.push_back(std::move(items[i]));
    }
    if (items.size() % 2 == 1) next.push_back(std::move(items.back()));
    items = std::move(next);
  }
  return std::move(items.front());
}

}  // namespace nansde
