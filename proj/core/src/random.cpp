#include "nansde/random.hpp"

#include <cmath>
#include <numbers>

namespace nansde {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(Philox4x32::Counter& ctr, const Philox4x32::Key& key) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
  ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
         static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
         static_cast<std::uint32_t>(p0)};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter counter, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    philox_round(counter, key);
  }
  return counter;
}

RandomStream::RandomStream(NoiseSeed seed) noexcept
    : key_{static_cast<std::uint32_t>(seed.seed),
           static_cast<std::uint32_t>(seed.seed >> 32)},
      stream_(seed.stream_id) {}

std::uint64_t RandomStream::next_u64() noexcept {
  if (buffered_ == 0) {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_),
                                  static_cast<std::uint32_t>(block_ >> 32),
                                  static_cast<std::uint32_t>(stream_),
                                  static_cast<std::uint32_t>(stream_ >> 32)};
    buffer_ = Philox4x32::generate(ctr, key_);
    ++block_;
    buffered_ = 2;
  }
  const int i = 2 - buffered_;
  --buffered_;
  return (static_cast<std::uint64_t>(buffer_[2 * i]) << 32) | buffer_[2 * i + 1];
}

double RandomStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform_positive() noexcept {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RandomStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform_positive()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  return splitmix64(splitmix64(seed) ^ (salt + 0x632BE59BD9B4E019ull));
}

}  // namespace nansde
