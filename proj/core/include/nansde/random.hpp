#pragma once

#include <array>
#include <cstdint>

namespace nansde {

/// Identifies one reproducible random stream. Distinct (seed, stream_id)
/// pairs map to disjoint counter ranges of the underlying generator.
struct NoiseSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const NoiseSeed&, const NoiseSeed&) = default;
};

/// Philox4x32-10 counter-based bijection (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key) noexcept;
};

/// Sequential view over one Philox stream. The stream id occupies the upper
/// 64 counter bits and a block index the lower 64, so streams never overlap.
class RandomStream {
 public:
  explicit RandomStream(NoiseSeed seed) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Uniform on (0, 1].
  double uniform_positive() noexcept;

  /// Standard normal via Box-Muller; both variates of each pair are used.
  double normal() noexcept;

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Deterministic seed derivation (splitmix64 finalizer over seed and salt).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

}  // namespace nansde
