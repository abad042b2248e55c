#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nansde {

/// Uniform grid t0 + k*dt, k = 0..n_steps.
class TimeGrid {
 public:
  /// Throws ConfigError unless dt > 0 (finite) and n_steps >= 1.
  TimeGrid(double t0, double dt, std::size_t n_steps);

  /// n_steps equal steps covering [start, end].
  static TimeGrid over(double start, double end, std::size_t n_steps);

  double t0() const noexcept { return t0_; }
  double dt() const noexcept { return dt_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  std::size_t n_points() const noexcept { return n_steps_ + 1; }
  double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * dt_; }
  double end_time() const noexcept { return time(n_steps_); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double t0_;
  double dt_;
  std::size_t n_steps_;
};

/// Real-valued samples on a TimeGrid; always n_steps + 1 finite values.
class Path {
 public:
  /// Throws ConfigError on length mismatch, DataError on a non-finite value.
  Path(TimeGrid grid, std::vector<double> values);

  /// Path starting at `start` followed by the running sum of `increments`.
  static Path from_increments(TimeGrid grid, double start, std::span<const double> increments);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }
  std::size_t size() const noexcept { return values_.size(); }
  double front() const noexcept { return values_.front(); }
  double back() const noexcept { return values_.back(); }

  /// values[k+1] - values[k]
  std::vector<double> increments() const;

 private:
  TimeGrid grid_;
  std::vector<double> values_;
};

}  // namespace nansde
