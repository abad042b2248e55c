#include "nansde/grid.hpp"

#include <cmath>
#include <string>

#include "nansde/error.hpp"

namespace nansde {

TimeGrid::TimeGrid(double t0, double dt, std::size_t n_steps)
    : t0_(t0), dt_(dt), n_steps_(n_steps) {
  if (!std::isfinite(t0)) throw ConfigError("TimeGrid: t0 must be finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError("TimeGrid: dt must be positive and finite, got " + std::to_string(dt));
  }
  if (n_steps == 0) throw ConfigError("TimeGrid: n_steps must be at least 1");
}

TimeGrid TimeGrid::over(double start, double end, std::size_t n_steps) {
  if (n_steps == 0) throw ConfigError("TimeGrid: n_steps must be at least 1");
  return TimeGrid(start, (end - start) / static_cast<double>(n_steps), n_steps);
}

Path::Path(TimeGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.n_points()) {
    throw ConfigError("Path: expected " + std::to_string(grid_.n_points()) + " values, got " +
                      std::to_string(values_.size()));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) throw DataError("Path: non-finite value", k);
  }
}

Path Path::from_increments(TimeGrid grid, double start, std::span<const double> increments) {
  std::vector<double> values(increments.size() + 1);
  values[0] = start;
  for (std::size_t k = 0; k < increments.size(); ++k) values[k + 1] = values[k] + increments[k];
  return Path(grid, std::move(values));
}

std::vector<double> Path::increments() const {
  std::vector<double> out(values_.size() - 1);
  for (std::size_t k = 0; k + 1 < values_.size(); ++k) out[k] = values_[k + 1] - values_[k];
  return out;
}

}  // namespace nansde
