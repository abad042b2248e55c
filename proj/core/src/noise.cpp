#include "nansde/noise.hpp"

#include <cmath>

#include "nansde/error.hpp"

namespace nansde {

std::vector<double> brownian_increments(const TimeGrid& grid, NoiseSeed seed) {
  RandomStream stream(seed);
  const double scale = std::sqrt(grid.dt());
  std::vector<double> dw(grid.n_steps());
  for (double& x : dw) x = scale * stream.normal();
  return dw;
}

NaNoiseState na_noise_step(double z, double k, double /*t*/, double dt, double dw, double ell1_t,
                           double ell2_t, std::size_t step) {
  const NaNoiseState next{z - ell1_t * k * dt + dw, k + ell2_t * dw};
  if (!std::isfinite(next.z) || !std::isfinite(next.k)) {
    throw IntegrationError("NA-noise step produced a non-finite state", step);
  }
  return next;
}

}  // namespace nansde
