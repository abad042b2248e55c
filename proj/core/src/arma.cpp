#include <cmath>
#include <string>

#include "nansde/error.hpp"
#include "nansde/noise.hpp"

namespace nansde {
namespace {

// The braced factor {1 - 2q(p-q) / ((2p-q)^2 e^{2(p-q)u} - q^2)}. The
// denominator is rewritten as (2p-q)^2 expm1(2(p-q)u) + 4p(p-q), a sum of
// nonnegative terms, which avoids cancellation when q is close to p.
double braced_factor(double u, const ArmaKernelParams& params) {
  const double p = params.p;
  const double q = params.q;
  const double gap = p - q;
  const double lead = (2.0 * p - q) * (2.0 * p - q);
  const double denominator = lead * std::expm1(2.0 * gap * u) + 4.0 * p * gap;
  if (!(denominator > 0.0)) {
    throw KernelError("arma_ell: non-positive denominator at u=" + std::to_string(u));
  }
  return 1.0 - 2.0 * q * gap / denominator;
}

void check_argument(double u) {
  if (!(u >= 0.0) || !std::isfinite(u)) {
    throw KernelError("arma_ell: u must be finite and nonnegative, got " + std::to_string(u));
  }
}

}  // namespace

ArmaKernelParams::ArmaKernelParams(double p_, double q_) : p(p_), q(q_) {
  if (!std::isfinite(p) || !std::isfinite(q) || !(p > 0.0) || !(p > q)) {
    throw ConfigError("ArmaKernelParams: need p > 0 and p > q, got p=" + std::to_string(p) +
                      ", q=" + std::to_string(q));
  }
}

double arma_ell(double u, const ArmaKernelParams& params) {
  check_argument(u);
  if (params.q == 0.0) return 0.0;
  const double value = params.q * std::exp(params.p * u) * braced_factor(u, params);
  if (!std::isfinite(value)) {
    throw KernelError("arma_ell: result overflows at u=" + std::to_string(u));
  }
  return value;
}

double arma_ell_damped(double u, const ArmaKernelParams& params) {
  check_argument(u);
  if (params.q == 0.0) return 0.0;
  return params.q * braced_factor(u, params);
}

double arma_kernel(double s, double u, const ArmaKernelParams& params) {
  check_argument(u);
  if (!(s >= u) || !std::isfinite(s)) {
    throw KernelError("arma_kernel: need s >= u, got s=" + std::to_string(s));
  }
  return std::exp(-params.p * (s - u)) * arma_ell_damped(u, params);
}

ArmaNoisePath arma_noise_path(const TimeGrid& grid, const ArmaKernelParams& params,
                              NoiseSeed seed) {
  const std::vector<double> dw = brownian_increments(grid, seed);
  std::vector<double> z(grid.n_points());
  std::vector<double> k(grid.n_points());
  z[0] = 0.0;
  k[0] = 0.0;
  for (std::size_t i = 0; i < grid.n_steps(); ++i) {
    const double t = grid.time(i);
    const NaNoiseState next = na_noise_step(z[i], k[i], t, grid.dt(), dw[i],
                                            std::exp(-params.p * t), arma_ell(t, params), i);
    z[i + 1] = next.z;
    k[i + 1] = next.k;
  }
  return {Path(grid, std::move(z)), Path(grid, std::move(k))};
}

}  // namespace nansde
