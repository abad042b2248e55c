#pragma once

#include <cstddef>
#include <vector>

#include "nansde/grid.hpp"
#include "nansde/random.hpp"

namespace nansde {

/// i.i.d. N(0, dt) increments, one per grid step. Pure function of (grid, seed).
std::vector<double> brownian_increments(const TimeGrid& grid, NoiseSeed seed);

// ---------------------------------------------------------------------------
// Fractional Brownian motion

struct FbmConfig {
  /// Throws ConfigError unless 0 < hurst < 1.
  FbmConfig(double hurst, TimeGrid grid);

  double hurst;
  TimeGrid grid;
};

/// Autocovariance of unit-step fractional Gaussian noise at integer lag k.
double fgn_autocovariance(double hurst, std::size_t lag);

/// fBm sampled on cfg.grid with B(t0) = 0, exact in law. Uses circulant
/// embedding of the increment covariance; falls back to dense Cholesky when
/// the embedding has negative eigenvalues. Throws GenerationError if both fail.
Path fbm_path(const FbmConfig& cfg, NoiseSeed seed);

/// The Cholesky route on its own.
Path fbm_path_cholesky(const FbmConfig& cfg, NoiseSeed seed);

// ---------------------------------------------------------------------------
// Closed-form ARMA-type noise with kernel a(t) = q exp(-(p-q) t)

struct ArmaKernelParams {
  /// Throws ConfigError unless p > 0 and p > q.
  ArmaKernelParams(double p, double q);

  double p;
  double q;
};

/// l(u) = q e^{pu} {1 - 2q(p-q) / ((2p-q)^2 e^{2(p-q)u} - q^2)}.
/// Throws KernelError for u < 0 or a non-finite result (p*u beyond ~709).
double arma_ell(double u, const ArmaKernelParams& params);

/// e^{-pu} l(u) = q {...}; bounded for all u >= 0.
double arma_ell_damped(double u, const ArmaKernelParams& params);

/// Volterra kernel l(s, u) = e^{-ps} l(u) for s > u >= 0, evaluated as
/// e^{-p(s-u)} q {...} so that nothing overflows.
double arma_kernel(double s, double u, const ArmaKernelParams& params);

struct ArmaNoisePath {
  Path z;
  Path k;
};

/// Explicit Euler scheme for dZ = -e^{-pt} K dt + dW, dK = l(t) dW with
/// Z(0) = K(0) = 0; both equations share the increments of `seed`.
ArmaNoisePath arma_noise_path(const TimeGrid& grid, const ArmaKernelParams& params,
                              NoiseSeed seed);

// ---------------------------------------------------------------------------
// NA-noise: dZ = -l1(t) K dt + dW, dK = l2(t) dW

struct NaNoiseState {
  double z;
  double k;
};

/// One explicit Euler step. Throws IntegrationError tagged with `step` if
/// the result is not finite.
NaNoiseState na_noise_step(double z, double k, double t, double dt, double dw, double ell1_t,
                           double ell2_t, std::size_t step = 0);

}  // namespace nansde
