#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <unsupported/Eigen/FFT>

#include "nansde/error.hpp"
#include "nansde/noise.hpp"

namespace nansde {
namespace {

// Eigenvalues below -kNegativeTolerance * max are treated as a failed embedding.
constexpr double kNegativeTolerance = 1e-10;

// Covariance of the n unit-step fGn increments, rescaled afterwards.
Path scaled_path(const FbmConfig& cfg, const std::vector<double>& unit_increments) {
  const double scale = std::pow(cfg.grid.dt(), cfg.hurst);
  std::vector<double> dx(unit_increments.size());
  for (std::size_t k = 0; k < dx.size(); ++k) dx[k] = scale * unit_increments[k];
  return Path::from_increments(cfg.grid, 0.0, dx);
}

// Circulant eigenvalues of the length-2n embedding; empty if not PSD.
std::vector<double> embedding_eigenvalues(double hurst, std::size_t n) {
  const std::size_t size = 2 * n;
  std::vector<std::complex<double>> row(size);
  for (std::size_t k = 0; k <= n; ++k) row[k] = fgn_autocovariance(hurst, k);
  for (std::size_t k = n + 1; k < size; ++k) row[k] = row[size - k];

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, row);

  std::vector<double> lambda(size);
  double max_lambda = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    lambda[k] = spectrum[k].real();
    max_lambda = std::max(max_lambda, lambda[k]);
  }
  for (double& l : lambda) {
    if (l < -kNegativeTolerance * max_lambda) return {};
    l = std::max(l, 0.0);
  }
  return lambda;
}

std::vector<double> circulant_increments(const std::vector<double>& lambda, std::size_t n,
                                         NoiseSeed seed) {
  const std::size_t size = 2 * n;
  const double norm = static_cast<double>(size);
  RandomStream stream(seed);

  // Hermitian-symmetric Gaussian spectrum so the transform is real.
  std::vector<std::complex<double>> weights(size);
  weights[0] = std::sqrt(lambda[0] / norm) * stream.normal();
  weights[n] = std::sqrt(lambda[n] / norm) * stream.normal();
  for (std::size_t k = 1; k < n; ++k) {
    const double amp = std::sqrt(lambda[k] / (2.0 * norm));
    const double re = stream.normal();
    const double im = stream.normal();
    weights[k] = {amp * re, amp * im};
    weights[size - k] = std::conj(weights[k]);
  }

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> out;
  fft.fwd(out, weights);

  std::vector<double> dx(n);
  for (std::size_t k = 0; k < n; ++k) dx[k] = out[k].real();
  return dx;
}

}  // namespace

FbmConfig::FbmConfig(double hurst_, TimeGrid grid_) : hurst(hurst_), grid(grid_) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw ConfigError("FbmConfig: hurst must lie in (0, 1), got " + std::to_string(hurst));
  }
}

double fgn_autocovariance(double hurst, std::size_t lag) {
  const double k = static_cast<double>(lag);
  const double two_h = 2.0 * hurst;
  return 0.5 * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) +
                std::pow(std::abs(k - 1.0), two_h));
}

Path fbm_path(const FbmConfig& cfg, NoiseSeed seed) {
  const std::size_t n = cfg.grid.n_steps();
  const std::vector<double> lambda = embedding_eigenvalues(cfg.hurst, n);
  if (lambda.empty()) return fbm_path_cholesky(cfg, seed);
  return scaled_path(cfg, circulant_increments(lambda, n, seed));
}

Path fbm_path_cholesky(const FbmConfig& cfg, NoiseSeed seed) {
  const std::size_t n = cfg.grid.n_steps();
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::VectorXd gamma(dim);
  for (Eigen::Index k = 0; k < dim; ++k) gamma(k) = fgn_autocovariance(cfg.hurst, k);
  Eigen::MatrixXd cov(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) cov(i, j) = gamma(std::abs(i - j));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw GenerationError("fbm_path: increment covariance is not positive definite (H=" +
                          std::to_string(cfg.hurst) + ", n=" + std::to_string(n) + ")");
  }
  RandomStream stream(seed);
  Eigen::VectorXd white(dim);
  for (Eigen::Index k = 0; k < dim; ++k) white(k) = stream.normal();
  const Eigen::VectorXd correlated = llt.matrixL() * white;
  return scaled_path(cfg, std::vector<double>(correlated.begin(), correlated.end()));
}

}  // namespace nansde
