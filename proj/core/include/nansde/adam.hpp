#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nansde {

struct AdamConfig {
  double lr = 0.004;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// Adam (Kingma & Ba) with bias-corrected moments over a flat parameter vector.
class Adam {
 public:
  Adam(std::size_t n_params, AdamConfig config);

  /// params -= lr * m_hat / (sqrt(v_hat) + eps). Throws ShapeError on size mismatch.
  void step(std::span<double> params, std::span<const double> grad);

  const AdamConfig& config() const noexcept { return config_; }
  std::size_t steps_taken() const noexcept { return t_; }
  const std::vector<double>& first_moment() const noexcept { return m_; }
  const std::vector<double>& second_moment() const noexcept { return v_; }

  friend bool operator==(const Adam&, const Adam&) = default;

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

}  // namespace nansde
