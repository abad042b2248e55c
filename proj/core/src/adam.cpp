#include "nansde/adam.hpp"

#include <cmath>

#include "nansde/error.hpp"

namespace nansde {

Adam::Adam(std::size_t n_params, AdamConfig config)
    : config_(config), m_(n_params, 0.0), v_(n_params, 0.0) {
  if (!(config.lr > 0.0)) throw ConfigError("Adam: learning rate must be positive");
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0) || !(config.beta2 >= 0.0 && config.beta2 < 1.0)) {
    throw ConfigError("Adam: betas must lie in [0, 1)");
  }
  if (!(config.epsilon > 0.0)) throw ConfigError("Adam: epsilon must be positive");
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw ShapeError("Adam::step: parameter/gradient size mismatch");
  }
  ++t_;
  const double t = static_cast<double>(t_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grad[i];
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
    const double m_hat = m_[i] / correction1;
    const double v_hat = v_[i] / correction2;
    params[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
}

}  // namespace nansde
