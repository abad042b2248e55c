#include "nansde/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nansde/error.hpp"

namespace nansde {
namespace {

DenseLayer zero_layer(std::size_t inputs, std::size_t outputs) {
  return DenseLayer{inputs, outputs, std::vector<double>(inputs * outputs, 0.0),
                    std::vector<double>(outputs, 0.0)};
}

void affine(const DenseLayer& layer, std::span<const double> in, std::vector<double>& out) {
  out.resize(layer.outputs);
  for (std::size_t i = 0; i < layer.outputs; ++i) {
    const double* row = layer.weights.data() + i * layer.inputs;
    double acc = layer.bias[i];
    for (std::size_t j = 0; j < layer.inputs; ++j) acc += row[j] * in[j];
    out[i] = acc;
  }
}

void check_input(const MlpParams& params, std::span<const double> x) {
  if (x.size() != params.input_dim()) {
    throw ShapeError("mlp_forward: expected input of dimension " +
                     std::to_string(params.input_dim()) + ", got " + std::to_string(x.size()));
  }
}

}  // namespace

MlpParams::MlpParams(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("MlpParams: at least one layer required");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    if (layer.inputs == 0 || layer.outputs == 0) {
      throw ShapeError("MlpParams: layer " + std::to_string(l) + " has a zero width");
    }
    if (layer.weights.size() != layer.inputs * layer.outputs ||
        layer.bias.size() != layer.outputs) {
      throw ShapeError("MlpParams: tensor sizes of layer " + std::to_string(l) +
                       " do not match its widths");
    }
    if (l > 0 && layers_[l - 1].outputs != layer.inputs) {
      throw ShapeError("MlpParams: layer " + std::to_string(l) + " expects " +
                       std::to_string(layer.inputs) + " inputs but the previous layer emits " +
                       std::to_string(layers_[l - 1].outputs));
    }
    for (double v : layer.weights) {
      if (!std::isfinite(v)) throw ConfigError("MlpParams: non-finite weight");
    }
    for (double v : layer.bias) {
      if (!std::isfinite(v)) throw ConfigError("MlpParams: non-finite bias");
    }
  }
}

MlpParams MlpParams::zeros(std::span<const std::size_t> widths) {
  if (widths.size() < 2) throw ConfigError("MlpParams: need at least input and output widths");
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    layers.push_back(zero_layer(widths[l], widths[l + 1]));
  }
  return MlpParams(std::move(layers));
}

std::vector<std::size_t> MlpParams::widths() const {
  std::vector<std::size_t> out{layers_.front().inputs};
  for (const DenseLayer& layer : layers_) out.push_back(layer.outputs);
  return out;
}

std::size_t MlpParams::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const DenseLayer& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

void MlpParams::copy_to(std::span<double> out) const {
  if (out.size() != parameter_count()) throw ShapeError("MlpParams::copy_to: size mismatch");
  std::size_t i = 0;
  for (const DenseLayer& layer : layers_) {
    for (double v : layer.weights) out[i++] = v;
    for (double v : layer.bias) out[i++] = v;
  }
}

void MlpParams::assign_from(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw ShapeError("MlpParams::assign_from: size mismatch");
  std::size_t i = 0;
  for (DenseLayer& layer : layers_) {
    for (double& v : layer.weights) v = flat[i++];
    for (double& v : layer.bias) v = flat[i++];
  }
}

GradientBundle GradientBundle::zeros_like(const MlpParams& params) {
  GradientBundle g;
  for (const DenseLayer& layer : params.layers()) {
    g.layers.push_back(zero_layer(layer.inputs, layer.outputs));
  }
  return g;
}

GradientBundle& GradientBundle::operator+=(const GradientBundle& other) {
  if (other.layers.size() != layers.size()) throw ShapeError("GradientBundle: shape mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    DenseLayer& mine = layers[l];
    const DenseLayer& theirs = other.layers[l];
    if (mine.weights.size() != theirs.weights.size() || mine.bias.size() != theirs.bias.size()) {
      throw ShapeError("GradientBundle: shape mismatch");
    }
    for (std::size_t i = 0; i < mine.weights.size(); ++i) mine.weights[i] += theirs.weights[i];
    for (std::size_t i = 0; i < mine.bias.size(); ++i) mine.bias[i] += theirs.bias[i];
  }
  return *this;
}

std::size_t GradientBundle::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const DenseLayer& layer : layers) n += layer.weights.size() + layer.bias.size();
  return n;
}

void GradientBundle::copy_to(std::span<double> out) const {
  if (out.size() != parameter_count()) throw ShapeError("GradientBundle::copy_to: size mismatch");
  std::size_t i = 0;
  for (const DenseLayer& layer : layers) {
    for (double v : layer.weights) out[i++] = v;
    for (double v : layer.bias) out[i++] = v;
  }
}

void GradientBundle::set_zero() {
  for (DenseLayer& layer : layers) {
    std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x) {
  MlpTape tape;
  const std::span<const double> out = mlp_forward(params, x, tape);
  return {out.begin(), out.end()};
}

std::span<const double> mlp_forward(const MlpParams& params, std::span<const double> x,
                                    MlpTape& tape) {
  check_input(params, x);
  const auto& layers = params.layers();
  tape.params_ = &params;
  tape.consumed_ = false;
  tape.activations_.resize(layers.size() + 1);
  tape.activations_[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::vector<double>& out = tape.activations_[l + 1];
    affine(layers[l], tape.activations_[l], out);
    if (l + 1 < layers.size()) {
      for (double& v : out) v = std::tanh(v);
    }
  }
  return tape.activations_.back();
}

double mlp_scalar(const MlpParams& params, double x) {
  MlpTape tape;
  return mlp_scalar(params, x, tape);
}

double mlp_scalar(const MlpParams& params, double x, MlpTape& tape) {
  const double in[1] = {x};
  const std::span<const double> out = mlp_forward(params, in, tape);
  if (out.size() != 1) throw ShapeError("mlp_scalar: network output is not scalar");
  return out[0];
}

void mlp_backward_accumulate(MlpTape& tape, std::span<const double> output_adjoint,
                             GradientBundle& grads, std::span<double> input_adjoint) {
  if (tape.params_ == nullptr) throw UsageError("mlp_backward: tape holds no forward pass");
  if (tape.consumed_) throw UsageError("mlp_backward: tape already consumed");
  const MlpParams& params = *tape.params_;
  const auto& layers = params.layers();
  if (output_adjoint.size() != params.output_dim()) {
    throw ShapeError("mlp_backward: adjoint dimension does not match the network output");
  }
  if (grads.layers.size() != layers.size()) {
    throw ShapeError("mlp_backward: gradient bundle does not match the network");
  }
  if (!input_adjoint.empty() && input_adjoint.size() != params.input_dim()) {
    throw ShapeError("mlp_backward: input adjoint has the wrong dimension");
  }
  tape.consumed_ = true;

  std::vector<double>& delta = tape.delta_;
  std::vector<double>& delta_prev = tape.delta_prev_;
  delta.assign(output_adjoint.begin(), output_adjoint.end());

  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& layer = layers[l];
    DenseLayer& g = grads.layers[l];
    const std::vector<double>& in = tape.activations_[l];
    for (std::size_t i = 0; i < layer.outputs; ++i) {
      const double d = delta[i];
      g.bias[i] += d;
      double* grow = g.weights.data() + i * layer.inputs;
      for (std::size_t j = 0; j < layer.inputs; ++j) grow[j] += d * in[j];
    }
    if (l == 0 && input_adjoint.empty()) break;

    delta_prev.assign(layer.inputs, 0.0);
    for (std::size_t i = 0; i < layer.outputs; ++i) {
      const double d = delta[i];
      const double* row = layer.weights.data() + i * layer.inputs;
      for (std::size_t j = 0; j < layer.inputs; ++j) delta_prev[j] += row[j] * d;
    }
    if (l > 0) {
      // tanh'(h) = 1 - tanh(h)^2, with tanh(h) stored as the activation.
      for (std::size_t j = 0; j < layer.inputs; ++j) delta_prev[j] *= 1.0 - in[j] * in[j];
    }
    delta.swap(delta_prev);
  }
  if (!input_adjoint.empty()) {
    for (std::size_t j = 0; j < input_adjoint.size(); ++j) input_adjoint[j] = delta[j];
  }
}

GradientBundle mlp_backward(MlpTape& tape, std::span<const double> output_adjoint) {
  if (tape.params_ == nullptr) throw UsageError("mlp_backward: tape holds no forward pass");
  GradientBundle grads = GradientBundle::zeros_like(*tape.params_);
  mlp_backward_accumulate(tape, output_adjoint, grads);
  return grads;
}

MlpParams init_params(std::span<const std::size_t> widths, NoiseSeed seed) {
  if (widths.size() < 2) {
    throw ConfigError("init_params: need at least input and output widths");
  }
  for (std::size_t w : widths) {
    if (w == 0) throw ConfigError("init_params: widths must be positive");
  }
  RandomStream stream(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer = zero_layer(widths[l], widths[l + 1]);
    const double bound = std::sqrt(1.0 / static_cast<double>(layer.inputs));
    for (double& v : layer.weights) v = bound * (2.0 * stream.uniform() - 1.0);
    layers.push_back(std::move(layer));
  }
  return MlpParams(std::move(layers));
}

}  // namespace nansde
