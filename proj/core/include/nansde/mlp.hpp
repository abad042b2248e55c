#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nansde/random.hpp"

namespace nansde {

/// Affine map y = W x + b with W stored row-major (outputs x inputs).
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(std::size_t row, std::size_t col) { return weights[row * inputs + col]; }
  double w(std::size_t row, std::size_t col) const { return weights[row * inputs + col]; }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Multilayer perceptron: tanh on every hidden layer, affine output layer.
class MlpParams {
 public:
  /// Throws ShapeError if adjacent layers disagree or a tensor has the wrong
  /// size, ConfigError if `layers` is empty or an entry is not finite.
  explicit MlpParams(std::vector<DenseLayer> layers);

  /// All-zero network with the given layer widths (input first).
  static MlpParams zeros(std::span<const std::size_t> widths);

  std::vector<std::size_t> widths() const;
  std::size_t input_dim() const noexcept { return layers_.front().inputs; }
  std::size_t output_dim() const noexcept { return layers_.back().outputs; }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  std::size_t parameter_count() const noexcept;

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  DenseLayer& layer(std::size_t i) { return layers_[i]; }

  /// Flat order: per layer, weights row-major then bias.
  void copy_to(std::span<double> out) const;
  void assign_from(std::span<const double> flat);

  friend bool operator==(const MlpParams&, const MlpParams&) = default;

 private:
  std::vector<DenseLayer> layers_;
};

/// Gradient accumulator, shape-congruent with the MlpParams it came from.
struct GradientBundle {
  std::vector<DenseLayer> layers;

  static GradientBundle zeros_like(const MlpParams& params);
  GradientBundle& operator+=(const GradientBundle& other);
  std::size_t parameter_count() const noexcept;
  void copy_to(std::span<double> out) const;
  void set_zero();
};

/// Activations recorded by one forward pass; consumed by one backward pass.
/// Buffers are reused when the same tape records again.
class MlpTape {
 public:
  bool recorded() const noexcept { return params_ != nullptr && !consumed_; }

 private:
  friend std::span<const double> mlp_forward(const MlpParams&, std::span<const double>,
                                             MlpTape&);
  friend void mlp_backward_accumulate(MlpTape&, std::span<const double>, GradientBundle&,
                                      std::span<double>);
  friend GradientBundle mlp_backward(MlpTape&, std::span<const double>);

  const MlpParams* params_ = nullptr;
  // activations_[0] is the input, activations_[l + 1] the output of layer l.
  std::vector<std::vector<double>> activations_;
  std::vector<double> delta_;
  std::vector<double> delta_prev_;
  bool consumed_ = false;
};

/// Throws ShapeError if x.size() != params.input_dim().
std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> x);

/// Records the pass on `tape` (which must not outlive `params`) and returns
/// a view of the output stored inside it.
std::span<const double> mlp_forward(const MlpParams& params, std::span<const double> x,
                                    MlpTape& tape);

/// Scalar-in, scalar-out convenience for the 1 -> ... -> 1 networks.
double mlp_scalar(const MlpParams& params, double x);
double mlp_scalar(const MlpParams& params, double x, MlpTape& tape);

/// Reverse pass for the scalar <output_adjoint, output>. Adds parameter
/// gradients into `grads` and, when `input_adjoint` is non-empty, writes the
/// gradient w.r.t. the input there. Throws UsageError if the tape holds no
/// pass or was already consumed.
void mlp_backward_accumulate(MlpTape& tape, std::span<const double> output_adjoint,
                             GradientBundle& grads, std::span<double> input_adjoint = {});

GradientBundle mlp_backward(MlpTape& tape, std::span<const double> output_adjoint);

/// Weights ~ U(-sqrt(1/fan_in), sqrt(1/fan_in)), zero biases.
/// Throws ConfigError for fewer than two widths or a zero width.
MlpParams init_params(std::span<const std::size_t> widths, NoiseSeed seed);

}  // namespace nansde
