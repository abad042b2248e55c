#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "nansde/grid.hpp"
#include "nansde/mlp.hpp"
#include "nansde/random.hpp"

namespace nansde {

/// Lower bound added to softplus so the diffusion is strictly positive.
inline constexpr double kDiffusionFloor = 1e-4;

/// A path is abandoned once |X| or |K| exceeds this.
inline constexpr double kDivergenceBound = 1e12;

double softplus(double x) noexcept;
double sigmoid(double x) noexcept;

/// Generator dX = {b(X) - l1(t) s(X) K} dt + s(X) dW, dK = l2(t) dW.
/// All four networks map a scalar to a scalar; the diffusion network's
/// output h is turned into s = softplus(h) + kDiffusionFloor.
struct NansdeModel {
  MlpParams drift;
  MlpParams diffusion;
  MlpParams ell1;
  MlpParams ell2;
  TimeGrid grid;
  double x0 = 0.0;
  /// Forces l2 = 0: the SDE-Net baseline. The l2 weights are then ignored.
  bool ell2_clamped = false;

  /// Throws ShapeError unless every network is scalar-in, scalar-out.
  void validate() const;

  double drift_at(double x) const;
  double diffusion_at(double x) const;
  double ell1_at(double t) const;
  double ell2_at(double t) const;

  /// Flat order: drift, diffusion, ell1, ell2 (x0 and grid are not trainable).
  std::size_t parameter_count() const noexcept;
  std::vector<double> parameters() const;
  void assign_parameters(std::span<const double> flat);
};

struct ModelArchitecture {
  std::vector<std::size_t> widths{1, 20, 1};
  bool ell2_clamped = false;
};

/// Four independently initialised networks with seeds derived from init_seed.
NansdeModel make_model(const ModelArchitecture& arch, const TimeGrid& grid, double x0,
                       std::uint64_t init_seed);

/// l1(t_k), l2(t_k) for k = 0..n_steps-1. They depend only on time, so one
/// track serves every path of an ensemble.
struct KernelTrack {
  std::vector<double> ell1;
  std::vector<double> ell2;
};

KernelTrack kernel_track(const NansdeModel& model);

struct Trajectory {
  std::vector<double> x;
  std::vector<double> k;
  /// Index of the first grid point whose state left the finite/bounded
  /// region; x and k are only meaningful up to it.
  std::optional<std::size_t> diverged_at;
};

/// Explicit Euler scheme with K taken at the left endpoint:
///   K_{k+1} = K_k + l2(t_k) dW_k
///   X_{k+1} = X_k + (b(X_k) - l1(t_k) s(X_k) K_k) dt + s(X_k) dW_k
Trajectory integrate(const NansdeModel& model, const KernelTrack& track,
                     std::span<const double> increments);

/// Throws IntegrationError with the step index if the path diverges.
Path simulate_path(const NansdeModel& model, NoiseSeed seed);

struct Ensemble {
  std::vector<Path> paths;
  std::vector<NoiseSeed> seeds;
};

/// Path i uses stream base.stream_id + i. Content is independent of
/// `threads`. Throws DivergenceError naming the first diverging path.
Ensemble simulate_ensemble(const NansdeModel& model, std::size_t m, NoiseSeed base,
                           unsigned threads = 1);

/// Per-path gradient pieces. The kernel networks are handled separately:
/// their adjoints per grid step can be summed over paths before one
/// backward pass through l1 and l2.
struct PathGradient {
  GradientBundle drift;
  GradientBundle diffusion;
  std::vector<double> ell1_adjoint;
  std::vector<double> ell2_adjoint;
  double x0_adjoint = 0.0;

  PathGradient& operator+=(const PathGradient& other);
};

struct ModelGradient {
  GradientBundle drift;
  GradientBundle diffusion;
  GradientBundle ell1;
  GradientBundle ell2;
  double x0 = 0.0;

  static ModelGradient zeros_like(const NansdeModel& model);
  /// Same order as NansdeModel::parameters().
  std::vector<double> flatten() const;
};

/// Everything needed to differentiate one simulated path with its
/// increments held fixed. Consumed by a single backward pass.
class PathTape {
 public:
  PathTape(const NansdeModel& model, std::shared_ptr<const KernelTrack> track,
           std::vector<double> increments, Trajectory trajectory);

  const std::vector<double>& x() const noexcept { return trajectory_.x; }
  const std::vector<double>& k() const noexcept { return trajectory_.k; }
  const std::vector<double>& increments() const noexcept { return increments_; }
  bool diverged() const noexcept { return trajectory_.diverged_at.has_value(); }

  /// Reverse sweep for the scalar sum_k x_adjoint[k] * X_k. Throws
  /// UsageError on reuse or for a diverged path, ShapeError on a bad adjoint.
  PathGradient backward(std::span<const double> x_adjoint);

 private:
  const NansdeModel* model_;
  std::shared_ptr<const KernelTrack> track_;
  std::vector<double> increments_;
  Trajectory trajectory_;
  bool consumed_ = false;
};

struct TapedPath {
  Path path;
  PathTape tape;
};

/// Same values as simulate_path, bit for bit, plus the tape.
TapedPath simulate_with_tape(const NansdeModel& model, NoiseSeed seed);

/// Backpropagates per-step kernel adjoints through the l1/l2 networks.
void backprop_kernels(const NansdeModel& model, std::span<const double> ell1_adjoint,
                      std::span<const double> ell2_adjoint, ModelGradient& out);

/// Full gradient of sum_k x_adjoint[k] * X_k for one taped path.
ModelGradient backward(const NansdeModel& model, PathTape& tape,
                       std::span<const double> x_adjoint);

}  // namespace nansde
