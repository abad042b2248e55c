#include "nansde/integrator.hpp"

#include <cmath>
#include <string>

#include "nansde/error.hpp"
#include "nansde/noise.hpp"
#include "nansde/parallel.hpp"

namespace nansde {
namespace {

void require_scalar(const MlpParams& net, const char* name) {
  if (net.input_dim() != 1 || net.output_dim() != 1) {
    throw ShapeError(std::string("NansdeModel: network '") + name +
                     "' must map a scalar to a scalar");
  }
}

bool out_of_bounds(double x, double k) {
  return !(std::abs(x) <= kDivergenceBound) || !(std::abs(k) <= kDivergenceBound);
}

}  // namespace

double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void NansdeModel::validate() const {
  require_scalar(drift, "drift");
  require_scalar(diffusion, "diffusion");
  require_scalar(ell1, "ell1");
  require_scalar(ell2, "ell2");
  if (!std::isfinite(x0)) throw ConfigError("NansdeModel: x0 must be finite");
}

double NansdeModel::drift_at(double x) const { return mlp_scalar(drift, x); }

double NansdeModel::diffusion_at(double x) const {
  return softplus(mlp_scalar(diffusion, x)) + kDiffusionFloor;
}

double NansdeModel::ell1_at(double t) const { return mlp_scalar(ell1, t); }

double NansdeModel::ell2_at(double t) const {
  return ell2_clamped ? 0.0 : mlp_scalar(ell2, t);
}

std::size_t NansdeModel::parameter_count() const noexcept {
  return drift.parameter_count() + diffusion.parameter_count() + ell1.parameter_count() +
         ell2.parameter_count();
}

std::vector<double> NansdeModel::parameters() const {
  std::vector<double> flat(parameter_count());
  std::span<double> out(flat);
  std::size_t offset = 0;
  for (const MlpParams* net : {&drift, &diffusion, &ell1, &ell2}) {
    net->copy_to(out.subspan(offset, net->parameter_count()));
    offset += net->parameter_count();
  }
  return flat;
}

void NansdeModel::assign_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw ShapeError("NansdeModel::assign_parameters: size mismatch");
  }
  std::size_t offset = 0;
  for (MlpParams* net : {&drift, &diffusion, &ell1, &ell2}) {
    net->assign_from(flat.subspan(offset, net->parameter_count()));
    offset += net->parameter_count();
  }
}

NansdeModel make_model(const ModelArchitecture& arch, const TimeGrid& grid, double x0,
                       std::uint64_t init_seed) {
  if (arch.widths.size() < 2 || arch.widths.front() != 1 || arch.widths.back() != 1) {
    throw ConfigError("make_model: widths must start and end with 1");
  }
  auto net = [&](std::uint64_t salt) {
    return init_params(arch.widths, NoiseSeed{derive_seed(init_seed, salt), 0});
  };
  NansdeModel model{net(1), net(2), net(3), net(4), grid, x0, arch.ell2_clamped};
  model.validate();
  return model;
}

KernelTrack kernel_track(const NansdeModel& model) {
  const std::size_t n = model.grid.n_steps();
  KernelTrack track{std::vector<double>(n), std::vector<double>(n, 0.0)};
  MlpTape tape;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = model.grid.time(k);
    track.ell1[k] = mlp_scalar(model.ell1, t, tape);
    if (!model.ell2_clamped) track.ell2[k] = mlp_scalar(model.ell2, t, tape);
  }
  return track;
}

Trajectory integrate(const NansdeModel& model, const KernelTrack& track,
                     std::span<const double> increments) {
  const std::size_t n = model.grid.n_steps();
  if (increments.size() != n || track.ell1.size() != n || track.ell2.size() != n) {
    throw ShapeError("integrate: increments or kernel track do not match the grid");
  }
  const double dt = model.grid.dt();
  Trajectory out{std::vector<double>(n + 1, 0.0), std::vector<double>(n + 1, 0.0), std::nullopt};
  out.x[0] = model.x0;
  MlpTape tape;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = out.x[k];
    const double kk = out.k[k];
    const double dw = increments[k];
    const double b = mlp_scalar(model.drift, x, tape);
    const double s = softplus(mlp_scalar(model.diffusion, x, tape)) + kDiffusionFloor;
    out.k[k + 1] = kk + track.ell2[k] * dw;
    out.x[k + 1] = x + (b - track.ell1[k] * s * kk) * dt + s * dw;
    if (out_of_bounds(out.x[k + 1], out.k[k + 1])) {
      out.diverged_at = k + 1;
      return out;
    }
  }
  return out;
}

Path simulate_path(const NansdeModel& model, NoiseSeed seed) {
  model.validate();
  const std::vector<double> dw = brownian_increments(model.grid, seed);
  Trajectory traj = integrate(model, kernel_track(model), dw);
  if (traj.diverged_at) {
    throw IntegrationError("simulate_path: state diverged", *traj.diverged_at);
  }
  return Path(model.grid, std::move(traj.x));
}

Ensemble simulate_ensemble(const NansdeModel& model, std::size_t m, NoiseSeed base,
                           unsigned threads) {
  if (m == 0) throw ConfigError("simulate_ensemble: m must be at least 1");
  model.validate();
  const KernelTrack track = kernel_track(model);
  std::vector<std::optional<Path>> slots(m);
  parallel_for(m, threads, [&](std::size_t i) {
    const NoiseSeed seed{base.seed, base.stream_id + i};
    const std::vector<double> dw = brownian_increments(model.grid, seed);
    Trajectory traj = integrate(model, track, dw);
    if (traj.diverged_at) {
      throw DivergenceError("simulate_ensemble: state diverged", *traj.diverged_at, i);
    }
    slots[i].emplace(model.grid, std::move(traj.x));
  });
  Ensemble out;
  out.paths.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.paths.push_back(std::move(*slots[i]));
    out.seeds.push_back(NoiseSeed{base.seed, base.stream_id + i});
  }
  return out;
}

PathGradient& PathGradient::operator+=(const PathGradient& other) {
  drift += other.drift;
  diffusion += other.diffusion;
  if (ell1_adjoint.size() != other.ell1_adjoint.size() ||
      ell2_adjoint.size() != other.ell2_adjoint.size()) {
    throw ShapeError("PathGradient: grid mismatch");
  }
  for (std::size_t k = 0; k < ell1_adjoint.size(); ++k) ell1_adjoint[k] += other.ell1_adjoint[k];
  for (std::size_t k = 0; k < ell2_adjoint.size(); ++k) ell2_adjoint[k] += other.ell2_adjoint[k];
  x0_adjoint += other.x0_adjoint;
  return *this;
}

ModelGradient ModelGradient::zeros_like(const NansdeModel& model) {
  return {GradientBundle::zeros_like(model.drift), GradientBundle::zeros_like(model.diffusion),
          GradientBundle::zeros_like(model.ell1), GradientBundle::zeros_like(model.ell2), 0.0};
}

std::vector<double> ModelGradient::flatten() const {
  std::vector<double> flat(drift.parameter_count() + diffusion.parameter_count() +
                           ell1.parameter_count() + ell2.parameter_count());
  std::span<double> out(flat);
  std::size_t offset = 0;
  for (const GradientBundle* g : {&drift, &diffusion, &ell1, &ell2}) {
    g->copy_to(out.subspan(offset, g->parameter_count()));
    offset += g->parameter_count();
  }
  return flat;
}

PathTape::PathTape(const NansdeModel& model, std::shared_ptr<const KernelTrack> track,
                   std::vector<double> increments, Trajectory trajectory)
    : model_(&model),
      track_(std::move(track)),
      increments_(std::move(increments)),
      trajectory_(std::move(trajectory)) {}

PathGradient PathTape::backward(std::span<const double> x_adjoint) {
  if (consumed_) throw UsageError("PathTape: already consumed");
  if (diverged()) throw UsageError("PathTape: cannot differentiate a diverged path");
  const NansdeModel& model = *model_;
  const std::size_t n = model.grid.n_steps();
  if (x_adjoint.size() != n + 1) {
    throw ShapeError("PathTape::backward: adjoint must have one entry per grid point");
  }
  consumed_ = true;

  PathGradient g{GradientBundle::zeros_like(model.drift),
                 GradientBundle::zeros_like(model.diffusion), std::vector<double>(n, 0.0),
                 std::vector<double>(n, 0.0), 0.0};
  const double dt = model.grid.dt();
  const std::vector<double>& xs = trajectory_.x;
  const std::vector<double>& ks = trajectory_.k;
  MlpTape drift_tape;
  MlpTape diffusion_tape;

  double adj_x = x_adjoint[n];
  double adj_k = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double x = xs[k];
    const double kk = ks[k];
    const double dw = increments_[k];
    const double l1 = track_->ell1[k];
    mlp_scalar(model.drift, x, drift_tape);
    const double h = mlp_scalar(model.diffusion, x, diffusion_tape);
    const double s = softplus(h) + kDiffusionFloor;

    const double adj_b = adj_x * dt;
    const double adj_s = adj_x * (dw - l1 * kk * dt);
    g.ell1_adjoint[k] = -adj_x * s * kk * dt;
    if (!model.ell2_clamped) g.ell2_adjoint[k] = adj_k * dw;
    const double adj_k_prev = adj_k - adj_x * l1 * s * dt;

    double dx_drift = 0.0;
    double dx_diffusion = 0.0;
    const double b_adj[1] = {adj_b};
    const double h_adj[1] = {adj_s * sigmoid(h)};
    mlp_backward_accumulate(drift_tape, b_adj, g.drift, std::span<double>(&dx_drift, 1));
    mlp_backward_accumulate(diffusion_tape, h_adj, g.diffusion,
                            std::span<double>(&dx_diffusion, 1));

    adj_x = x_adjoint[k] + adj_x + dx_drift + dx_diffusion;
    adj_k = adj_k_prev;
  }
  g.x0_adjoint = adj_x;
  return g;
}

TapedPath simulate_with_tape(const NansdeModel& model, NoiseSeed seed) {
  model.validate();
  auto track = std::make_shared<const KernelTrack>(kernel_track(model));
  std::vector<double> dw = brownian_increments(model.grid, seed);
  Trajectory traj = integrate(model, *track, dw);
  if (traj.diverged_at) {
    throw IntegrationError("simulate_with_tape: state diverged", *traj.diverged_at);
  }
  Path path(model.grid, traj.x);
  return {std::move(path), PathTape(model, std::move(track), std::move(dw), std::move(traj))};
}

void backprop_kernels(const NansdeModel& model, std::span<const double> ell1_adjoint,
                      std::span<const double> ell2_adjoint, ModelGradient& out) {
  const std::size_t n = model.grid.n_steps();
  if (ell1_adjoint.size() != n || ell2_adjoint.size() != n) {
    throw ShapeError("backprop_kernels: adjoints must have one entry per step");
  }
  MlpTape tape;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = model.grid.time(k);
    if (ell1_adjoint[k] != 0.0) {
      mlp_scalar(model.ell1, t, tape);
      mlp_backward_accumulate(tape, ell1_adjoint.subspan(k, 1), out.ell1);
    }
    if (!model.ell2_clamped && ell2_adjoint[k] != 0.0) {
      mlp_scalar(model.ell2, t, tape);
      mlp_backward_accumulate(tape, ell2_adjoint.subspan(k, 1), out.ell2);
    }
  }
}

ModelGradient backward(const NansdeModel& model, PathTape& tape,
                       std::span<const double> x_adjoint) {
  PathGradient pg = tape.backward(x_adjoint);
  ModelGradient out{std::move(pg.drift), std::move(pg.diffusion),
                    GradientBundle::zeros_like(model.ell1), GradientBundle::zeros_like(model.ell2),
                    pg.x0_adjoint};
  backprop_kernels(model, pg.ell1_adjoint, pg.ell2_adjoint, out);
  return out;
}

}  // namespace nansde
