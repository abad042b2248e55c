#include "nansde/training.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>

#include "nansde/error.hpp"
#include "nansde/noise.hpp"
#include "nansde/parallel.hpp"

namespace nansde {
namespace {

constexpr double kInvSqrt2Pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

std::vector<double> returns_of(std::span<const double> x) {
  std::vector<double> r(x.size() - 1);
  for (std::size_t t = 0; t + 1 < x.size(); ++t) r[t] = std::log(x[t + 1] / x[t]);
  return r;
}

struct SimulatedBatch {
  std::vector<std::optional<PathTape>> tapes;  // survivors only
  std::vector<std::vector<double>> returns;   // one per survivor, in path order
  std::vector<std::size_t> survivor_index;
  std::size_t dropped = 0;
};

SimulatedBatch simulate_batch(const NansdeModel& model, std::size_t m, NoiseSeed seed,
                              unsigned threads, bool keep_tapes) {
  model.validate();
  auto track = std::make_shared<const KernelTrack>(kernel_track(model));
  std::vector<std::optional<PathTape>> tapes(m);
  std::vector<std::optional<std::vector<double>>> returns(m);
  parallel_for(m, threads, [&](std::size_t i) {
    std::vector<double> dw = brownian_increments(model.grid, NoiseSeed{seed.seed, seed.stream_id + i});
    Trajectory traj = integrate(model, *track, dw);
    if (traj.diverged_at || !strictly_positive(traj.x)) return;
    returns[i] = returns_of(traj.x);
    if (keep_tapes) tapes[i].emplace(model, track, std::move(dw), std::move(traj));
  });
  SimulatedBatch batch;
  for (std::size_t i = 0; i < m; ++i) {
    if (!returns[i]) {
      ++batch.dropped;
      continue;
    }
    batch.survivor_index.push_back(i);
    batch.returns.push_back(std::move(*returns[i]));
    batch.tapes.push_back(std::move(tapes[i]));
  }
  if (batch.returns.size() < 2) {
    throw TrainingError("only " + std::to_string(batch.returns.size()) + " of " +
                        std::to_string(m) + " generated paths stayed positive and bounded");
  }
  return batch;
}

}  // namespace

bool strictly_positive(std::span<const double> values) noexcept {
  for (double v : values) {
    if (!(v > 0.0)) return false;
  }
  return true;
}

LogReturnSeries log_returns(std::span<const double> values) {
  if (values.size() < 2) throw DataError("log_returns: need at least two values", values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] > 0.0)) throw DataError("log_returns: non-positive value", k);
  }
  return LogReturnSeries{returns_of(values)};
}

LogReturnSeries log_returns(const Path& path) { return log_returns(path.values()); }

LossTerms nll_terms(const LogReturnSeries& observed,
                    std::span<const std::vector<double>> generated, double floor,
                    bool with_adjoints, std::span<const double> fixed_bandwidths) {
  const std::size_t T = observed.size();
  const std::size_t M = generated.size();
  if (M < 2) throw TrainingError("nll: fewer than two generated series");
  if (T == 0) throw TrainingError("nll: empty observed series");
  if (!(floor > 0.0)) throw ConfigError("nll: floor must be positive");
  for (const auto& g : generated) {
    if (g.size() != T) throw TrainingError("nll: generated series length differs from observed");
  }
  if (!fixed_bandwidths.empty() && fixed_bandwidths.size() != T) {
    throw TrainingError("nll: fixed bandwidths must have one entry per time index");
  }

  LossTerms out;
  out.bandwidths.resize(T);
  if (with_adjoints) out.return_adjoints.assign(M, std::vector<double>(T, 0.0));

  std::vector<double> column(M);
  std::vector<double> kernel(M);
  const double inv_T = 1.0 / static_cast<double>(T);
  const double inv_M = 1.0 / static_cast<double>(M);
  double total = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < M; ++i) column[i] = generated[i][t];
    const double h = fixed_bandwidths.empty() ? silverman_bandwidth(column) : fixed_bandwidths[t];
    out.bandwidths[t] = h;
    double acc = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      const double z = (observed.r[t] - column[i]) / h;
      kernel[i] = std::exp(-0.5 * z * z);
      acc += kernel[i];
    }
    const double density = kInvSqrt2Pi * acc * inv_M / h;
    if (density > floor) {
      total -= std::log(density);
      if (with_adjoints) {
        // d(-log f)/ds_i = -z_i phi(z_i) / (f M h^2)
        const double scale = -inv_T * kInvSqrt2Pi * inv_M / (density * h * h);
        for (std::size_t i = 0; i < M; ++i) {
          const double z = (observed.r[t] - column[i]) / h;
          out.return_adjoints[i][t] = scale * z * kernel[i];
        }
      }
    } else {
      total -= std::log(floor);
    }
  }
  out.loss = total * inv_T;
  return out;
}

double nll_loss(const LogReturnSeries& observed, const Ensemble& ensemble, double floor) {
  std::vector<std::vector<double>> generated;
  for (const Path& p : ensemble.paths) {
    if (p.grid().n_steps() != observed.size()) {
      throw TrainingError("nll_loss: ensemble grid does not cover the observed series");
    }
    if (strictly_positive(p.values())) generated.push_back(returns_of(p.values()));
  }
  if (generated.size() < 2) throw TrainingError("nll_loss: fewer than two surviving paths");
  return nll_terms(observed, generated, floor, false).loss;
}

void TrainConfig::validate() const {
  if (m < 2) throw ConfigError("TrainConfig: m must be at least 2");
  if (!(adam.lr > 0.0)) throw ConfigError("TrainConfig: lr must be positive");
  if (max_iters == 0) throw ConfigError("TrainConfig: max_iters must be positive");
  if (patience > max_iters) throw ConfigError("TrainConfig: patience must not exceed max_iters");
  if (!(kde_floor > 0.0)) throw ConfigError("TrainConfig: kde_floor must be positive");
  if (!(max_dropped_fraction >= 0.0 && max_dropped_fraction <= 1.0)) {
    throw ConfigError("TrainConfig: max_dropped_fraction must lie in [0, 1]");
  }
}

NoiseSeed iteration_seed(const TrainConfig& cfg, std::size_t iteration) {
  return NoiseSeed{derive_seed(cfg.seed.seed, iteration), cfg.seed.stream_id};
}

LossGradient loss_and_gradient(const NansdeModel& model, const LogReturnSeries& observed,
                               std::size_t m, NoiseSeed seed, double floor, unsigned threads,
                               std::span<const double> fixed_bandwidths) {
  if (model.grid.n_steps() != observed.size()) {
    throw TrainingError("loss_and_gradient: model grid does not match the observed series");
  }
  SimulatedBatch batch = simulate_batch(model, m, seed, threads, true);
  LossTerms terms = nll_terms(observed, batch.returns, floor, true, fixed_bandwidths);

  const std::size_t survivors = batch.returns.size();
  std::vector<std::optional<PathGradient>> partial(survivors);
  parallel_for(survivors, threads, [&](std::size_t j) {
    PathTape& tape = *batch.tapes[j];
    const std::vector<double>& x = tape.x();
    const std::vector<double>& adj_r = terms.return_adjoints[j];
    std::vector<double> adj_x(x.size(), 0.0);
    for (std::size_t t = 0; t < adj_r.size(); ++t) {
      adj_x[t + 1] += adj_r[t] / x[t + 1];
      adj_x[t] -= adj_r[t] / x[t];
    }
    partial[j] = tape.backward(adj_x);
  });
  std::vector<PathGradient> pieces;
  pieces.reserve(survivors);
  for (auto& p : partial) pieces.push_back(std::move(*p));
  PathGradient total =
      tree_reduce(std::move(pieces), [](PathGradient& a, const PathGradient& b) { a += b; });

  ModelGradient grad{std::move(total.drift), std::move(total.diffusion),
                     GradientBundle::zeros_like(model.ell1),
                     GradientBundle::zeros_like(model.ell2), total.x0_adjoint};
  backprop_kernels(model, total.ell1_adjoint, total.ell2_adjoint, grad);

  return LossGradient{terms.loss, grad.flatten(), std::move(terms.bandwidths), survivors,
                      batch.dropped};
}

double evaluate_loss(const NansdeModel& model, const LogReturnSeries& observed, std::size_t m,
                     NoiseSeed seed, double floor, unsigned threads,
                     std::span<const double> fixed_bandwidths) {
  if (model.grid.n_steps() != observed.size()) {
    throw TrainingError("evaluate_loss: model grid does not match the observed series");
  }
  const SimulatedBatch batch = simulate_batch(model, m, seed, threads, false);
  return nll_terms(observed, batch.returns, floor, false, fixed_bandwidths).loss;
}

TrainState initial_state(NansdeModel model, const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  if (!cfg.trainable.empty() && cfg.trainable.size() != model.parameter_count()) {
    throw ShapeError("TrainConfig: trainable mask size differs from the parameter count");
  }
  Adam optimizer(model.parameter_count(), cfg.adam);
  NansdeModel best = model;
  return TrainState{.model = std::move(model),
                    .optimizer = std::move(optimizer),
                    .best_model = std::move(best)};
}

TrainState train_step(TrainState state, const LogReturnSeries& observed, const TrainConfig& cfg) {
  if (!cfg.trainable.empty() && cfg.trainable.size() != state.model.parameter_count()) {
    throw ShapeError("TrainConfig: trainable mask size differs from the parameter count");
  }
  const std::size_t iter = state.iteration;
  std::optional<LossGradient> lg;
  try {
    lg = loss_and_gradient(state.model, observed, cfg.m, iteration_seed(cfg, iter), cfg.kde_floor,
                           cfg.threads);
  } catch (const TrainingError& e) {
    state.warnings.push_back("iteration " + std::to_string(iter) + ": " + e.what());
  }
  if (lg && !cfg.trainable.empty()) {
    for (std::size_t i = 0; i < lg->gradient.size(); ++i) {
      if (!cfg.trainable[i]) lg->gradient[i] = 0.0;
    }
  }
  if (lg) {
    bool finite = std::isfinite(lg->loss);
    for (double g : lg->gradient) finite = finite && std::isfinite(g);
    if (!finite) {
      state.warnings.push_back("iteration " + std::to_string(iter) +
                               ": non-finite loss or gradient, step skipped");
      lg.reset();
    }
  }

  const double loss = lg ? lg->loss : std::numeric_limits<double>::infinity();
  state.loss_history.push_back(loss);
  const bool too_many_dropped =
      lg && static_cast<double>(lg->dropped) >
                cfg.max_dropped_fraction * static_cast<double>(cfg.m);
  if (too_many_dropped) {
    state.warnings.push_back("iteration " + std::to_string(iter) + ": " +
                             std::to_string(lg->dropped) + " of " + std::to_string(cfg.m) +
                             " paths dropped");
  }
  if (lg && !too_many_dropped && loss < state.best_loss) {
    state.best_loss = loss;
    state.best_model = state.model;
    state.best_iteration = iter;
    state.since_improvement = 0;
  } else {
    ++state.since_improvement;
  }
  state.best_history.push_back(state.best_loss);

  if (lg) {
    std::vector<double> params = state.model.parameters();
    state.optimizer.step(params, lg->gradient);
    state.model.assign_parameters(params);
  }
  ++state.iteration;
  return state;
}

FitResult fit(NansdeModel initial, const Path& observed, const TrainConfig& cfg,
              const StepObserver& observer) {
  const LogReturnSeries returns = log_returns(observed);
  TrainState state = initial_state(std::move(initial), cfg);
  while (state.iteration < cfg.max_iters) {
    state = train_step(std::move(state), returns, cfg);
    if (observer) observer(state);
    if (state.since_improvement >= cfg.patience) break;
  }
  return FitResult{std::move(state.best_model), state.best_loss,  state.best_iteration,
                   std::move(state.loss_history), std::move(state.best_history),
                   std::move(state.warnings)};
}

FitResult fit(const Path& observed, const TrainConfig& cfg, const ModelArchitecture& arch,
              std::uint64_t init_seed, const StepObserver& observer) {
  return fit(make_model(arch, observed.grid(), observed.front(), init_seed), observed, cfg,
             observer);
}

}  // namespace nansde
