#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nansde/adam.hpp"
#include "nansde/grid.hpp"
#include "nansde/integrator.hpp"
#include "nansde/kde.hpp"
#include "nansde/random.hpp"

namespace nansde {

/// r_t = log(X_{t+1} / X_t).
struct LogReturnSeries {
  std::vector<double> r;

  std::size_t size() const noexcept { return r.size(); }
};

/// Throws DataError naming the first non-positive value.
LogReturnSeries log_returns(const Path& path);
LogReturnSeries log_returns(std::span<const double> values);

/// True when every value is strictly positive (log returns exist).
bool strictly_positive(std::span<const double> values) noexcept;

struct LossTerms {
  double loss = 0.0;
  /// Per-t bandwidth used (either Silverman or the fixed one supplied).
  std::vector<double> bandwidths;
  /// d loss / d generated return, [path][t]; empty unless requested.
  std::vector<std::vector<double>> return_adjoints;
};

/// L = -(1/T) sum_t log max(floor, p_t(r_t)) with p_t the Gaussian KDE of
/// the generated returns at t. Bandwidths are treated as constants for the
/// adjoints. Throws TrainingError for fewer than two generated series or a
/// length mismatch.
LossTerms nll_terms(const LogReturnSeries& observed,
                    std::span<const std::vector<double>> generated, double floor,
                    bool with_adjoints, std::span<const double> fixed_bandwidths = {});

/// Paths with any non-positive value are dropped before the KDE.
double nll_loss(const LogReturnSeries& observed, const Ensemble& ensemble, double floor);

struct TrainConfig {
  std::size_t m = 128;
  AdamConfig adam{};
  std::size_t max_iters = 1000;
  std::size_t patience = 200;
  double kde_floor = kDefaultKdeFloor;
  NoiseSeed seed{};
  /// Above this fraction of dropped paths an iteration cannot improve the best loss.
  double max_dropped_fraction = 0.2;
  /// Worker threads; results do not depend on it.
  unsigned threads = 1;
  /// Empty trains everything. Otherwise one flag per entry of
  /// NansdeModel::parameters(); frozen entries get a zero gradient.
  std::vector<bool> trainable{};

  /// Throws ConfigError.
  void validate() const;
};

/// Brownian streams for iteration i: seed derived from (cfg.seed, i), path j
/// on stream cfg.seed.stream_id + j.
NoiseSeed iteration_seed(const TrainConfig& cfg, std::size_t iteration);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // NansdeModel::parameters() order
  std::vector<double> bandwidths;
  std::size_t survivors = 0;
  std::size_t dropped = 0;
};

/// Simulates m paths from `seed`, evaluates the loss and its pathwise
/// gradient. Throws TrainingError if fewer than two paths survive.
LossGradient loss_and_gradient(const NansdeModel& model, const LogReturnSeries& observed,
                               std::size_t m, NoiseSeed seed, double floor, unsigned threads,
                               std::span<const double> fixed_bandwidths = {});

/// Loss only (no tapes).
double evaluate_loss(const NansdeModel& model, const LogReturnSeries& observed, std::size_t m,
                     NoiseSeed seed, double floor, unsigned threads,
                     std::span<const double> fixed_bandwidths = {});

struct TrainState {
  NansdeModel model;
  Adam optimizer;
  NansdeModel best_model;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t best_iteration = 0;
  std::size_t since_improvement = 0;
  std::size_t iteration = 0;
  std::vector<double> loss_history{};
  std::vector<double> best_history{};
  std::vector<std::string> warnings{};
};

TrainState initial_state(NansdeModel model, const TrainConfig& cfg);

/// One Adam step on the loss at the current parameters. Failed iterations
/// (too few surviving paths, non-finite gradient) record an infinite loss
/// and skip the update.
TrainState train_step(TrainState state, const LogReturnSeries& observed, const TrainConfig& cfg);

struct FitResult {
  NansdeModel model;  // best-loss parameters
  double best_loss = 0.0;
  std::size_t best_iteration = 0;
  std::vector<double> loss_history{};
  std::vector<double> best_history{};
  std::vector<std::string> warnings{};
};

/// Called after every completed step.
using StepObserver = std::function<void(const TrainState&)>;

/// Runs train_step until max_iters or until `patience` consecutive steps
/// pass without improving the best loss. Throws DataError for non-positive
/// observations.
FitResult fit(NansdeModel initial, const Path& observed, const TrainConfig& cfg,
              const StepObserver& observer = {});

/// Builds the initial model on the observed grid with x0 = observed[0].
FitResult fit(const Path& observed, const TrainConfig& cfg, const ModelArchitecture& arch,
              std::uint64_t init_seed, const StepObserver& observer = {});

}  // namespace nansde
