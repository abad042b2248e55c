#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "nansde/error.hpp"
#include "nansde/noise.hpp"
#include "nansde/training.hpp"
#include "test_support.hpp"

namespace nansde {
namespace {

MlpParams affine(double w, double b) { return MlpParams({DenseLayer{1, 1, {w}, {b}}}); }

double diffusion_head_for(double s) { return std::log(std::expm1(s - kDiffusionFloor)); }

NansdeModel random_model(std::vector<std::size_t> widths, const TimeGrid& grid, double x0,
                         std::uint64_t seed, double scale) {
  NansdeModel m = make_model(ModelArchitecture{widths, false}, grid, x0, seed);
  std::vector<double> theta = m.parameters();
  RandomStream rng({seed, 99});
  for (double& v : theta) v = scale * (2.0 * rng.uniform() - 1.0);
  m.assign_parameters(theta);
  return m;
}

// Random model whose diffusion stays moderate so paths from x0 = 2 remain positive.
NansdeModel tame_model(const TimeGrid& grid, std::uint64_t seed) {
  NansdeModel m = random_model({1, 4, 1}, grid, 2.0, seed, 0.5);
  m.diffusion.layer(1).bias[0] -= 1.5;
  return m;
}

TEST(LogReturns, ConstantPathGivesZeros) {
  const std::vector<double> v(5, 3.0);
  for (double r : log_returns(v).r) EXPECT_EQ(r, 0.0);
}

TEST(LogReturns, ExactLogs) {
  const std::vector<double> v{1.0, std::numbers::e, std::numbers::e * std::numbers::e};
  const LogReturnSeries r = log_returns(v);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r.r[0], 1.0, 1e-15);
  EXPECT_NEAR(r.r[1], 1.0, 1e-15);
}

TEST(LogReturns, NonPositiveValueNamesIndex) {
  const std::vector<double> v{1.0, 2.0, 0.0, 4.0};
  try {
    log_returns(v);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.index(), 2u);
  }
}

TEST(Kde, TwoPointMixtureAtUnitBandwidth) {
  const std::vector<double> s{-1.0, 1.0};
  EXPECT_NEAR(kde_log_density(s, 0.0, 1.0, 1e-12), -1.4189385332046727, 1e-14);
}

TEST(Kde, SilvermanBandwidth) {
  const std::vector<double> s{-1.0, 1.0};
  EXPECT_NEAR(silverman_bandwidth(s), 1.06 * std::sqrt(2.0) * std::pow(2.0, -0.2), 1e-15);
  const std::vector<double> same(7, 0.25);
  EXPECT_EQ(silverman_bandwidth(same), kMinBandwidth);
  EXPECT_THROW(silverman_bandwidth(std::vector<double>{1.0}), ConfigError);
}

TEST(Kde, FarQueryHitsFloor) {
  const std::vector<double> s{-1.0, 0.5, 1.0};
  EXPECT_EQ(kde_log_density(s, 1e9, 1e-12), std::log(1e-12));
}

TEST(Kde, PermutationInvariant) {
  std::vector<double> s{0.3, -1.2, 0.8, 2.0, -0.1};
  const double a = kde_log_density(s, 0.2, 1e-12);
  std::reverse(s.begin(), s.end());
  EXPECT_NEAR(kde_log_density(s, 0.2, 1e-12), a, 1e-15);
}

TEST(Kde, IntegratesToOne) {
  RandomStream rng({42, 0});
  std::vector<double> s(50);
  for (double& v : s) v = rng.normal();
  const double lo = -20.0, hi = 20.0;
  const int n = 40000;
  const double dx = (hi - lo) / n;
  double integral = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    integral += w * std::exp(kde_log_density(s, lo + i * dx, 1e-300));
  }
  EXPECT_NEAR(integral * dx, 1.0, 1e-3);
}

TEST(Nll, DegenerateEnsembleGivesPeakDensity) {
  const LogReturnSeries obs{{0.01, -0.02, 0.005, 0.0}};
  const std::vector<std::vector<double>> gen(5, obs.r);
  const LossTerms terms = nll_terms(obs, gen, 1e-12, false);
  // All samples coincide: h = 1e-6 and the density is phi(0) / h.
  EXPECT_NEAR(terms.loss, -12.896572024759601, 1e-12);
  for (double h : terms.bandwidths) EXPECT_EQ(h, kMinBandwidth);
}

TEST(Nll, FloorDominated) {
  const LogReturnSeries obs{{100.0, -100.0, 50.0}};
  const std::vector<std::vector<double>> gen{{0.0, 0.1, 0.0}, {0.1, 0.0, -0.1}, {0.0, 0.0, 0.0}};
  EXPECT_NEAR(nll_terms(obs, gen, 1e-12, false).loss, -std::log(1e-12), 1e-12);
}

TEST(Nll, InvariantToPathOrder) {
  const LogReturnSeries obs{{0.01, 0.03, -0.02}};
  std::vector<std::vector<double>> gen{
      {0.0, 0.02, -0.01}, {0.02, 0.01, 0.0}, {-0.01, 0.05, -0.03}, {0.015, 0.0, 0.01}};
  const double a = nll_terms(obs, gen, 1e-12, false).loss;
  std::reverse(gen.begin(), gen.end());
  EXPECT_NEAR(nll_terms(obs, gen, 1e-12, false).loss, a, 1e-14);
}

TEST(Nll, ErrorsOnTooFewOrMismatched) {
  const LogReturnSeries obs{{0.01, 0.03}};
  const std::vector<std::vector<double>> one{{0.0, 0.0}};
  EXPECT_THROW(nll_terms(obs, one, 1e-12, false), TrainingError);
  const std::vector<std::vector<double>> bad{{0.0, 0.0}, {0.0}};
  EXPECT_THROW(nll_terms(obs, bad, 1e-12, false), TrainingError);
}

TEST(Nll, DropsNonPositivePaths) {
  const TimeGrid grid(0.0, 0.5, 2);
  const LogReturnSeries obs{{0.1, -0.1}};
  Ensemble e;
  e.paths.emplace_back(grid, std::vector<double>{1.0, 1.1, 1.0});
  e.paths.emplace_back(grid, std::vector<double>{1.0, 0.9, 1.2});
  e.paths.emplace_back(grid, std::vector<double>{1.0, -0.5, 1.0});
  e.paths.emplace_back(grid, std::vector<double>{2.0, 2.1, 2.0});
  const std::vector<std::vector<double>> kept{
      log_returns(e.paths[0]).r, log_returns(e.paths[1]).r, log_returns(e.paths[3]).r};
  EXPECT_EQ(nll_loss(obs, e, 1e-12), nll_terms(obs, kept, 1e-12, false).loss);
}

TEST(Adam, ZeroGradientOnFreshOptimizerLeavesParameters) {
  Adam opt(3, AdamConfig{});
  std::vector<double> p{1.0, -2.0, 0.5};
  const std::vector<double> zero(3, 0.0);
  opt.step(p, zero);
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0, 0.5}));
  EXPECT_EQ(opt.steps_taken(), 1u);
}

TEST(Adam, ZeroGradientDecaysMoments) {
  Adam opt(2, AdamConfig{});
  std::vector<double> p{1.0, 1.0};
  opt.step(p, std::vector<double>{0.5, -1.0});
  const std::vector<double> m = opt.first_moment(), v = opt.second_moment();
  opt.step(p, std::vector<double>{0.0, 0.0});
  for (int i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(opt.first_moment()[i], 0.9 * m[i]);
    EXPECT_DOUBLE_EQ(opt.second_moment()[i], 0.999 * v[i]);
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Adam opt(1, AdamConfig{});
  std::vector<double> p{0.0};
  opt.step(p, std::vector<double>{3.0});
  EXPECT_NEAR(p[0], -0.004, 1e-10);
  EXPECT_THROW(opt.step(p, std::vector<double>{1.0, 2.0}), ShapeError);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.max_iters, 1000u);
  EXPECT_EQ(cfg.patience, 200u);
  EXPECT_EQ(cfg.adam.lr, 0.004);
  TrainConfig c1 = cfg;
  c1.m = 1;
  EXPECT_THROW(c1.validate(), ConfigError);
  TrainConfig c2 = cfg;
  c2.adam.lr = 0.0;
  EXPECT_THROW(c2.validate(), ConfigError);
  TrainConfig c3 = cfg;
  c3.patience = 1001;
  EXPECT_THROW(c3.validate(), ConfigError);
}

Path observed_path(const TimeGrid& grid, std::uint64_t seed) {
  const NansdeModel target = tame_model(grid, seed);
  return simulate_path(target, {seed, 1000});
}

TEST(LossGradient, EndToEndMatchesFiniteDifferences) {
  const TimeGrid grid = TimeGrid::over(0.0, 1.0, 20);
  const Path obs_path = observed_path(grid, 1);
  const LogReturnSeries obs = log_returns(obs_path);
  NansdeModel model = tame_model(grid, 2);
  const NoiseSeed seed{5, 0};
  const std::size_t m = 8;
  const LossGradient lg = loss_and_gradient(model, obs, m, seed, 1e-12, 1);
  ASSERT_EQ(lg.dropped, 0u);
  // Same bandwidths on both sides of each difference: h is a constant.
  const std::vector<double> h = lg.bandwidths;
  const LossGradient check = loss_and_gradient(model, obs, m, seed, 1e-12, 1, h);
  EXPECT_EQ(check.gradient, lg.gradient);

  std::vector<double> theta = model.parameters();
  const double step = 1e-6;
  std::size_t compared = 0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + step;
    model.assign_parameters(theta);
    const double up = evaluate_loss(model, obs, m, seed, 1e-12, 1, h);
    theta[i] = saved - step;
    model.assign_parameters(theta);
    const double down = evaluate_loss(model, obs, m, seed, 1e-12, 1, h);
    theta[i] = saved;
    model.assign_parameters(theta);
    const double fd = (up - down) / (2 * step);
    const double scale = std::max({std::abs(fd), std::abs(lg.gradient[i]), 1e-4});
    EXPECT_LT(std::abs(lg.gradient[i] - fd) / scale, 1e-3) << "param " << i;
    ++compared;
  }
  EXPECT_EQ(compared, model.parameter_count());
}

TEST(LossGradient, ThrowsWhenAllPathsGoNegative) {
  const TimeGrid grid = TimeGrid::over(0.0, 1.0, 10);
  const NansdeModel model{affine(0.0, -100.0), affine(0.0, 0.0), affine(0.0, 0.0),
                          affine(0.0, 0.0), grid, 1.0, false};
  const LogReturnSeries obs{std::vector<double>(10, 0.0)};
  EXPECT_THROW(loss_and_gradient(model, obs, 8, {1, 0}, 1e-12, 1), TrainingError);
}

TEST(TrainStep, FailedIterationRecordsWarningAndSkipsUpdate) {
  const TimeGrid grid = TimeGrid::over(0.0, 1.0, 10);
  const NansdeModel model{affine(0.0, -100.0), affine(0.0, 0.0), affine(0.0, 0.0),
                          affine(0.0, 0.0), grid, 1.0, false};
  const LogReturnSeries obs{std::vector<double>(10, 0.0)};
  TrainConfig cfg;
  cfg.m = 8;
  cfg.max_iters = 5;
  cfg.patience = 5;
  TrainState s = train_step(initial_state(model, cfg), obs, cfg);
  ASSERT_EQ(s.loss_history.size(), 1u);
  EXPECT_TRUE(std::isinf(s.loss_history[0]));
  EXPECT_EQ(s.warnings.size(), 1u);
  EXPECT_EQ(s.model.parameters(), model.parameters());
  EXPECT_EQ(s.since_improvement, 1u);
}

TEST(TrainStep, DeterministicFromIdenticalStates) {
  const TimeGrid grid = TimeGrid::over(0.0, 1.0, 30);
  const LogReturnSeries obs = log_returns(observed_path(grid, 3));
  TrainConfig cfg;
  cfg.m = 16;
  cfg.seed = {77, 0};
  const TrainState s0 = initial_state(tame_model(grid, 4), cfg);
  const TrainState a = train_step(s0, obs, cfg);
  const TrainState b = train_step(s0, obs, cfg);
  EXPECT_EQ(a.model.parameters(), b.model.parameters());
  EXPECT_EQ(a.optimizer, b.optimizer);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_NE(a.model.parameters(), s0.model.parameters());
}

TEST(TrainStep, MaskFreezesParameters) {
  const TimeGrid grid = TimeGrid::over(0.0, 1.0, 30);
  const LogReturnSeries obs = log_returns(observed_path(grid, 3));
  const NansdeModel model = tame_model(grid, 4);
  TrainConfig cfg;
  cfg.m = 16;
  cfg.trainable.assign(model.parameter_count(), false);
  cfg.trainable[0] = true;
  TrainState s = initial_state(model, cfg);
  for (int i = 0; i < 3; ++i) s = train_step(std::move(s), obs, cfg);
  const std::vector<double> before = model.parameters(), after = s.model.parameters();
  EXPECT_NE(after[0], before[0]);
  for (std::size_t i = 1; i < before.size(); ++i) EXPECT_EQ(after[i], before[i]);
  cfg.trainable.pop_back();
  EXPECT_THROW(initial_state(model, cfg), ShapeError);
}

// Only the diffusion bias trains; the target is Brownian motion around 5
// with unit volatility, the start sigma is 0.3.
TEST(Fit, DiffusionOnlyToyImprovesLoss) {
  const TimeGrid grid = TimeGrid::over(0.0, 1.0, 100);
  int improved = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const Path obs = Path::from_increments(grid, 5.0, brownian_increments(grid, {900 + s, 0}));
    ASSERT_TRUE(strictly_positive(obs.values()));
    const NansdeModel model{affine(0.0, 0.0), affine(0.0, diffusion_head_for(0.3)),
                            affine(0.0, 0.0), affine(0.0, 0.0), grid, obs.front(), false};
    TrainConfig cfg;
    cfg.m = 64;
    cfg.max_iters = 200;
    cfg.patience = 200;
    cfg.seed = {s, 0};
    cfg.trainable = {false, false, false, true, false, false, false, false};
    const LogReturnSeries r = log_returns(obs);
    TrainState st = initial_state(model, cfg);
    for (int i = 0; i < 200; ++i) st = train_step(std::move(st), r, cfg);
    const NoiseSeed eval{derive_seed(s, 12345), 0};
    const double before = evaluate_loss(model, r, 256, eval, cfg.kde_floor, 1);
    const double after = evaluate_loss(st.model, r, 256, eval, cfg.kde_floor, 1);
    if (after < before) ++improved;
  }
  EXPECT_GE(improved, 3);
}

TEST(Fit, ZeroPatienceRunsOneStep) {
  const TimeGrid grid = TimeGrid::over(0.0, 1.0, 30);
  const Path obs = observed_path(grid, 5);
  TrainConfig cfg;
  cfg.m = 8;
  cfg.max_iters = 50;
  cfg.patience = 0;
  const FitResult r = fit(tame_model(grid, 6), obs, cfg);
  EXPECT_EQ(r.loss_history.size(), 1u);
}

TEST(Fit, BestHistoryAndBestModelContract) {
  const TimeGrid grid = TimeGrid::over(0.0, 1.0, 40);
  const Path obs = observed_path(grid, 7);
  TrainConfig cfg;
  cfg.m = 16;
  cfg.max_iters = 40;
  cfg.patience = 10;
  cfg.seed = {8, 0};
  const FitResult r = fit(tame_model(grid, 8), obs, cfg);
  ASSERT_FALSE(r.loss_history.empty());
  EXPECT_EQ(r.best_history.size(), r.loss_history.size());
  for (std::size_t i = 1; i < r.best_history.size(); ++i) {
    EXPECT_LE(r.best_history[i], r.best_history[i - 1]);
  }
  const double min_loss = *std::min_element(r.loss_history.begin(), r.loss_history.end());
  EXPECT_EQ(r.best_loss, min_loss);
  EXPECT_EQ(r.loss_history[r.best_iteration], r.best_loss);
  const double recomputed = evaluate_loss(r.model, log_returns(obs), cfg.m,
                                          iteration_seed(cfg, r.best_iteration), cfg.kde_floor, 1);
  EXPECT_LE(test::rel_err(recomputed, min_loss), 1e-12);
}

TEST(Fit, IndependentOfThreadCount) {
  const TimeGrid grid = TimeGrid::over(0.0, 1.0, 40);
  const Path obs = observed_path(grid, 9);
  TrainConfig cfg;
  cfg.m = 16;
  cfg.max_iters = 6;
  cfg.patience = 6;
  cfg.seed = {10, 0};
  cfg.threads = 1;
  const FitResult a = fit(tame_model(grid, 10), obs, cfg);
  cfg.threads = 4;
  const FitResult b = fit(tame_model(grid, 10), obs, cfg);
  EXPECT_EQ(a.model.parameters(), b.model.parameters());
  EXPECT_EQ(a.loss_history, b.loss_history);
}

TEST(Fit, RejectsNonPositiveObservations) {
  const TimeGrid grid(0.0, 0.25, 4);
  const Path obs(grid, {1.0, 0.5, -0.1, 1.0, 2.0});
  TrainConfig cfg;
  cfg.m = 4;
  cfg.max_iters = 1;
  cfg.patience = 1;
  EXPECT_THROW(fit(tame_model(grid, 1), obs, cfg), DataError);
}

}  // namespace
}  // namespace nansde
