#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nansde/grid.hpp"
#include "nansde/integrator.hpp"
#include "nansde/random.hpp"
#include "nansde/training.hpp"

namespace nansde {

/// Minimum number of increments accepted by the Hurst estimator.
inline constexpr std::size_t kMinHurstIncrements = 64;

enum class HurstInput { Levels, LogReturns };

/// Aggregated-variance estimate: for dyadic block sizes m <= n/8 the mean
/// square of non-overlapping block sums V(m) ~ m^{2H}; H is half the OLS
/// slope of log V on log m. Not clipped to (0, 1). Throws MetricError for
/// fewer than kMinHurstIncrements increments or an all-zero series.
double estimate_hurst_increments(std::span<const double> increments);

/// Levels: increments of the path. LogReturns: the path's log returns.
double estimate_hurst(const Path& path, HurstInput input = HurstInput::Levels);

/// K equal-width bins over [lo, hi) plus an underflow and an overflow slot.
struct BinSpec {
  /// Throws ConfigError unless lo < hi and k >= 2.
  BinSpec(double lo, double hi, std::size_t k);

  double lo;
  double hi;
  std::size_t k;

  std::size_t slots() const noexcept { return k + 2; }
  /// 0 = underflow, 1..k regular bins, k+1 = overflow.
  std::size_t slot_of(double value) const noexcept;
};

/// K bins spanning mean +- width_sd * sd of the observed returns.
BinSpec bins_for(const LogReturnSeries& observed, std::size_t k = 50, double width_sd = 5.0);

/// Empirical slot frequencies (sum to 1). Throws MetricError if empty.
std::vector<double> histogram(std::span<const double> values, const BinSpec& bins);

/// 1/2 sum |p_k - q_k|.
double total_variation(std::span<const double> p, std::span<const double> q);

/// Observed histogram against the histogram pooled over all generated returns.
double tv_distance(const LogReturnSeries& observed, std::span<const LogReturnSeries> generated,
                   const BinSpec& bins);

/// gamma(tau) = Corr(|r_t|, |r_{t+tau}|) for tau = 1..s, Pearson over the
/// T - tau overlapping pairs. Throws MetricError if s >= T or a lagged
/// window has zero variance.
std::vector<double> abs_return_acf(std::span<const double> r, std::size_t s);

/// w_tau = 2 tau / (s + 1); unit mean.
std::vector<double> acf_weights(std::size_t s);

/// min(100, T/4), at least 1.
std::size_t default_lag_count(std::size_t T) noexcept;

struct AcfScores {
  double acf = 0.0;
  double weighted_acf = 0.0;
};

/// || C(obs) - mean_i C(gen_i) ||_2 and the same with both sides weighted.
AcfScores acf_scores(const LogReturnSeries& observed, std::span<const LogReturnSeries> generated,
                     std::size_t s);

/// 1 - SSE / SST over the given test values. Throws MetricError when the
/// test values are constant.
double r2_from_predictions(std::span<const double> actual, std::span<const double> predicted);

/// One-step-ahead R^2 on the final (1 - split) share of the returns. Each
/// prediction averages m_pred Euler steps from the observed X_t, with the
/// latent K_t rebuilt along the grid from that sample's own noise stream.
double r2_score(const Path& observed, const NansdeModel& model, double split, std::size_t m_pred,
                NoiseSeed seed);

struct MetricSettings {
  std::size_t m_eval = 128;
  std::size_t n_lags = 0;  // 0: default_lag_count(T)
  std::size_t n_bins = 50;
  double r2_split = 0.8;
  std::size_t r2_m_pred = 100;
  HurstInput hurst_input = HurstInput::Levels;
  NoiseSeed seed{};
  unsigned threads = 1;
};

struct MetricReport {
  double observed_hurst = 0.0;
  double hurst_mean = 0.0;
  double hurst_std = 0.0;
  double hurst_median = 0.0;
  double tv = 0.0;
  double acf_score = 0.0;
  double weighted_acf_score = 0.0;
  double r2 = 0.0;
  std::size_t n_paths = 0;
  std::size_t n_used = 0;  // paths that stayed bounded and positive
  std::size_t n_lags = 0;
  std::size_t n_bins = 0;
  std::vector<double> hurst_samples;
};

/// Simulates m_eval paths on the observed grid starting at observed[0] and
/// computes every metric. Diverged paths are excluded everywhere; paths
/// that touch zero are excluded from the return-based metrics.
MetricReport evaluate_model(NansdeModel model, const Path& observed,
                            const MetricSettings& settings);

/// q-th quantile (0..1) with linear interpolation.
double quantile(std::vector<double> values, double q);

}  // namespace nansde
