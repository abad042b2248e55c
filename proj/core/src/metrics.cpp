#include "nansde/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "nansde/error.hpp"
#include "nansde/noise.hpp"
#include "nansde/parallel.hpp"

namespace nansde {
namespace {

double mean_of(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw MetricError("autocorrelation undefined: zero-variance absolute returns");
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double estimate_hurst_increments(std::span<const double> increments) {
  const std::size_t n = increments.size();
  if (n < kMinHurstIncrements) {
    throw MetricError("estimate_hurst: need at least " + std::to_string(kMinHurstIncrements) +
                      " increments, got " + std::to_string(n));
  }
  std::vector<double> log_m;
  std::vector<double> log_v;
  for (std::size_t m = 1; m <= n / 8; m *= 2) {
    const std::size_t blocks = n / m;
    double acc = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
      double sum = 0.0;
      for (std::size_t i = b * m; i < (b + 1) * m; ++i) sum += increments[i];
      acc += sum * sum;
    }
    const double v = acc / static_cast<double>(blocks);
    if (!(v > 0.0)) throw MetricError("estimate_hurst: degenerate (all-zero) increments");
    log_m.push_back(std::log(static_cast<double>(m)));
    log_v.push_back(std::log(v));
  }
  const double mx = mean_of(log_m);
  const double my = mean_of(log_v);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < log_m.size(); ++i) {
    sxy += (log_m[i] - mx) * (log_v[i] - my);
    sxx += (log_m[i] - mx) * (log_m[i] - mx);
  }
  return 0.5 * sxy / sxx;
}

double estimate_hurst(const Path& path, HurstInput input) {
  if (input == HurstInput::LogReturns) return estimate_hurst_increments(log_returns(path).r);
  return estimate_hurst_increments(path.increments());
}

BinSpec::BinSpec(double lo_, double hi_, std::size_t k_) : lo(lo_), hi(hi_), k(k_) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw ConfigError("BinSpec: need finite lo < hi");
  }
  if (k < 2) throw ConfigError("BinSpec: need at least two bins");
}

std::size_t BinSpec::slot_of(double value) const noexcept {
  if (value < lo) return 0;
  if (!(value < hi)) return k + 1;  // also catches NaN
  const auto idx = static_cast<std::size_t>((value - lo) / (hi - lo) * static_cast<double>(k));
  return 1 + std::min(idx, k - 1);
}

BinSpec bins_for(const LogReturnSeries& observed, std::size_t k, double width_sd) {
  if (observed.size() < 2) throw MetricError("bins_for: need at least two observed returns");
  const double mu = mean_of(observed.r);
  const double sd = sample_sd(observed.r);
  if (!(sd > 0.0)) throw MetricError("bins_for: observed returns are constant");
  return BinSpec(mu - width_sd * sd, mu + width_sd * sd, k);
}

std::vector<double> histogram(std::span<const double> values, const BinSpec& bins) {
  if (values.empty()) throw MetricError("histogram: no values");
  std::vector<double> counts(bins.slots(), 0.0);
  for (double v : values) counts[bins.slot_of(v)] += 1.0;
  for (double& c : counts) c /= static_cast<double>(values.size());
  return counts;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ShapeError("total_variation: histogram sizes differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

double tv_distance(const LogReturnSeries& observed, std::span<const LogReturnSeries> generated,
                   const BinSpec& bins) {
  if (observed.size() == 0 || generated.empty()) throw MetricError("tv_distance: empty input");
  std::vector<double> pooled;
  for (const LogReturnSeries& g : generated) pooled.insert(pooled.end(), g.r.begin(), g.r.end());
  return total_variation(histogram(observed.r, bins), histogram(pooled, bins));
}

std::vector<double> abs_return_acf(std::span<const double> r, std::size_t s) {
  const std::size_t T = r.size();
  if (s == 0 || s >= T) {
    throw MetricError("abs_return_acf: need 1 <= lags < series length");
  }
  std::vector<double> a(T);
  for (std::size_t t = 0; t < T; ++t) a[t] = std::abs(r[t]);
  const std::span<const double> av(a);
  std::vector<double> gamma(s);
  for (std::size_t tau = 1; tau <= s; ++tau) {
    gamma[tau - 1] = pearson(av.first(T - tau), av.subspan(tau));
  }
  return gamma;
}

std::vector<double> acf_weights(std::size_t s) {
  std::vector<double> w(s);
  for (std::size_t tau = 1; tau <= s; ++tau) {
    w[tau - 1] = 2.0 * static_cast<double>(tau) / static_cast<double>(s + 1);
  }
  return w;
}

std::size_t default_lag_count(std::size_t T) noexcept {
  return std::max<std::size_t>(1, std::min<std::size_t>(100, T / 4));
}

AcfScores acf_scores(const LogReturnSeries& observed, std::span<const LogReturnSeries> generated,
                     std::size_t s) {
  if (generated.empty()) throw MetricError("acf_scores: no generated series");
  const std::vector<double> c_obs = abs_return_acf(observed.r, s);
  std::vector<double> c_gen(s, 0.0);
  for (const LogReturnSeries& g : generated) {
    const std::vector<double> c = abs_return_acf(g.r, s);
    for (std::size_t i = 0; i < s; ++i) c_gen[i] += c[i];
  }
  for (double& c : c_gen) c /= static_cast<double>(generated.size());
  const std::vector<double> w = acf_weights(s);
  double plain = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    const double d = c_obs[i] - c_gen[i];
    const double dw = c_obs[i] * w[i] - c_gen[i] * w[i];
    plain += d * d;
    weighted += dw * dw;
  }
  return {std::sqrt(plain), std::sqrt(weighted)};
}

double r2_from_predictions(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size() || actual.empty()) {
    throw MetricError("r2: actual and predicted must be non-empty and equally long");
  }
  const double mu = mean_of(actual);
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    sse += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    sst += (actual[i] - mu) * (actual[i] - mu);
  }
  if (!(sst > 0.0)) throw MetricError("r2: constant test returns, denominator is zero");
  return 1.0 - sse / sst;
}

double r2_score(const Path& observed, const NansdeModel& model_in, double split,
                std::size_t m_pred, NoiseSeed seed) {
  if (!(split > 0.0 && split < 1.0)) throw ConfigError("r2_score: split must lie in (0, 1)");
  if (m_pred == 0) throw ConfigError("r2_score: m_pred must be positive");
  NansdeModel model = model_in;
  model.grid = observed.grid();
  model.x0 = observed.front();
  model.validate();

  const LogReturnSeries obs = log_returns(observed);
  const std::size_t T = obs.size();
  const auto test_start = static_cast<std::size_t>(std::floor(split * static_cast<double>(T)));
  if (test_start >= T) throw MetricError("r2_score: empty test segment");

  const KernelTrack track = kernel_track(model);
  const double dt = model.grid.dt();
  std::vector<double> drift(T - test_start), sigma(T - test_start);
  for (std::size_t t = test_start; t < T; ++t) {
    drift[t - test_start] = model.drift_at(observed[t]);
    sigma[t - test_start] = model.diffusion_at(observed[t]);
  }

  std::vector<double> sum(T - test_start, 0.0);
  std::vector<std::size_t> count(T - test_start, 0);
  for (std::size_t j = 0; j < m_pred; ++j) {
    const std::vector<double> dw =
        brownian_increments(model.grid, NoiseSeed{seed.seed, seed.stream_id + j});
    double k = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      if (t >= test_start) {
        const std::size_t i = t - test_start;
        const double x = observed[t];
        const double next = x + (drift[i] - track.ell1[t] * sigma[i] * k) * dt + sigma[i] * dw[t];
        if (next > 0.0 && std::isfinite(next)) {
          sum[i] += std::log(next / x);
          ++count[i];
        }
      }
      k += track.ell2[t] * dw[t];
    }
  }
  std::vector<double> predicted(T - test_start);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (count[i] == 0) {
      throw MetricError("r2_score: no positive one-step prediction at t=" +
                        std::to_string(test_start + i));
    }
    predicted[i] = sum[i] / static_cast<double>(count[i]);
  }
  return r2_from_predictions(std::span<const double>(obs.r).subspan(test_start), predicted);
}

MetricReport evaluate_model(NansdeModel model, const Path& observed,
                            const MetricSettings& settings) {
  if (settings.m_eval == 0) throw ConfigError("evaluate_model: m_eval must be positive");
  model.grid = observed.grid();
  model.x0 = observed.front();
  model.validate();

  const LogReturnSeries obs = log_returns(observed);
  const KernelTrack track = kernel_track(model);
  const std::size_t m = settings.m_eval;
  std::vector<Trajectory> trajs(m);
  parallel_for(m, settings.threads, [&](std::size_t i) {
    const std::vector<double> dw = brownian_increments(
        model.grid, NoiseSeed{settings.seed.seed, settings.seed.stream_id + i});
    trajs[i] = integrate(model, track, dw);
  });

  MetricReport report;
  report.n_paths = m;
  std::vector<LogReturnSeries> generated;
  for (const Trajectory& traj : trajs) {
    if (traj.diverged_at) continue;
    const bool positive = strictly_positive(traj.x);
    if (settings.hurst_input == HurstInput::Levels) {
      report.hurst_samples.push_back(estimate_hurst(Path(model.grid, traj.x)));
    } else if (positive) {
      report.hurst_samples.push_back(estimate_hurst_increments(log_returns(traj.x).r));
    }
    if (positive) generated.push_back(log_returns(traj.x));
  }
  if (report.hurst_samples.empty() || generated.empty()) {
    throw MetricError("evaluate_model: every generated path diverged or left the positive axis");
  }
  report.n_used = generated.size();
  report.observed_hurst = estimate_hurst(observed, settings.hurst_input);
  report.hurst_mean = mean_of(report.hurst_samples);
  report.hurst_std = sample_sd(report.hurst_samples);
  report.hurst_median = quantile(report.hurst_samples, 0.5);

  const BinSpec bins = bins_for(obs, settings.n_bins);
  report.n_bins = settings.n_bins;
  report.tv = tv_distance(obs, generated, bins);

  report.n_lags = settings.n_lags == 0 ? default_lag_count(obs.size()) : settings.n_lags;
  const AcfScores acf = acf_scores(obs, generated, report.n_lags);
  report.acf_score = acf.acf;
  report.weighted_acf_score = acf.weighted_acf;

  const NoiseSeed r2_seed{derive_seed(settings.seed.seed, 0x52325f7072656473ull),
                          settings.seed.stream_id};
  report.r2 = r2_score(observed, model, settings.r2_split, settings.r2_m_pred, r2_seed);
  return report;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw MetricError("quantile: no values");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace nansde
