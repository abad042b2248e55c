#include "nansde/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nansde/error.hpp"

namespace nansde {
namespace {

constexpr double kInvSqrt2Pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

void require_samples(std::span<const double> samples) {
  if (samples.size() < 2) throw ConfigError("KDE: at least two samples required");
}

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
  require_samples(samples);
  const double m = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= m;
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / (m - 1.0));
  return std::max(kMinBandwidth, 1.06 * sd * std::pow(m, -0.2));
}

double kde_density(std::span<const double> samples, double query, double bandwidth) {
  require_samples(samples);
  if (!(bandwidth > 0.0)) throw ConfigError("KDE: bandwidth must be positive");
  double acc = 0.0;
  for (double s : samples) {
    const double z = (query - s) / bandwidth;
    acc += std::exp(-0.5 * z * z);
  }
  return kInvSqrt2Pi * acc / (static_cast<double>(samples.size()) * bandwidth);
}

double kde_log_density(std::span<const double> samples, double query, double floor) {
  return kde_log_density(samples, query, silverman_bandwidth(samples), floor);
}

double kde_log_density(std::span<const double> samples, double query, double bandwidth,
                       double floor) {
  if (!(floor > 0.0)) throw ConfigError("KDE: floor must be positive");
  return std::log(std::max(floor, kde_density(samples, query, bandwidth)));
}

}  // namespace nansde
