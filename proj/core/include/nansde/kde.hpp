#pragma once

#include <span>

namespace nansde {

inline constexpr double kDefaultKdeFloor = 1e-12;
inline constexpr double kMinBandwidth = 1e-6;

/// Silverman's rule 1.06 * sd * M^{-1/5} (sd with M-1 denominator), floored
/// at kMinBandwidth. Throws ConfigError for fewer than two samples.
double silverman_bandwidth(std::span<const double> samples);

/// Gaussian KDE (1/(M h)) sum_i phi((query - s_i) / h).
double kde_density(std::span<const double> samples, double query, double bandwidth);

/// log max(floor, density) with the Silverman bandwidth.
double kde_log_density(std::span<const double> samples, double query, double floor);

/// Same with an explicit bandwidth.
double kde_log_density(std::span<const double> samples, double query, double bandwidth,
                       double floor);

}  // namespace nansde
