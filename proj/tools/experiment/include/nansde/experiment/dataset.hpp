#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nansde/grid.hpp"

namespace nansde::experiment {

/// 64 increments: the shortest series the Hurst estimator accepts.
inline constexpr std::size_t kMinDatasetPoints = 65;

/// How raw values became the model path. value' = value + shift, with
/// shift = 1 - min when min <= 0 and 0 otherwise; model time is k / T.
struct Preprocessing {
  double shift = 0.0;
  double dt = 1.0;
  std::size_t column = 0;
  bool had_header = false;
};

struct Dataset {
  std::string name;
  std::vector<double> raw;
  Preprocessing prep;
  Path path;

  /// Undoes the shift. Equals `raw` up to one rounding of the add/subtract.
  std::vector<double> invert() const;
};

/// Accepts one value per row or comma-separated rows (`t,value` or
/// `t,path_0,...`), with an optional non-numeric header and blank lines.
/// `column` selects the value column; a negative column means the only
/// column of a single-column file and column 1 otherwise. Throws DataError
/// naming the 1-based line for a malformed row, or the point count when
/// fewer than `min_points` values remain.
Dataset parse_dataset(std::string_view text, std::string name, int column = -1,
                      std::size_t min_points = kMinDatasetPoints);

/// parse_dataset on the file's contents, named after its stem.
Dataset ingest_csv(const std::filesystem::path& file, int column = -1,
                   std::size_t min_points = kMinDatasetPoints);

}  // namespace nansde::experiment
