#include "nansde/experiment/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>

#include "nansde/csv.hpp"
#include "nansde/error.hpp"

namespace nansde::experiment {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view field, double& out) {
  if (field.empty()) return false;
  const std::string buf(field);
  char* end = nullptr;
  errno = 0;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size() && errno != ERANGE && std::isfinite(out);
}

}  // namespace

std::vector<double> Dataset::invert() const {
  std::vector<double> out(path.values().begin(), path.values().end());
  for (double& v : out) v -= prep.shift;
  return out;
}

Dataset parse_dataset(std::string_view text, std::string name, int column,
                      std::size_t min_points) {
  std::vector<double> values;
  Preprocessing prep;
  std::size_t n_fields = 0;
  std::size_t line_no = 0;
  bool seen_row = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line =
        trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty()) continue;

    const std::vector<std::string_view> fields = split_fields(line);
    if (!seen_row) {
      seen_row = true;
      n_fields = fields.size();
      if (column < 0) {
        prep.column = n_fields == 1 ? 0 : 1;
      } else {
        prep.column = static_cast<std::size_t>(column);
      }
      if (prep.column >= n_fields) {
        throw DataError("dataset '" + name + "': column " + std::to_string(prep.column) +
                            " does not exist (line " + std::to_string(line_no) + ")",
                        line_no);
      }
      double probe = 0.0;
      if (!parse_number(fields[prep.column], probe)) {
        prep.had_header = true;
        continue;
      }
    }
    if (fields.size() != n_fields) {
      throw DataError("dataset '" + name + "': line " + std::to_string(line_no) + " has " +
                          std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(n_fields),
                      line_no);
    }
    double v = 0.0;
    if (!parse_number(fields[prep.column], v)) {
      throw DataError("dataset '" + name + "': cannot parse '" + std::string(fields[prep.column]) +
                          "' on line " + std::to_string(line_no),
                      line_no);
    }
    values.push_back(v);
  }
  if (values.size() < std::max<std::size_t>(min_points, 2)) {
    throw DataError("dataset '" + name + "' has " + std::to_string(values.size()) +
                        " points, at least " + std::to_string(std::max<std::size_t>(min_points, 2)) +
                        " required",
                    values.size());
  }

  const double lo = *std::min_element(values.begin(), values.end());
  prep.shift = lo <= 0.0 ? 1.0 - lo : 0.0;
  std::vector<double> shifted = values;
  if (prep.shift != 0.0) {
    for (double& v : shifted) v += prep.shift;
  }
  const std::size_t n_steps = values.size() - 1;
  const TimeGrid grid = TimeGrid::over(0.0, 1.0, n_steps);
  prep.dt = grid.dt();
  return Dataset{std::move(name), std::move(values), prep, Path(grid, std::move(shifted))};
}

Dataset ingest_csv(const std::filesystem::path& file, int column, std::size_t min_points) {
  return parse_dataset(read_file(file), file.stem().string(), column, min_points);
}

}  // namespace nansde::experiment
