#include "nansde/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "nansde/error.hpp"

namespace nansde {

std::string format_double(double value) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(n));
}

void write_file_atomic(const std::filesystem::path& file, std::string_view contents) {
  std::filesystem::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw FileError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, file, ec);
  if (ec) throw FileError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FileError("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string path_to_csv(const Path& path) {
  std::string out = "t,value\n";
  for (std::size_t k = 0; k < path.size(); ++k) {
    out += format_double(path.grid().time(k));
    out += ',';
    out += format_double(path[k]);
    out += '\n';
  }
  return out;
}

std::string paths_to_csv(std::span<const Path> paths) {
  if (paths.empty()) throw ConfigError("paths_to_csv: no paths");
  const TimeGrid& grid = paths.front().grid();
  for (const Path& p : paths) {
    if (!(p.grid() == grid)) throw ConfigError("paths_to_csv: paths on different grids");
  }
  std::string out = "t";
  for (std::size_t i = 0; i < paths.size(); ++i) out += ",path_" + std::to_string(i);
  out += '\n';
  for (std::size_t k = 0; k < grid.n_points(); ++k) {
    out += format_double(grid.time(k));
    for (const Path& p : paths) {
      out += ',';
      out += format_double(p[k]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace nansde
