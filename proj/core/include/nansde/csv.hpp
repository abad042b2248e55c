#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nansde/grid.hpp"

namespace nansde {

/// printf("%.17g"): round-trips every finite double.
std::string format_double(double value);

/// Writes to a sibling temporary file, then renames it over `file`.
void write_file_atomic(const std::filesystem::path& file, std::string_view contents);

std::string read_file(const std::filesystem::path& file);

/// Two-column CSV with header `t,value`.
std::string path_to_csv(const Path& path);

/// CSV with header `t,path_0,...,path_{M-1}`; all paths must share a grid.
std::string paths_to_csv(std::span<const Path> paths);

}  // namespace nansde
