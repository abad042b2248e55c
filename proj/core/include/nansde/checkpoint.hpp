#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "nansde/integrator.hpp"
#include "nansde/mlp.hpp"

namespace nansde {

/// Format tag written into every parameter file.
inline constexpr std::string_view kMlpFormatTag = "nansde-mlp/1";

/// JSON text: {"format", "widths", "layers": [{"weights": [...], "bias": [...]}]}
/// with weights row-major. Doubles are written in shortest round-trip form.
std::string mlp_to_text(const MlpParams& params);

/// Throws FileError on malformed text or an unknown format tag.
MlpParams mlp_from_text(std::string_view text);

void save_mlp(const MlpParams& params, const std::filesystem::path& file);
MlpParams load_mlp(const std::filesystem::path& file);

inline constexpr std::string_view kCheckpointFormatTag = "nansde-checkpoint/1";
inline constexpr std::string_view kCheckpointManifestName = "checkpoint.json";

/// Writes drift.json, diffusion.json, ell1.json, ell2.json and a manifest
/// (grid, x0, clamp flag, file names) into `dir`, creating it if needed.
void save_model(const NansdeModel& model, const std::filesystem::path& dir);

/// Throws FileError for a missing or inconsistent checkpoint.
NansdeModel load_model(const std::filesystem::path& dir);

}  // namespace nansde
