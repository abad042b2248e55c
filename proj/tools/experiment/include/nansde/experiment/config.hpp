#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nansde/integrator.hpp"
#include "nansde/metrics.hpp"
#include "nansde/training.hpp"

namespace nansde::experiment {

enum class Command { Train, Evaluate, Compare };

/// Flat key schema; see config_schema() for the key names. Seeds have no
/// defaults and must be given explicitly.
struct ExperimentConfig {
  std::string data_file;
  int data_column = -1;
  std::size_t data_min_points = 65;

  std::vector<std::size_t> widths{1, 20, 1};
  bool ell2_clamped = false;
  std::optional<std::uint64_t> init_seed;

  std::size_t train_m = 128;
  double lr = 0.004;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t max_iters = 1000;
  std::size_t patience = 200;
  double kde_floor = 1e-12;
  double max_dropped_fraction = 0.2;
  std::optional<std::uint64_t> train_seed;
  std::uint64_t train_stream = 0;

  std::size_t eval_m = 128;
  std::size_t eval_lags = 0;
  std::size_t eval_bins = 50;
  double r2_split = 0.8;
  std::size_t r2_m_pred = 100;
  std::string hurst_input = "levels";
  std::optional<std::uint64_t> eval_seed;
  std::uint64_t eval_stream = 0;

  std::string checkpoint;

  // Not echoed into manifests: they do not change any output byte.
  std::string output_dir;
  unsigned threads = 1;
};

struct ConfigKey {
  std::string name;
  std::string help;
  bool in_manifest = true;
};

const std::vector<ConfigKey>& config_schema();

/// Sets one key from its command-line spelling. Lists may be written
/// "1,20,1" or "[1,20,1]". Throws ConfigError for an unknown key or a value
/// of the wrong type.
void set_key(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Parses a flat JSON object of schema keys, or a manifest written by a
/// previous run (its "config" member is used). Unknown keys are errors.
ExperimentConfig config_from_text(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& file);

/// Flat JSON object of every manifest key, sorted by name.
std::string config_to_text(const ExperimentConfig& cfg);

/// Throws ConfigError naming the first problem for the given command.
void validate(const ExperimentConfig& cfg, Command command);

ModelArchitecture architecture(const ExperimentConfig& cfg);
TrainConfig train_config(const ExperimentConfig& cfg);
MetricSettings metric_settings(const ExperimentConfig& cfg);

}  // namespace nansde::experiment
