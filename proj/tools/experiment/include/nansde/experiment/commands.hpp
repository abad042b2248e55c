#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nansde/experiment/config.hpp"
#include "nansde/experiment/dataset.hpp"
#include "nansde/metrics.hpp"
#include "nansde/training.hpp"

namespace nansde::experiment {

inline constexpr std::string_view kManifestFormatTag = "nansde-manifest/1";

struct FbmOptions {
  double hurst = 0.2;
  std::size_t n_steps = 1000;
  std::size_t n_paths = 1;
  double t_end = 1.0;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
  unsigned threads = 1;
};

/// Writes `t,path_0,...` with path i drawn from stream i of the seed.
void cmd_generate_fbm(const FbmOptions& options, std::ostream* log = nullptr);

struct TrainRun {
  Dataset dataset;
  FitResult fit;
};

/// Writes checkpoint/, loss_history.csv and manifest.json under output.dir.
TrainRun cmd_train(const ExperimentConfig& cfg, std::ostream* log = nullptr);

struct EvaluateRun {
  std::string model_name;  // "nansde" or "sde"
  MetricReport report;
};

/// Writes report.csv, report_detail.json and manifest.json under output.dir.
EvaluateRun cmd_evaluate(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// Trains and evaluates the l2-clamped baseline ("sde") and the full model
/// ("nansde") with identical seeds and budgets. Each gets a subdirectory with
/// its training artifacts and report; comparison.csv holds both rows.
std::vector<EvaluateRun> cmd_compare(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// Header `model,hurst_mean,hurst_std,tv,acf,weighted_acf,r2,observed_hurst,n_paths,n_used`.
std::string report_csv(std::span<const EvaluateRun> rows);
std::string report_detail_text(const EvaluateRun& run);
/// Header `iter,loss,best_loss`; failed iterations show `inf`.
std::string loss_history_csv(const FitResult& fit);

}  // namespace nansde::experiment
