#include "nansde/experiment/commands.hpp"

#include <json.hpp>

#include "nansde/checkpoint.hpp"
#include "nansde/csv.hpp"
#include "nansde/error.hpp"
#include "nansde/noise.hpp"
#include "nansde/parallel.hpp"

namespace nansde::experiment {
namespace {

using nlohmann::json;

namespace fs = std::filesystem;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FileError("cannot create directory " + dir.string() + ": " + ec.message());
}

json manifest_base(const char* command, const ExperimentConfig& cfg) {
  json m;
  m["format"] = kManifestFormatTag;
  m["command"] = command;
  m["config"] = json::parse(config_to_text(cfg));
  return m;
}

json dataset_json(const Dataset& d) {
  return {{"name", d.name},
          {"points", d.raw.size()},
          {"column", d.prep.column},
          {"had_header", d.prep.had_header},
          {"shift", d.prep.shift},
          {"dt", d.prep.dt}};
}

void write_json(const fs::path& file, const json& doc) {
  write_file_atomic(file, doc.dump(2) + "\n");
}

Dataset load_dataset(const ExperimentConfig& cfg) {
  return ingest_csv(cfg.data_file, cfg.data_column, cfg.data_min_points);
}

std::string model_name(const NansdeModel& model) { return model.ell2_clamped ? "sde" : "nansde"; }

TrainRun train_into(const ExperimentConfig& cfg, const Dataset& dataset, const fs::path& dir,
                    std::ostream* log) {
  ensure_dir(dir);
  const TrainConfig tc = train_config(cfg);
  const std::string tag = cfg.ell2_clamped ? "sde" : "nansde";
  StepObserver observer;
  if (log) {
    observer = [log, &tag](const TrainState& s) {
      if (s.iteration % 50 == 0 || s.iteration == 1) {
        *log << "[" << tag << "] iter " << s.iteration << " loss " << s.loss_history.back()
             << " best " << s.best_loss << "\n";
      }
    };
  }
  FitResult fit_result = fit(dataset.path, tc, architecture(cfg), *cfg.init_seed, observer);

  save_model(fit_result.model, dir / "checkpoint");
  write_file_atomic(dir / "loss_history.csv", loss_history_csv(fit_result));
  json m = manifest_base("train", cfg);
  m["dataset"] = dataset_json(dataset);
  m["result"] = {{"best_loss", fit_result.best_loss},
                 {"best_iteration", fit_result.best_iteration},
                 {"iterations", fit_result.loss_history.size()},
                 {"warnings", fit_result.warnings}};
  write_json(dir / "manifest.json", m);
  if (log) {
    *log << "[" << tag << "] finished after " << fit_result.loss_history.size()
         << " iterations, best loss " << fit_result.best_loss << " at iteration "
         << fit_result.best_iteration << "\n";
  }
  return TrainRun{dataset, std::move(fit_result)};
}

json detail_json(const EvaluateRun& run) {
  const MetricReport& r = run.report;
  json hurst = {{"mean", r.hurst_mean}, {"std", r.hurst_std}, {"median", r.hurst_median},
                {"samples", r.hurst_samples}};
  if (!r.hurst_samples.empty()) {
    for (auto [name, q] : {std::pair{"p05", 0.05}, std::pair{"p25", 0.25},
                           std::pair{"p75", 0.75}, std::pair{"p95", 0.95}}) {
      hurst[name] = quantile(r.hurst_samples, q);
    }
  }
  return {{"model", run.model_name}, {"observed_hurst", r.observed_hurst},
          {"hurst", std::move(hurst)},  {"tv", r.tv},
          {"acf", r.acf_score},         {"weighted_acf", r.weighted_acf_score},
          {"r2", r.r2},                 {"n_paths", r.n_paths},
          {"n_used", r.n_used},         {"n_lags", r.n_lags},
          {"n_bins", r.n_bins}};
}

}  // namespace

std::string report_csv(std::span<const EvaluateRun> rows) {
  std::string out = "model,hurst_mean,hurst_std,tv,acf,weighted_acf,r2,observed_hurst,n_paths,n_used\n";
  for (const EvaluateRun& row : rows) {
    const MetricReport& r = row.report;
    out += row.model_name;
    for (double v : {r.hurst_mean, r.hurst_std, r.tv, r.acf_score, r.weighted_acf_score, r.r2,
                     r.observed_hurst}) {
      out += "," + format_double(v);
    }
    out += "," + std::to_string(r.n_paths) + "," + std::to_string(r.n_used) + "\n";
  }
  return out;
}

std::string report_detail_text(const EvaluateRun& run) { return detail_json(run).dump(2) + "\n"; }

std::string loss_history_csv(const FitResult& fit_result) {
  std::string out = "iter,loss,best_loss\n";
  for (std::size_t i = 0; i < fit_result.loss_history.size(); ++i) {
    out += std::to_string(i) + "," + format_double(fit_result.loss_history[i]) + "," +
           format_double(fit_result.best_history[i]) + "\n";
  }
  return out;
}

void cmd_generate_fbm(const FbmOptions& options, std::ostream* log) {
  if (!options.seed) throw ConfigError("generate-fbm: --seed must be given explicitly");
  if (options.n_paths == 0) throw ConfigError("generate-fbm: --n-paths must be at least 1");
  if (options.out.empty()) throw ConfigError("generate-fbm: --out is required");
  if (!(options.t_end > 0.0)) throw ConfigError("generate-fbm: --t-end must be positive");
  const FbmConfig cfg(options.hurst, TimeGrid::over(0.0, options.t_end, options.n_steps));
  std::vector<std::optional<Path>> slots(options.n_paths);
  parallel_for(options.n_paths, options.threads, [&](std::size_t i) {
    slots[i].emplace(fbm_path(cfg, NoiseSeed{*options.seed, i}));
  });
  std::vector<Path> paths;
  for (auto& p : slots) paths.push_back(std::move(*p));
  if (options.out.has_parent_path()) ensure_dir(options.out.parent_path());
  write_file_atomic(options.out, paths_to_csv(paths));
  if (log) {
    *log << "wrote " << options.n_paths << " fBm path(s), H = " << options.hurst
         << ", " << options.n_steps << " steps, to " << options.out.string() << "\n";
  }
}

TrainRun cmd_train(const ExperimentConfig& cfg, std::ostream* log) {
  validate(cfg, Command::Train);
  const Dataset dataset = load_dataset(cfg);
  return train_into(cfg, dataset, cfg.output_dir, log);
}

EvaluateRun cmd_evaluate(const ExperimentConfig& cfg, std::ostream* log) {
  validate(cfg, Command::Evaluate);
  const NansdeModel model = load_model(cfg.checkpoint);
  const Dataset dataset = load_dataset(cfg);
  const fs::path dir = cfg.output_dir;
  ensure_dir(dir);
  EvaluateRun run{model_name(model), evaluate_model(model, dataset.path, metric_settings(cfg))};
  write_file_atomic(dir / "report.csv", report_csv(std::span<const EvaluateRun>(&run, 1)));
  write_file_atomic(dir / "report_detail.json", report_detail_text(run));
  json m = manifest_base("evaluate", cfg);
  m["dataset"] = dataset_json(dataset);
  write_json(dir / "manifest.json", m);
  if (log) {
    *log << "[" << run.model_name << "] hurst " << run.report.hurst_mean << " +- "
         << run.report.hurst_std << ", tv " << run.report.tv << ", r2 " << run.report.r2 << "\n";
  }
  return run;
}

std::vector<EvaluateRun> cmd_compare(const ExperimentConfig& cfg, std::ostream* log) {
  validate(cfg, Command::Compare);
  const Dataset dataset = load_dataset(cfg);
  const fs::path dir = cfg.output_dir;
  ensure_dir(dir);
  std::vector<EvaluateRun> rows;
  for (bool clamped : {true, false}) {
    ExperimentConfig sub = cfg;
    sub.ell2_clamped = clamped;
    const fs::path sub_dir = dir / (clamped ? "sde" : "nansde");
    TrainRun trained = train_into(sub, dataset, sub_dir, log);
    EvaluateRun run{model_name(trained.fit.model),
                    evaluate_model(trained.fit.model, dataset.path, metric_settings(sub))};
    write_file_atomic(sub_dir / "report_detail.json", report_detail_text(run));
    rows.push_back(std::move(run));
  }
  write_file_atomic(dir / "comparison.csv", report_csv(rows));
  json m = manifest_base("compare", cfg);
  m["dataset"] = dataset_json(dataset);
  m["models"] = {"sde", "nansde"};
  write_json(dir / "manifest.json", m);
  return rows;
}

}  // namespace nansde::experiment
