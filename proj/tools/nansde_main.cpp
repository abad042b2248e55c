#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "nansde/error.hpp"
#include "nansde/experiment/commands.hpp"
#include "nansde/experiment/config.hpp"

namespace {

using namespace nansde::experiment;

// Registers one --<key> flag per schema key; values are applied on top of
// the --config file in schema order.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_file, "JSON config or a manifest from an earlier run");
    for (const ConfigKey& key : config_schema()) {
      cmd.add_option("--" + key.name, values[key.name], key.help);
    }
  }

  ExperimentConfig resolve(const CLI::App& cmd) const {
    ExperimentConfig cfg = config_file.empty() ? ExperimentConfig{} : load_config(config_file);
    for (const ConfigKey& key : config_schema()) {
      if (cmd.count("--" + key.name) > 0) set_key(cfg, key.name, values.at(key.name));
    }
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural ARMA-noise SDE generator: fBm data, training, evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress output");

  FbmOptions fbm;
  std::uint64_t fbm_seed = 0;
  CLI::App* gen = app.add_subcommand("generate-fbm", "write exact fBm sample paths as CSV");
  gen->add_option("--hurst", fbm.hurst, "Hurst index in (0, 1)")->capture_default_str();
  gen->add_option("--n-steps", fbm.n_steps, "steps on [0, t-end]")->capture_default_str();
  gen->add_option("--n-paths", fbm.n_paths, "number of paths")->capture_default_str();
  gen->add_option("--t-end", fbm.t_end, "end time")->capture_default_str();
  gen->add_option("--seed", fbm_seed, "noise seed")->required();
  gen->add_option("--out", fbm.out, "output CSV")->required();
  gen->add_option("--threads", fbm.threads, "worker threads")->capture_default_str();

  ConfigFlags train_flags, eval_flags, compare_flags;
  CLI::App* train = app.add_subcommand("train", "fit a model to one observed series");
  train_flags.attach(*train);
  CLI::App* evaluate = app.add_subcommand("evaluate", "score a checkpoint against a series");
  eval_flags.attach(*evaluate);
  CLI::App* compare = app.add_subcommand("compare", "train and score the SDE and NANSDE models");
  compare_flags.attach(*compare);

  CLI11_PARSE(app, argc, argv);

  std::ostream* log = quiet ? nullptr : &std::cerr;
  try {
    if (gen->parsed()) {
      fbm.seed = fbm_seed;
      cmd_generate_fbm(fbm, log);
    } else if (train->parsed()) {
      cmd_train(train_flags.resolve(*train), log);
    } else if (evaluate->parsed()) {
      cmd_evaluate(eval_flags.resolve(*evaluate), log);
    } else if (compare->parsed()) {
      const auto rows = cmd_compare(compare_flags.resolve(*compare), log);
      std::cout << report_csv(rows);
    }
  } catch (const nansde::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const nansde::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
