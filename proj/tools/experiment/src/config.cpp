#include "nansde/experiment/config.hpp"

#include <functional>
#include <json.hpp>

#include "nansde/csv.hpp"
#include "nansde/error.hpp"

namespace nansde::experiment {
namespace {

using nlohmann::json;

enum class Kind { Text, Integer, Unsigned, Real, Boolean, List, Seed };

struct KeySpec {
  ConfigKey info;
  Kind kind;
  std::function<json(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const json&)> set;
};

template <class T>
T as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "': value " + v.dump() + " has the wrong type");
  }
}

std::size_t as_size(const json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got " +
                      v.dump());
  }
  return v.get<std::size_t>();
}

double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "': expected a number, got " + v.dump());
  return v.get<double>();
}

std::optional<std::uint64_t> as_seed(const json& v, const std::string& key) {
  if (v.is_null()) return std::nullopt;
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError("config key '" + key + "': seeds are non-negative integers, got " +
                      v.dump());
  }
  return v.get<std::uint64_t>();
}

json seed_json(const std::optional<std::uint64_t>& s) { return s ? json(*s) : json(nullptr); }

#define NANSDE_SIZE_KEY(NAME, FIELD, HELP)                                           \
  KeySpec {                                                                          \
    {NAME, HELP}, Kind::Unsigned, [](const ExperimentConfig& c) { return json(c.FIELD); }, \
        [](ExperimentConfig& c, const json& v) { c.FIELD = as_size(v, NAME); }     \
  }
#define NANSDE_REAL_KEY(NAME, FIELD, HELP)                                           \
  KeySpec {                                                                          \
    {NAME, HELP}, Kind::Real, [](const ExperimentConfig& c) { return json(c.FIELD); }, \
        [](ExperimentConfig& c, const json& v) { c.FIELD = as_real(v, NAME); }     \
  }
#define NANSDE_SEED_KEY(NAME, FIELD, HELP)                                               \
  KeySpec {                                                                              \
    {NAME, HELP}, Kind::Seed, [](const ExperimentConfig& c) { return seed_json(c.FIELD); }, \
        [](ExperimentConfig& c, const json& v) { c.FIELD = as_seed(v, NAME); }         \
  }
#define NANSDE_STREAM_KEY(NAME, FIELD, HELP)                                             \
  KeySpec {                                                                              \
    {NAME, HELP}, Kind::Unsigned, [](const ExperimentConfig& c) { return json(c.FIELD); }, \
        [](ExperimentConfig& c, const json& v) { c.FIELD = as<std::uint64_t>(v, NAME); } \
  }
#define NANSDE_TEXT_KEY(NAME, FIELD, HELP, MANIFEST)                                      \
  KeySpec {                                                                               \
    {NAME, HELP, MANIFEST}, Kind::Text,                                                   \
        [](const ExperimentConfig& c) { return json(c.FIELD); },                          \
        [](ExperimentConfig& c, const json& v) { c.FIELD = as<std::string>(v, NAME); }    \
  }

const std::vector<KeySpec>& specs() {
  static const std::vector<KeySpec> table = {
      NANSDE_TEXT_KEY("data.file", data_file, "observed series CSV", true),
      KeySpec{{"data.column", "value column (-1: the only column, else column 1)"},
              Kind::Integer,
              [](const ExperimentConfig& c) { return json(c.data_column); },
              [](ExperimentConfig& c, const json& v) {
                if (!v.is_number_integer()) {
                  throw ConfigError("config key 'data.column': expected an integer, got " +
                                    v.dump());
                }
                c.data_column = v.get<int>();
              }},
      NANSDE_SIZE_KEY("data.min_points", data_min_points, "minimum series length"),
      KeySpec{{"model.widths", "layer widths of every network, input first"},
              Kind::List,
              [](const ExperimentConfig& c) { return json(c.widths); },
              [](ExperimentConfig& c, const json& v) {
                if (!v.is_array()) {
                  throw ConfigError("config key 'model.widths': expected a list, got " + v.dump());
                }
                std::vector<std::size_t> w;
                for (const json& e : v) w.push_back(as_size(e, "model.widths"));
                c.widths = std::move(w);
              }},
      KeySpec{{"model.ell2_clamped", "force l2 = 0 (SDE baseline)"},
              Kind::Boolean,
              [](const ExperimentConfig& c) { return json(c.ell2_clamped); },
              [](ExperimentConfig& c, const json& v) {
                c.ell2_clamped = as<bool>(v, "model.ell2_clamped");
              }},
      NANSDE_SEED_KEY("model.init_seed", init_seed, "network initialisation seed"),
      NANSDE_SIZE_KEY("train.m", train_m, "generated paths per iteration"),
      NANSDE_REAL_KEY("train.lr", lr, "Adam learning rate"),
      NANSDE_REAL_KEY("train.beta1", beta1, "Adam first-moment decay"),
      NANSDE_REAL_KEY("train.beta2", beta2, "Adam second-moment decay"),
      NANSDE_REAL_KEY("train.epsilon", epsilon, "Adam epsilon"),
      NANSDE_SIZE_KEY("train.max_iters", max_iters, "iteration budget"),
      NANSDE_SIZE_KEY("train.patience", patience, "early-stop patience"),
      NANSDE_REAL_KEY("train.kde_floor", kde_floor, "density floor inside the log"),
      NANSDE_REAL_KEY("train.max_dropped_fraction", max_dropped_fraction,
                      "dropped-path share above which an iteration cannot improve"),
      NANSDE_SEED_KEY("train.seed", train_seed, "Brownian noise seed for training"),
      NANSDE_STREAM_KEY("train.stream", train_stream, "first stream id for training paths"),
      NANSDE_SIZE_KEY("eval.m", eval_m, "evaluation ensemble size"),
      NANSDE_SIZE_KEY("eval.lags", eval_lags, "ACF lag count S (0: min(100, T/4))"),
      NANSDE_SIZE_KEY("eval.bins", eval_bins, "TV bin count K"),
      NANSDE_REAL_KEY("eval.r2_split", r2_split, "train share of the R^2 split"),
      NANSDE_SIZE_KEY("eval.r2_m_pred", r2_m_pred, "samples per one-step prediction"),
      NANSDE_TEXT_KEY("eval.hurst_input", hurst_input, "levels or log_returns", true),
      NANSDE_SEED_KEY("eval.seed", eval_seed, "evaluation seed"),
      NANSDE_STREAM_KEY("eval.stream", eval_stream, "first stream id for evaluation paths"),
      NANSDE_TEXT_KEY("checkpoint", checkpoint, "checkpoint directory (evaluate)", true),
      NANSDE_TEXT_KEY("output.dir", output_dir, "output directory", false),
      KeySpec{{"threads", "worker threads (outputs do not depend on it)", false},
              Kind::Unsigned,
              [](const ExperimentConfig& c) { return json(c.threads); },
              [](ExperimentConfig& c, const json& v) {
                c.threads = static_cast<unsigned>(as_size(v, "threads"));
              }},
  };
  return table;
}

#undef NANSDE_SIZE_KEY
#undef NANSDE_REAL_KEY
#undef NANSDE_SEED_KEY
#undef NANSDE_STREAM_KEY
#undef NANSDE_TEXT_KEY

const KeySpec& find_spec(std::string_view key) {
  for (const KeySpec& s : specs()) {
    if (s.info.name == key) return s;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void apply_object(ExperimentConfig& cfg, const json& obj) {
  if (!obj.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : obj.items()) find_spec(key).set(cfg, value);
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const KeySpec& s : specs()) out.push_back(s.info);
    return out;
  }();
  return keys;
}

void set_key(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  const KeySpec& spec = find_spec(key);
  json v;
  if (spec.kind == Kind::Text) {
    v = std::string(value);
  } else {
    std::string text(value);
    if (spec.kind == Kind::List && (text.empty() || text.front() != '[')) text = "[" + text + "]";
    try {
      v = json::parse(text);
    } catch (const json::exception&) {
      throw ConfigError("config key '" + std::string(key) + "': cannot parse '" +
                        std::string(value) + "'");
    }
  }
  spec.set(cfg, v);
}

ExperimentConfig config_from_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  if (doc.is_object() && doc.contains("config") && doc.contains("format")) {
    apply_object(cfg, doc.at("config"));
  } else {
    apply_object(cfg, doc);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  try {
    return config_from_text(read_file(file));
  } catch (const ConfigError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

std::string config_to_text(const ExperimentConfig& cfg) {
  json obj = json::object();
  for (const KeySpec& s : specs()) {
    if (s.info.in_manifest) obj[s.info.name] = s.get(cfg);
  }
  return obj.dump(2);
}

void validate(const ExperimentConfig& cfg, Command command) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(!cfg.data_file.empty(), "data.file is required");
  require(!cfg.output_dir.empty(), "output.dir is required");
  require(cfg.threads >= 1, "threads must be at least 1");
  require(cfg.hurst_input == "levels" || cfg.hurst_input == "log_returns",
          "eval.hurst_input must be 'levels' or 'log_returns'");
  if (command == Command::Train || command == Command::Compare) {
    require(cfg.init_seed.has_value(), "model.init_seed must be set explicitly");
    require(cfg.train_seed.has_value(), "train.seed must be set explicitly");
    architecture(cfg);
    train_config(cfg).validate();
  }
  if (command == Command::Evaluate || command == Command::Compare) {
    require(cfg.eval_seed.has_value(), "eval.seed must be set explicitly");
    require(cfg.eval_m >= 1, "eval.m must be at least 1");
    require(cfg.eval_bins >= 2, "eval.bins must be at least 2");
    require(cfg.r2_split > 0.0 && cfg.r2_split < 1.0, "eval.r2_split must lie in (0, 1)");
    require(cfg.r2_m_pred >= 1, "eval.r2_m_pred must be at least 1");
  }
  if (command == Command::Evaluate) require(!cfg.checkpoint.empty(), "checkpoint is required");
}

ModelArchitecture architecture(const ExperimentConfig& cfg) {
  if (cfg.widths.size() < 2 || cfg.widths.front() != 1 || cfg.widths.back() != 1) {
    throw ConfigError("model.widths must start and end with 1");
  }
  for (std::size_t w : cfg.widths) {
    if (w == 0) throw ConfigError("model.widths entries must be positive");
  }
  return ModelArchitecture{cfg.widths, cfg.ell2_clamped};
}

TrainConfig train_config(const ExperimentConfig& cfg) {
  TrainConfig t;
  t.m = cfg.train_m;
  t.adam = AdamConfig{cfg.lr, cfg.beta1, cfg.beta2, cfg.epsilon};
  t.max_iters = cfg.max_iters;
  t.patience = cfg.patience;
  t.kde_floor = cfg.kde_floor;
  t.max_dropped_fraction = cfg.max_dropped_fraction;
  t.seed = NoiseSeed{cfg.train_seed.value_or(0), cfg.train_stream};
  t.threads = cfg.threads;
  return t;
}

MetricSettings metric_settings(const ExperimentConfig& cfg) {
  MetricSettings s;
  s.m_eval = cfg.eval_m;
  s.n_lags = cfg.eval_lags;
  s.n_bins = cfg.eval_bins;
  s.r2_split = cfg.r2_split;
  s.r2_m_pred = cfg.r2_m_pred;
  s.hurst_input = cfg.hurst_input == "log_returns" ? HurstInput::LogReturns : HurstInput::Levels;
  s.seed = NoiseSeed{cfg.eval_seed.value_or(0), cfg.eval_stream};
  s.threads = cfg.threads;
  return s;
}

}  // namespace nansde::experiment
