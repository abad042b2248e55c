#include "nansde/checkpoint.hpp"

#include <json.hpp>

#include "nansde/csv.hpp"
#include "nansde/error.hpp"

namespace nansde {

using nlohmann::json;

std::string mlp_to_text(const MlpParams& params) {
  json doc;
  doc["format"] = kMlpFormatTag;
  doc["widths"] = params.widths();
  json layers = json::array();
  for (const DenseLayer& layer : params.layers()) {
    layers.push_back({{"weights", layer.weights}, {"bias", layer.bias}});
  }
  doc["layers"] = std::move(layers);
  return doc.dump(2) + "\n";
}

MlpParams mlp_from_text(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kMlpFormatTag) {
      throw FileError("unsupported parameter format '" + doc.at("format").get<std::string>() +
                      "'");
    }
    const auto widths = doc.at("widths").get<std::vector<std::size_t>>();
    const json& layers = doc.at("layers");
    if (widths.size() < 2 || layers.size() + 1 != widths.size()) {
      throw FileError("parameter file: widths and layer count disagree");
    }
    std::vector<DenseLayer> out;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      DenseLayer layer;
      layer.inputs = widths[l];
      layer.outputs = widths[l + 1];
      layer.weights = layers[l].at("weights").get<std::vector<double>>();
      layer.bias = layers[l].at("bias").get<std::vector<double>>();
      out.push_back(std::move(layer));
    }
    return MlpParams(std::move(out));
  } catch (const json::exception& e) {
    throw FileError(std::string("malformed parameter file: ") + e.what());
  } catch (const ShapeError& e) {
    throw FileError(std::string("inconsistent parameter file: ") + e.what());
  }
}

void save_mlp(const MlpParams& params, const std::filesystem::path& file) {
  write_file_atomic(file, mlp_to_text(params));
}

MlpParams load_mlp(const std::filesystem::path& file) { return mlp_from_text(read_file(file)); }

namespace {

constexpr const char* kNetworkNames[] = {"drift", "diffusion", "ell1", "ell2"};

}  // namespace

void save_model(const NansdeModel& model, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw FileError("cannot create checkpoint directory " + dir.string() + ": " + ec.message());
  }
  const MlpParams* nets[] = {&model.drift, &model.diffusion, &model.ell1, &model.ell2};
  json files;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::string file = std::string(kNetworkNames[i]) + ".json";
    save_mlp(*nets[i], dir / file);
    files[kNetworkNames[i]] = file;
  }
  json doc;
  doc["format"] = kCheckpointFormatTag;
  doc["grid"] = {{"t0", model.grid.t0()}, {"dt", model.grid.dt()},
                 {"n_steps", model.grid.n_steps()}};
  doc["x0"] = model.x0;
  doc["ell2_clamped"] = model.ell2_clamped;
  doc["networks"] = std::move(files);
  write_file_atomic(dir / kCheckpointManifestName, doc.dump(2) + "\n");
}

NansdeModel load_model(const std::filesystem::path& dir) {
  json doc;
  try {
    doc = json::parse(read_file(dir / kCheckpointManifestName));
  } catch (const json::exception& e) {
    throw FileError("malformed checkpoint manifest in " + dir.string() + ": " + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kCheckpointFormatTag) {
      throw FileError("unsupported checkpoint format '" + doc.at("format").get<std::string>() +
                      "'");
    }
    const json& g = doc.at("grid");
    const TimeGrid grid(g.at("t0").get<double>(), g.at("dt").get<double>(),
                        g.at("n_steps").get<std::size_t>());
    auto net = [&](const char* name) {
      return load_mlp(dir / doc.at("networks").at(name).get<std::string>());
    };
    NansdeModel model{net("drift"), net("diffusion"), net("ell1"), net("ell2"), grid,
                      doc.at("x0").get<double>(), doc.at("ell2_clamped").get<bool>()};
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw FileError("incomplete checkpoint manifest in " + dir.string() + ": " + e.what());
  } catch (const ShapeError& e) {
    throw FileError("inconsistent checkpoint in " + dir.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw FileError("invalid checkpoint in " + dir.string() + ": " + e.what());
  }
}

}  // namespace nansde
