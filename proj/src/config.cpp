// Copyright 2026 The ucsg Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ucsg/config.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "toml.hpp"

namespace ucsg::config {

namespace {

nlohmann::json from_toml(const toml::node& node, const std::string& where) {
  if (const auto* t = node.as_table()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [key, value] : *t) out[std::string(key.str())] = from_toml(value, where + "." + std::string(key.str()));
    return out;
  }
  if (const auto* a = node.as_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < a->size(); ++i) out.push_back(from_toml(*a->get(i), where + "[" + std::to_string(i) + "]"));
    return out;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  throw ConfigError(where + ": unsupported value type");
}

template <typename T>
T get(const nlohmann::json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError("");
      return v.get<double>();
    } else if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("");
      return static_cast<T>(v.get<long long>());
    } else if constexpr (std::is_same_v<T, int>) {
      if (!v.is_number_integer()) throw ConfigError("");
      return v.get<int>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
      return v.get<std::string>();
    } else {
      if (!v.is_array()) throw ConfigError("");
      T out;
      for (const auto& e : v) out.push_back(get<typename T::value_type>(e, key));
      return out;
    }
  } catch (const ConfigError&) {
    throw ConfigError("configuration key '" + key + "' has an invalid value " + v.dump());
  }
}

std::string sampling_name(train::SamplingMode m) {
  return m == train::SamplingMode::Exhaustive ? "exhaustive" : "boundary_biased";
}

}  // namespace

net::ModelConfig preset(const std::string& name) {
  if (name == "paper_2d") return net::ModelConfig::paper_2d();
  if (name == "paper_3d") return net::ModelConfig::paper_3d();
  if (name == "desk_2d") return net::ModelConfig::desk_2d();
  throw ConfigError("unknown preset '" + name + "' (expected paper_2d, paper_3d or desk_2d)");
}

nlohmann::json model_to_json(const net::ModelConfig& c) {
  std::vector<std::string> kinds;
  for (auto k : c.decoder.kinds) kinds.emplace_back(sdf::kind_name(k));
  return {{"dim", c.encoder.dim},
          {"resolution", c.encoder.resolution},
          {"channels", c.encoder.channels},
          {"paddings", c.encoder.paddings},
          {"kernel", c.encoder.kernel},
          {"stride", c.encoder.stride},
          {"slope", c.encoder.slope},
          {"hidden", c.decoder.hidden},
          {"kinds", kinds},
          {"per_kind", c.decoder.per_kind},
          {"layer_outputs", c.csg.layer_outputs},
          {"key_init_std", c.csg.key_init_std},
          {"alpha_init", c.csg.alpha_init},
          {"tau_init", c.csg.tau_init}};
}

void apply_model(const nlohmann::json& j, net::ModelConfig& c) {
  if (!j.is_object()) throw ConfigError("model configuration must be a table");
  for (const auto& [key, v] : j.items()) {
    const std::string k = "model." + key;
    if (key == "dim") c.encoder.dim = get<int>(v, k);
    else if (key == "resolution") c.encoder.resolution = get<std::size_t>(v, k);
    else if (key == "channels") c.encoder.channels = get<std::vector<std::size_t>>(v, k);
    else if (key == "paddings") c.encoder.paddings = get<std::vector<std::size_t>>(v, k);
    else if (key == "kernel") c.encoder.kernel = get<std::size_t>(v, k);
    else if (key == "stride") c.encoder.stride = get<std::size_t>(v, k);
    else if (key == "slope") c.encoder.slope = get<double>(v, k);
    else if (key == "hidden") c.decoder.hidden = get<std::vector<std::size_t>>(v, k);
    else if (key == "kinds") {
      c.decoder.kinds.clear();
      for (const auto& name : get<std::vector<std::string>>(v, k)) {
        const auto kind = sdf::kind_from_name(name);
        if (!kind) throw ConfigError("configuration key '" + k + "' names unknown primitive '" + name + "'");
        c.decoder.kinds.push_back(*kind);
      }
    } else if (key == "per_kind") c.decoder.per_kind = get<std::size_t>(v, k);
    else if (key == "layer_outputs") c.csg.layer_outputs = get<std::vector<std::size_t>>(v, k);
    else if (key == "key_init_std") c.csg.key_init_std = get<double>(v, k);
    else if (key == "alpha_init") c.csg.alpha_init = get<double>(v, k);
    else if (key == "tau_init") c.csg.tau_init = get<double>(v, k);
    else throw ConfigError("unknown configuration key '" + k + "'");
  }
}

nlohmann::json train_to_json(const train::TrainConfig& c) {
  return {{"lambda_translation", c.lambda_translation},
          {"lambda_alpha", c.lambda_alpha},
          {"lambda_tau", c.lambda_tau},
          {"learning_rate", c.learning_rate},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"adam_eps", c.adam_eps},
          {"batch_size", c.batch_size},
          {"epsilon", c.epsilon},
          {"stage_trigger", c.stage_trigger},
          {"patience", c.patience},
          {"min_improvement", c.min_improvement},
          {"max_epochs", c.max_epochs},
          {"sampling", sampling_name(c.sampling)},
          {"sample_count", c.sample_count},
          {"boundary_fraction", c.boundary_fraction},
          {"seed", c.seed}};
}

void apply_train(const nlohmann::json& j, train::TrainConfig& c) {
  if (!j.is_object()) throw ConfigError("train configuration must be a table");
  for (const auto& [key, v] : j.items()) {
    const std::string k = "train." + key;
    if (key == "lambda_translation") c.lambda_translation = get<double>(v, k);
    else if (key == "lambda_alpha") c.lambda_alpha = get<double>(v, k);
    else if (key == "lambda_tau") c.lambda_tau = get<double>(v, k);
    else if (key == "learning_rate") c.learning_rate = get<double>(v, k);
    else if (key == "beta1") c.beta1 = get<double>(v, k);
    else if (key == "beta2") c.beta2 = get<double>(v, k);
    else if (key == "adam_eps") c.adam_eps = get<double>(v, k);
    else if (key == "batch_size") c.batch_size = get<std::size_t>(v, k);
    else if (key == "epsilon") c.epsilon = get<double>(v, k);
    else if (key == "stage_trigger") c.stage_trigger = get<double>(v, k);
    else if (key == "patience") c.patience = get<std::size_t>(v, k);
    else if (key == "min_improvement") c.min_improvement = get<double>(v, k);
    else if (key == "max_epochs") c.max_epochs = get<std::size_t>(v, k);
    else if (key == "sampling") {
      const auto name = get<std::string>(v, k);
      if (name == "exhaustive") c.sampling = train::SamplingMode::Exhaustive;
      else if (name == "boundary_biased") c.sampling = train::SamplingMode::BoundaryBiased;
      else throw ConfigError("configuration key '" + k + "' must be \"exhaustive\" or \"boundary_biased\"");
    } else if (key == "sample_count") c.sample_count = get<std::size_t>(v, k);
    else if (key == "boundary_fraction") c.boundary_fraction = get<double>(v, k);
    else if (key == "seed") c.seed = get<std::uint64_t>(v, k);
    else throw ConfigError("unknown configuration key '" + k + "'");
  }
}

RunConfig parse_toml(const std::string& text, const std::string& source) {
  toml::table table;
  try {
    table = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    throw ConfigError(os.str());
  }
  const nlohmann::json doc = from_toml(table, source);
  RunConfig rc;
  for (const auto& [key, v] : doc.items())
    if (key != "preset" && key != "model" && key != "train")
      throw ConfigError(source + ": unknown configuration key '" + key + "'");
  if (doc.contains("preset")) rc.preset = get<std::string>(doc["preset"], "preset");
  rc.model = preset(rc.preset);
  if (doc.contains("model")) apply_model(doc["model"], rc.model);
  if (doc.contains("train")) {
    apply_train(doc["train"], rc.train);
    rc.seed_set = doc["train"].contains("seed");
  }
  return rc;
}

RunConfig load_toml(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open configuration file");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_toml(text, path.string());
}

}  // namespace ucsg::config
