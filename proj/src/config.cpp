#include "prle/config.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "prle/tensor_io.hpp"

namespace prle {

namespace {

using nlohmann::json;

FusionStrategy strategy_from_string(const std::string& s) {
  if (s == "average") return FusionStrategy::kAverage;
  if (s == "neighboring") return FusionStrategy::kNeighboring;
  throw std::invalid_argument("config: unknown strategy '" + s + "'");
}

std::string strategy_to_string(FusionStrategy s) {
  return s == FusionStrategy::kAverage ? "average" : "neighboring";
}

Neighborhood neighborhood_from_int(int n) {
  if (n == 4) return Neighborhood::kFourConnected;
  if (n == 8) return Neighborhood::kEightConnected;
  throw std::invalid_argument("config: neighborhood must be 4 or 8");
}

int neighborhood_to_int(Neighborhood n) {
  return n == Neighborhood::kFourConnected ? 4 : 8;
}

}  // namespace

PipelineConfig default_pipeline_config() { return PipelineConfig{}; }

PipelineConfig pipeline_config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: bad JSON: ") + e.what());
  }
  if (!j.is_object())
    throw std::invalid_argument("config: document must be a JSON object");

  PipelineConfig cfg = default_pipeline_config();

  const auto take = [&](const char* key, auto setter) {
    if (auto it = j.find(key); it != j.end()) {
      setter(*it);
      j.erase(it);
    }
  };

  try {
    // Fusion.
    take("strategy", [&](const json& v) {
      cfg.fusion.strategy = strategy_from_string(v.get<std::string>());
    });
    take("tau1", [&](const json& v) { cfg.fusion.tau1 = v.get<double>(); });
    take("lambda", [&](const json& v) { cfg.fusion.lambda = v.get<double>(); });
    take("neighborhood", [&](const json& v) {
      cfg.fusion.neighborhood = neighborhood_from_int(v.get<int>());
    });
    take("include_center_in_value_max", [&](const json& v) {
      cfg.fusion.include_center_in_value_max = v.get<bool>();
    });
    take("pairs_include_same_model", [&](const json& v) {
      cfg.fusion.pairs_include_same_model = v.get<bool>();
    });

    // Training.
    take("p", [&](const json& v) { cfg.train.p = v.get<double>(); });
    take("gamma", [&](const json& v) { cfg.train.gamma = v.get<double>(); });
    take("alpha_min",
         [&](const json& v) { cfg.train.alpha_min = v.get<double>(); });
    take("alpha_max",
         [&](const json& v) { cfg.train.alpha_max = v.get<double>(); });
    take("learning_rate",
         [&](const json& v) { cfg.train.learning_rate = v.get<double>(); });
    take("epochs", [&](const json& v) { cfg.train.epochs = v.get<int>(); });
    take("batch_size",
         [&](const json& v) { cfg.train.batch_size = v.get<int>(); });
    take("seed",
         [&](const json& v) { cfg.train.seed = v.get<std::uint64_t>(); });
    take("prle_enabled",
         [&](const json& v) { cfg.train.prle_enabled = v.get<bool>(); });
    take("model_channels",
         [&](const json& v) { cfg.model_channels = v.get<int>(); });

    // Synthetic data.
    take("n_examples",
         [&](const json& v) { cfg.data.n_examples = v.get<int>(); });
    take("side", [&](const json& v) { cfg.data.side = v.get<int>(); });
    take("patch_side",
         [&](const json& v) { cfg.data.patch_side = v.get<int>(); });
    take("patch_row", [&](const json& v) { cfg.data.patch_row = v.get<int>(); });
    take("patch_col", [&](const json& v) { cfg.data.patch_col = v.get<int>(); });
    take("patch_correlation",
         [&](const json& v) { cfg.data.patch_correlation = v.get<double>(); });
    take("global_signal_strength", [&](const json& v) {
      cfg.data.global_signal_strength = v.get<double>();
    });
    take("noise_amplitude",
         [&](const json& v) { cfg.data.noise_amplitude = v.get<double>(); });
    take("data_seed",
         [&](const json& v) { cfg.data.seed = v.get<std::uint64_t>(); });

    // Zoo.
    take("zoo_seeds", [&](const json& v) {
      const auto seeds = v.get<std::vector<std::uint64_t>>();
      if (seeds.size() != cfg.zoo.members.size())
        cfg.zoo.members.resize(seeds.size());
      for (std::size_t i = 0; i < seeds.size(); ++i)
        cfg.zoo.members[i].seed = seeds[i];
    });
    take("zoo_channels", [&](const json& v) {
      const auto channels = v.get<std::vector<int>>();
      if (channels.size() != cfg.zoo.members.size())
        throw std::invalid_argument(
            "config: zoo_channels length must match zoo size");
      for (std::size_t i = 0; i < channels.size(); ++i)
        cfg.zoo.members[i].channels = channels[i];
    });
    take("zoo_epochs", [&](const json& v) { cfg.zoo.epochs = v.get<int>(); });
    take("zoo_learning_rate",
         [&](const json& v) { cfg.zoo.learning_rate = v.get<double>(); });
    take("zoo_batch_size",
         [&](const json& v) { cfg.zoo.batch_size = v.get<int>(); });

    // Held-out evaluation.
    take("eval_examples",
         [&](const json& v) { cfg.eval_examples = v.get<int>(); });
    take("eval_patch_correlation", [&](const json& v) {
      cfg.eval_patch_correlation = v.get<double>();
    });
    take("eval_seed",
         [&](const json& v) { cfg.eval_seed = v.get<std::uint64_t>(); });
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: bad value: ") + e.what());
  }

  if (!j.empty())
    throw std::invalid_argument("config: unknown key '" +
                                j.items().begin().key() + "'");
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("config: cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return pipeline_config_from_json(text);
}

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
  json j;
  j["strategy"] = strategy_to_string(cfg.fusion.strategy);
  j["tau1"] = cfg.fusion.tau1;
  j["lambda"] = cfg.fusion.lambda;
  j["neighborhood"] = neighborhood_to_int(cfg.fusion.neighborhood);
  j["include_center_in_value_max"] = cfg.fusion.include_center_in_value_max;
  j["pairs_include_same_model"] = cfg.fusion.pairs_include_same_model;
  j["p"] = cfg.train.p;
  j["gamma"] = cfg.train.gamma;
  j["alpha_min"] = cfg.train.alpha_min;
  j["alpha_max"] = cfg.train.alpha_max;
  j["learning_rate"] = cfg.train.learning_rate;
  j["epochs"] = cfg.train.epochs;
  j["batch_size"] = cfg.train.batch_size;
  j["seed"] = cfg.train.seed;
  j["prle_enabled"] = cfg.train.prle_enabled;
  j["model_channels"] = cfg.model_channels;
  j["n_examples"] = cfg.data.n_examples;
  j["side"] = cfg.data.side;
  j["patch_side"] = cfg.data.patch_side;
  j["patch_row"] = cfg.data.patch_row;
  j["patch_col"] = cfg.data.patch_col;
  j["patch_correlation"] = cfg.data.patch_correlation;
  j["global_signal_strength"] = cfg.data.global_signal_strength;
  j["noise_amplitude"] = cfg.data.noise_amplitude;
  j["data_seed"] = cfg.data.seed;
  std::vector<std::uint64_t> seeds;
  std::vector<int> channels;
  for (const auto& m : cfg.zoo.members) {
    seeds.push_back(m.seed);
    channels.push_back(m.channels);
  }
  j["zoo_seeds"] = seeds;
  j["zoo_channels"] = channels;
  j["zoo_epochs"] = cfg.zoo.epochs;
  j["zoo_learning_rate"] = cfg.zoo.learning_rate;
  j["zoo_batch_size"] = cfg.zoo.batch_size;
  j["eval_examples"] = cfg.eval_examples;
  j["eval_patch_correlation"] = cfg.eval_patch_correlation;
  j["eval_seed"] = cfg.eval_seed;
  return j.dump(2);
}

}  // namespace prle
