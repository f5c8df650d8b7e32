#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "prle/dataset.hpp"
#include "prle/fusion.hpp"
#include "prle/trainer.hpp"

namespace prle {

/// Everything the pipeline needs in one serializable record. Defaults
/// mirror the published hyperparameters (tau1 0.3, lambda 0.15, p 0.5,
/// gamma 1.0, alpha from (0,1], a three-member zoo).
struct PipelineConfig {
  FusionConfig fusion;
  TrainConfig train;
  SyntheticDatasetConfig data;
  ZooConfig zoo;
  int model_channels = 6;

  // Held-out set for the training demo: same recipe, shifted patch
  // correlation so the shortcut stops predicting the label.
  int eval_examples = 500;
  double eval_patch_correlation = 0.5;
  std::uint64_t eval_seed = 9001;

  FitConfig fit_config() const {
    return FitConfig{.train = train,
                     .zoo = zoo,
                     .fusion = fusion,
                     .model_channels = model_channels};
  }
};

PipelineConfig default_pipeline_config();

/// Flat JSON document; every key is optional and missing keys keep their
/// defaults. Unknown keys are rejected so typos do not silently vanish.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig pipeline_config_from_json(const std::string& json_text);
std::string pipeline_config_to_json(const PipelineConfig& cfg);

}  // namespace prle
