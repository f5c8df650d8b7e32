#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prle/dataset.hpp"
#include "prle/detector.hpp"
#include "prle/fusion.hpp"
#include "prle/rng.hpp"
#include "prle/types.hpp"

namespace prle {

struct TrainConfig {
  double p = 0.5;         // per-example probability of training on the masked input
  double gamma = 1.0;     // weight on the masked-input loss term
  double alpha_min = 0.0; // alpha is drawn uniformly from (alpha_min, alpha_max]
  double alpha_max = 1.0;
  double learning_rate = 2.0;
  int epochs = 30;
  int batch_size = 4;
  std::uint64_t seed = 0;
  bool prle_enabled = true;
};

struct EvalResult {
  double accuracy = 0.0;
  std::optional<double> auc; // absent for single-class datasets
};

struct EpochStats {
  int epoch = 0;
  double risk = 0.0;           // mean per-example regularized risk term
  double frac_augmented = 0.0; // fraction of examples trained on masked input
  double train_accuracy = 0.0; // accuracy of the in-epoch forward passes
  std::vector<EvalResult> evals; // one entry per held-out set
};

struct AugmentDecision {
  bool masked = false;
  double alpha = 0.0;
};

/// One protocol draw: with probability p the example trains on its masked
/// counterpart with alpha drawn from (alpha_min, alpha_max]. Draw order is
/// the decision first, then alpha only when masked.
AugmentDecision sample_augmentation(Rng& rng, double p, double alpha_min,
                                    double alpha_max);

/// Mean binary cross-entropy over the dataset.
double empirical_risk(const ToyDetectorParams& params,
                      const std::vector<TrainingExample>& data);

/// Per-example regularized risk: the plain loss for an original decision,
/// gamma times the loss on the masked input otherwise.
double regularized_risk_term(const ToyDetectorParams& params,
                             const TrainingExample& example,
                             const AugmentDecision& decision, double gamma,
                             const FusedMap& fused);

/// One pass over the dataset (each example exactly once) with per-example
/// augmentation decisions and mini-batch gradient descent. fused_maps must
/// hold one map per example whenever augmentation can fire.
EpochStats train_epoch(ToyDetectorParams& model,
                       const std::vector<TrainingExample>& data,
                       const std::vector<FusedMap>& fused_maps,
                       const TrainConfig& cfg, Rng& rng, int epoch_index);

/// Plain BCE mini-batch training, used for zoo members and baselines.
void train_detector(ToyDetectorParams& model,
                    const std::vector<TrainingExample>& data, int epochs,
                    double learning_rate, int batch_size);

/// Accuracy at threshold 0.5 plus rank-statistic AUC with ties counted as
/// one half. AUC is absent when only one class is present.
EvalResult evaluate(const ToyDetectorParams& params,
                    const std::vector<TrainingExample>& data);

/// Mean absolute score shift when the shortcut patch is pasted into
/// otherwise patch-free probe images.
double patch_dependence_score(const ToyDetectorParams& params,
                              const std::vector<Image>& probes, int patch_row,
                              int patch_col, int patch_side);

struct ZooMemberConfig {
  std::uint64_t seed = 0;
  int channels = 2;
};

struct ZooConfig {
  std::vector<ZooMemberConfig> members = {
      {.seed = 11, .channels = 2},
      {.seed = 22, .channels = 3},
      {.seed = 33, .channels = 4},
  };
  int epochs = 8;
  double learning_rate = 0.5;
  int batch_size = 32;
};

struct FitConfig {
  TrainConfig train;
  ZooConfig zoo;
  FusionConfig fusion;
  int model_channels = 6;
};

struct FitResult {
  ToyDetectorParams model;
  std::vector<EpochStats> stats;
  std::vector<FusedMap> fused_maps;        // empty when the static stage is skipped
  std::vector<ToyDetectorParams> zoo_models;
};

/// Static localization (zoo training, per-image CAMs, fusion) once up
/// front, then the stochastic-augmentation training loop. Fully
/// deterministic given the seeds; with augmentation disabled it reduces to
/// plain BCE training.
FitResult fit(const FitConfig& cfg, const std::vector<TrainingExample>& train,
              const std::vector<std::vector<TrainingExample>>& eval_sets);

/// CSV rendering of the per-epoch stats stream:
/// epoch,risk,frac_augmented,train_acc,eval_acc,eval_auc
std::string epoch_stats_csv(const std::vector<EpochStats>& stats);

}  // namespace prle
