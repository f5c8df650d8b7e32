#include "prle/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "prle/cam.hpp"
#include "prle/exploitation.hpp"

namespace prle {

namespace {

void check_train_config(const TrainConfig& cfg) {
  if (!(cfg.p >= 0.0 && cfg.p <= 1.0))
    throw std::invalid_argument("trainer: p outside [0,1]");
  if (!(cfg.gamma >= 0.0))
    throw std::invalid_argument("trainer: gamma must be >= 0");
  if (!(cfg.alpha_min >= 0.0 && cfg.alpha_min <= cfg.alpha_max &&
        cfg.alpha_max <= 1.0 && cfg.alpha_max > 0.0))
    throw std::invalid_argument("trainer: alpha range not inside (0,1]");
  if (!(cfg.learning_rate > 0.0))
    throw std::invalid_argument("trainer: learning_rate must be > 0");
  if (cfg.epochs < 0) throw std::invalid_argument("trainer: epochs < 0");
  if (cfg.batch_size < 1)
    throw std::invalid_argument("trainer: batch_size must be >= 1");
}

void accumulate(ParamGrads& acc, const ParamGrads& g, double weight) {
  for (std::size_t i = 0; i < acc.conv_weights.size(); ++i)
    acc.conv_weights[i] += weight * g.conv_weights[i];
  for (std::size_t i = 0; i < acc.conv_bias.size(); ++i)
    acc.conv_bias[i] += weight * g.conv_bias[i];
  for (std::size_t i = 0; i < acc.linear_weights.size(); ++i)
    acc.linear_weights[i] += weight * g.linear_weights[i];
  acc.linear_bias += weight * g.linear_bias;
}

ParamGrads zero_grads(const ToyDetectorParams& params) {
  ParamGrads g;
  g.conv_weights.assign(params.conv_weights.size(), 0.0);
  g.conv_bias.assign(params.conv_bias.size(), 0.0);
  g.linear_weights.assign(params.linear_weights.size(), 0.0);
  g.linear_bias = 0.0;
  return g;
}

// param -= lr * (accumulated / batch_n); the order of operations here is
// part of the determinism contract the single-step tests pin down.
void apply_step(ToyDetectorParams& params, const ParamGrads& acc, double lr,
                int batch_n) {
  const double inv_n = 1.0 / static_cast<double>(batch_n);
  for (std::size_t i = 0; i < params.conv_weights.size(); ++i)
    params.conv_weights[i] -= lr * (acc.conv_weights[i] * inv_n);
  for (std::size_t i = 0; i < params.conv_bias.size(); ++i)
    params.conv_bias[i] -= lr * (acc.conv_bias[i] * inv_n);
  for (std::size_t i = 0; i < params.linear_weights.size(); ++i)
    params.linear_weights[i] -= lr * (acc.linear_weights[i] * inv_n);
  params.linear_bias -= lr * (acc.linear_bias * inv_n);
}

std::string format_csv_value(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

AugmentDecision sample_augmentation(Rng& rng, double p, double alpha_min,
                                    double alpha_max) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("sample_augmentation: p outside [0,1]");
  if (!(alpha_min >= 0.0 && alpha_min <= alpha_max && alpha_max <= 1.0 &&
        alpha_max > 0.0))
    throw std::invalid_argument(
        "sample_augmentation: alpha range not inside (0,1]");

  AugmentDecision d;
  // Draw from [0,1) and compare strictly, so p=0 never masks and p=1
  // always does.
  d.masked = rng.unit() < p;
  if (d.masked) d.alpha = rng.range_excl_lo(alpha_min, alpha_max);
  return d;
}

double empirical_risk(const ToyDetectorParams& params,
                      const std::vector<TrainingExample>& data) {
  if (data.empty()) throw std::invalid_argument("empirical_risk: empty dataset");
  double sum = 0.0;
  for (const auto& ex : data)
    sum += bce_loss(forward(params, ex.image).score, ex.label);
  return sum / static_cast<double>(data.size());
}

double regularized_risk_term(const ToyDetectorParams& params,
                             const TrainingExample& example,
                             const AugmentDecision& decision, double gamma,
                             const FusedMap& fused) {
  if (!decision.masked)
    return bce_loss(forward(params, example.image).score, example.label);
  const AugmentedImage aug =
      dynamic_augment(example.image, fused, decision.alpha);
  return gamma * bce_loss(forward(params, aug.image).score, example.label);
}

EpochStats train_epoch(ToyDetectorParams& model,
                       const std::vector<TrainingExample>& data,
                       const std::vector<FusedMap>& fused_maps,
                       const TrainConfig& cfg, Rng& rng, int epoch_index) {
  check_train_config(cfg);
  if (data.empty()) throw std::invalid_argument("train_epoch: empty dataset");
  const bool may_augment = cfg.prle_enabled && cfg.p > 0.0;
  if (may_augment && fused_maps.size() != data.size())
    throw std::invalid_argument(
        "train_epoch: one fused map per training example required");

  EpochStats stats;
  stats.epoch = epoch_index;

  const std::size_t n = data.size();
  double risk_sum = 0.0;
  std::size_t n_masked = 0;
  std::size_t n_correct = 0;

  for (std::size_t start = 0; start < n; start += cfg.batch_size) {
    const std::size_t end = std::min(n, start + cfg.batch_size);
    ParamGrads acc = zero_grads(model);

    for (std::size_t i = start; i < end; ++i) {
      const TrainingExample& ex = data[i];
      AugmentDecision decision;
      if (cfg.prle_enabled)
        decision = sample_augmentation(rng, cfg.p, cfg.alpha_min, cfg.alpha_max);

      double weight = 1.0;
      BackwardResult b;
      if (decision.masked) {
        const AugmentedImage aug =
            dynamic_augment(ex.image, fused_maps[i], decision.alpha);
        b = backward(model, aug.image, ex.label);
        weight = cfg.gamma;
        ++n_masked;
      } else {
        b = backward(model, ex.image, ex.label);
      }

      accumulate(acc, b.loss_grads, weight);
      risk_sum += weight * bce_loss(b.trace.score, ex.label);
      n_correct += ((b.trace.score >= 0.5 ? 1 : 0) == ex.label) ? 1 : 0;
    }
    apply_step(model, acc, cfg.learning_rate,
               static_cast<int>(end - start));
  }

  stats.risk = risk_sum / static_cast<double>(n);
  stats.frac_augmented = static_cast<double>(n_masked) / static_cast<double>(n);
  stats.train_accuracy =
      static_cast<double>(n_correct) / static_cast<double>(n);
  return stats;
}

void train_detector(ToyDetectorParams& model,
                    const std::vector<TrainingExample>& data, int epochs,
                    double learning_rate, int batch_size) {
  TrainConfig cfg;
  cfg.prle_enabled = false;
  cfg.p = 0.0;
  cfg.learning_rate = learning_rate;
  cfg.epochs = epochs;
  cfg.batch_size = batch_size;
  Rng unused(0);
  for (int e = 1; e <= epochs; ++e)
    train_epoch(model, data, {}, cfg, unused, e);
}

EvalResult evaluate(const ToyDetectorParams& params,
                    const std::vector<TrainingExample>& data) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");

  const std::size_t n = data.size();
  std::vector<double> scores(n);
  std::size_t n_correct = 0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = forward(params, data[i].image).score;
    n_correct += ((scores[i] >= 0.5 ? 1 : 0) == data[i].label) ? 1 : 0;
    n_pos += data[i].label;
  }

  EvalResult res;
  res.accuracy = static_cast<double>(n_correct) / static_cast<double>(n);

  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return res; // AUC undefined

  // Mann-Whitney with midranks for ties.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // 1-based ranks i+1 .. j share the midrank.
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t)
      if (data[order[t]].label == 1) pos_rank_sum += midrank;
    i = j;
  }
  const double n1 = static_cast<double>(n_pos);
  const double n0 = static_cast<double>(n_neg);
  res.auc = (pos_rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
  return res;
}

double patch_dependence_score(const ToyDetectorParams& params,
                              const std::vector<Image>& probes, int patch_row,
                              int patch_col, int patch_side) {
  if (probes.empty())
    throw std::invalid_argument("patch_dependence_score: no probe images");
  double sum = 0.0;
  for (const Image& probe : probes) {
    const double plain = forward(params, probe).score;
    Image stamped = probe;
    stamp_patch(stamped, patch_row, patch_col, patch_side);
    sum += std::abs(forward(params, stamped).score - plain);
  }
  return sum / static_cast<double>(probes.size());
}

FitResult fit(const FitConfig& cfg, const std::vector<TrainingExample>& train,
              const std::vector<std::vector<TrainingExample>>& eval_sets) {
  check_train_config(cfg.train);
  if (train.empty()) throw std::invalid_argument("fit: empty training set");
  if (cfg.model_channels < 1)
    throw std::invalid_argument("fit: model_channels must be >= 1");
  const int side = train.front().image.rows();

  FitResult res;
  Rng rng(cfg.train.seed);
  res.model = init_params(cfg.model_channels, side, rng);

  // Static localization runs once, before the first epoch, and the maps
  // stay frozen for the whole run.
  if (cfg.train.prle_enabled && cfg.train.p > 0.0) {
    if (cfg.zoo.members.empty())
      throw std::invalid_argument("fit: zoo has no members");
    for (const ZooMemberConfig& member : cfg.zoo.members) {
      Rng member_rng(member.seed);
      ToyDetectorParams zoo_model =
          init_params(member.channels, side, member_rng);
      train_detector(zoo_model, train, cfg.zoo.epochs, cfg.zoo.learning_rate,
                     cfg.zoo.batch_size);
      res.zoo_models.push_back(std::move(zoo_model));
    }

    res.fused_maps.reserve(train.size());
    for (const TrainingExample& ex : train) {
      ModelZooMaps zoo_maps;
      for (const ToyDetectorParams& zoo_model : res.zoo_models) {
        auto [features, grads] = extract_cam_inputs(zoo_model, ex.image);
        zoo_maps.maps.push_back(normalize_minmax(compute_cam(features, grads)));
      }
      res.fused_maps.push_back(fuse(zoo_maps, cfg.fusion));
    }
  }

  for (int epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    EpochStats stats =
        train_epoch(res.model, train, res.fused_maps, cfg.train, rng, epoch);
    for (const auto& eval_set : eval_sets)
      stats.evals.push_back(evaluate(res.model, eval_set));
    res.stats.push_back(std::move(stats));
  }
  return res;
}

std::string epoch_stats_csv(const std::vector<EpochStats>& stats) {
  std::string out = "epoch,risk,frac_augmented,train_acc,eval_acc,eval_auc\n";
  for (const EpochStats& s : stats) {
    out += std::to_string(s.epoch);
    out += ',';
    out += format_csv_value(s.risk);
    out += ',';
    out += format_csv_value(s.frac_augmented);
    out += ',';
    out += format_csv_value(s.train_accuracy);
    out += ',';
    if (s.evals.empty()) {
      out += "nan,nan";
    } else {
      out += format_csv_value(s.evals.front().accuracy);
      out += ',';
      out += format_csv_value(s.evals.front().auc.value_or(
          std::numeric_limits<double>::quiet_NaN()));
    }
    out += '\n';
  }
  return out;
}

}  // namespace prle
