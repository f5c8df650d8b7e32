#include <doctest.h>

#include <cmath>
#include <sstream>

#include "prle/trainer.hpp"

using namespace prle;

namespace {

// 1x1 images turn the detector into a per-pixel logistic model, which makes
// scores directly controllable from the data.
ToyDetectorParams passthrough_model() {
  ToyDetectorParams p;
  p.channels = 1;
  p.input_side = 1;
  p.conv_weights.assign(9, 0.0);
  p.conv_w(0, 1, 1) = 1.0; // center tap only
  p.conv_bias = {0.0};
  p.linear_weights = {1.0};
  p.linear_bias = 0.0;
  return p;
}

TrainingExample pixel_example(double value, int label) {
  TrainingExample ex;
  ex.image = Image(1, 1, 1, value);
  ex.label = label;
  return ex;
}

ToyDetectorParams zero_model(int side) {
  ToyDetectorParams p;
  p.channels = 1;
  p.input_side = side;
  p.conv_weights.assign(9, 0.0);
  p.conv_bias = {0.0};
  p.linear_weights = {0.0};
  p.linear_bias = 0.0;
  return p;
}

}  // namespace

TEST_CASE("sample_augmentation degenerate probabilities") {
  Rng rng(1);
  for (int i = 0; i < 200; ++i)
    CHECK_FALSE(sample_augmentation(rng, 0.0, 0.0, 1.0).masked);
  for (int i = 0; i < 200; ++i) {
    const AugmentDecision d = sample_augmentation(rng, 1.0, 0.0, 1.0);
    CHECK(d.masked);
    CHECK(d.alpha > 0.0);
    CHECK(d.alpha <= 1.0);
  }
  CHECK_THROWS_AS(sample_augmentation(rng, 1.5, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_augmentation(rng, 0.5, 0.5, 0.4),
                  std::invalid_argument);
}

TEST_CASE("sample_augmentation respects a restricted alpha range") {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const AugmentDecision d = sample_augmentation(rng, 1.0, 0.25, 0.5);
    CHECK(d.alpha > 0.25);
    CHECK(d.alpha <= 0.5);
  }
}

TEST_CASE("masked fraction concentrates near p") {
  Rng rng(7);
  int masked = 0;
  for (int i = 0; i < 10000; ++i)
    masked += sample_augmentation(rng, 0.5, 0.0, 1.0).masked ? 1 : 0;
  const double fraction = masked / 10000.0;
  CHECK(fraction >= 0.48);
  CHECK(fraction <= 0.52);
}

TEST_CASE("empirical_risk hand values") {
  const ToyDetectorParams p = zero_model(2);
  const std::vector<TrainingExample> one = {
      {Image(2, 2, 1, 0.3), 1},
  };
  CHECK(empirical_risk(p, one) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Saturated correct predictions drive the risk toward zero.
  ToyDetectorParams confident = passthrough_model();
  confident.linear_bias = 30.0;
  const std::vector<TrainingExample> pos = {pixel_example(0.5, 1),
                                            pixel_example(0.9, 1)};
  CHECK(empirical_risk(confident, pos) < 1e-9);

  // Duplicating the dataset leaves the mean unchanged.
  std::vector<TrainingExample> doubled = {pixel_example(0.2, 0),
                                          pixel_example(0.8, 1)};
  const double base = empirical_risk(passthrough_model(), doubled);
  doubled.insert(doubled.end(), {pixel_example(0.2, 0), pixel_example(0.8, 1)});
  CHECK(empirical_risk(passthrough_model(), doubled) ==
        doctest::Approx(base).epsilon(1e-15));

  CHECK_THROWS_AS(empirical_risk(p, {}), std::invalid_argument);
}

TEST_CASE("regularized_risk_term reduces to the plain loss for originals") {
  const ToyDetectorParams p = zero_model(2);
  const TrainingExample ex = {Image(2, 2, 1, 0.4), 1};
  const Map2D fused(2, 2, 0.5);
  const double plain = bce_loss(forward(p, ex.image).score, ex.label);
  for (double gamma : {0.0, 1.0, 7.5})
    CHECK(regularized_risk_term(p, ex, {.masked = false}, gamma, fused) ==
          plain);
}

TEST_CASE("regularized_risk_term with an empty selection equals the plain loss") {
  const ToyDetectorParams p = zero_model(2);
  const TrainingExample ex = {Image(2, 2, 1, 0.4), 1};
  const Map2D zero_map(2, 2, 0.0); // nothing ranked, nothing masked
  const double plain = bce_loss(forward(p, ex.image).score, ex.label);
  const double term = regularized_risk_term(
      p, ex, {.masked = true, .alpha = 0.5}, 1.0, zero_map);
  CHECK(std::abs(term - plain) <= 1e-12);
}

TEST_CASE("regularized_risk_term scales the masked loss by gamma") {
  // Zero model scores 0.5 for any input, so the masked loss is ln 2.
  const ToyDetectorParams p = zero_model(2);
  const TrainingExample ex = {Image(2, 2, 1, 0.9), 1};
  const Map2D fused(2, 2, 0.8);
  const double term = regularized_risk_term(
      p, ex, {.masked = true, .alpha = 1.0}, 2.0, fused);
  CHECK(term == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("one epoch on one example applies exactly minus lr times the gradient") {
  Rng init_rng(3);
  ToyDetectorParams model = init_params(2, 4, init_rng);
  const ToyDetectorParams before = model;

  Image img(4, 4, 1, 0.6);
  const std::vector<TrainingExample> data = {{img, 1}};
  const BackwardResult b = backward(model, img, 1);

  TrainConfig cfg;
  cfg.prle_enabled = false;
  cfg.learning_rate = 0.25;
  cfg.batch_size = 8;
  Rng rng(0);
  train_epoch(model, data, {}, cfg, rng, 1);

  for (std::size_t i = 0; i < model.conv_weights.size(); ++i)
    CHECK(model.conv_weights[i] ==
          before.conv_weights[i] - 0.25 * (b.loss_grads.conv_weights[i] / 1.0));
  CHECK(model.linear_bias ==
        before.linear_bias - 0.25 * (b.loss_grads.linear_bias / 1.0));
}

TEST_CASE("p=0 training is bitwise identical to plain BCE training") {
  SyntheticDatasetConfig dcfg;
  dcfg.n_examples = 40;
  dcfg.side = 8;
  dcfg.patch_side = 2;
  dcfg.patch_row = 1;
  dcfg.patch_col = 1;
  dcfg.seed = 5;
  const auto data = generate_synthetic_dataset(dcfg);
  const std::vector<FusedMap> maps(data.size(), Map2D(8, 8, 0.5));

  TrainConfig plain;
  plain.prle_enabled = false;
  plain.epochs = 3;
  plain.learning_rate = 0.5;
  plain.batch_size = 8;

  TrainConfig p_zero = plain;
  p_zero.prle_enabled = true;
  p_zero.p = 0.0;

  Rng init_a(11), init_b(11);
  ToyDetectorParams model_a = init_params(2, 8, init_a);
  ToyDetectorParams model_b = init_params(2, 8, init_b);
  Rng rng_a(12), rng_b(12);
  for (int epoch = 1; epoch <= 3; ++epoch) {
    const EpochStats sa = train_epoch(model_a, data, {}, plain, rng_a, epoch);
    const EpochStats sb = train_epoch(model_b, data, maps, p_zero, rng_b, epoch);
    CHECK(model_a == model_b);
    CHECK(sa.risk == sb.risk);
    CHECK(sb.frac_augmented == 0.0);
  }
}

TEST_CASE("train_epoch requires one fused map per example when augmenting") {
  const std::vector<TrainingExample> data = {pixel_example(0.5, 1),
                                             pixel_example(0.2, 0)};
  ToyDetectorParams model = passthrough_model();
  TrainConfig cfg;
  cfg.p = 0.5;
  Rng rng(1);
  CHECK_THROWS_AS(train_epoch(model, data, {Map2D(1, 1, 0.5)}, cfg, rng, 1),
                  std::invalid_argument);
}

TEST_CASE("evaluate computes accuracy, AUC and rejects AUC for one class") {
  const ToyDetectorParams p = passthrough_model();

  const std::vector<TrainingExample> separable = {
      pixel_example(0.9, 1), pixel_example(0.8, 1), pixel_example(0.2, 0),
      pixel_example(0.1, 0)};
  const EvalResult r = evaluate(p, separable);
  REQUIRE(r.auc.has_value());
  CHECK(*r.auc == 1.0);

  const std::vector<TrainingExample> single = {pixel_example(0.9, 1),
                                               pixel_example(0.8, 1)};
  const EvalResult s = evaluate(p, single);
  CHECK_FALSE(s.auc.has_value());
  CHECK(s.accuracy == 1.0); // sigmoid(0.9), sigmoid(0.8) >= 0.5

  CHECK_THROWS_AS(evaluate(p, {}), std::invalid_argument);
}

TEST_CASE("AUC counts ties as one half") {
  const ToyDetectorParams p = passthrough_model();
  const std::vector<TrainingExample> tied = {
      pixel_example(0.5, 1), pixel_example(0.5, 0), pixel_example(0.5, 1),
      pixel_example(0.5, 0)};
  const EvalResult r = evaluate(p, tied);
  REQUIRE(r.auc.has_value());
  CHECK(*r.auc == 0.5);
}

TEST_CASE("AUC is invariant under strictly monotone score transforms") {
  // Squaring pixel values in [0,1] is strictly monotone; sigmoid is too,
  // so the ranking (and hence AUC) must match.
  std::vector<TrainingExample> a, b;
  Rng rng(13);
  for (int i = 0; i < 30; ++i) {
    const double v = rng.range(0.05, 0.95);
    const int label = static_cast<int>(rng.raw() % 2);
    a.push_back(pixel_example(v, label));
    b.push_back(pixel_example(v * v, label));
  }
  const ToyDetectorParams p = passthrough_model();
  const EvalResult ra = evaluate(p, a);
  const EvalResult rb = evaluate(p, b);
  REQUIRE(ra.auc.has_value());
  REQUIRE(rb.auc.has_value());
  CHECK(*ra.auc == doctest::Approx(*rb.auc).epsilon(1e-12));
}

TEST_CASE("AUC of label-independent scores approaches one half") {
  std::vector<TrainingExample> data;
  Rng rng(14);
  for (int i = 0; i < 4000; ++i)
    data.push_back(pixel_example(rng.unit(), static_cast<int>(rng.raw() % 2)));
  const EvalResult r = evaluate(passthrough_model(), data);
  REQUIRE(r.auc.has_value());
  CHECK(*r.auc == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("patch dependence is zero for a constant model") {
  const ToyDetectorParams p = zero_model(8);
  const std::vector<Image> probes = {Image(8, 8, 1, 0.2), Image(8, 8, 1, 0.6)};
  CHECK(patch_dependence_score(p, probes, 1, 1, 3) == 0.0);

  // A brightness-sensitive model reacts to the stamped patch.
  ToyDetectorParams bright;
  bright.channels = 1;
  bright.input_side = 8;
  bright.conv_weights.assign(9, 0.0);
  bright.conv_w(0, 1, 1) = 1.0;
  bright.conv_bias = {0.0};
  bright.linear_weights = {20.0};
  bright.linear_bias = -5.0;
  CHECK(patch_dependence_score(bright, probes, 1, 1, 3) > 0.1);
}

TEST_CASE("fit is deterministic and zero epochs return the initial model") {
  SyntheticDatasetConfig dcfg;
  dcfg.n_examples = 30;
  dcfg.side = 8;
  dcfg.patch_side = 2;
  dcfg.patch_row = 1;
  dcfg.patch_col = 1;
  dcfg.seed = 21;
  const auto train_set = generate_synthetic_dataset(dcfg);
  dcfg.seed = 22;
  dcfg.patch_correlation = 0.5;
  const auto eval_set = generate_synthetic_dataset(dcfg);

  FitConfig cfg;
  cfg.train.epochs = 2;
  cfg.train.seed = 3;
  cfg.train.batch_size = 8;
  cfg.train.learning_rate = 0.5;
  cfg.model_channels = 2;
  cfg.zoo.members = {{.seed = 1, .channels = 2}, {.seed = 2, .channels = 2}};
  cfg.zoo.epochs = 1;

  const FitResult a = fit(cfg, train_set, {eval_set});
  const FitResult b = fit(cfg, train_set, {eval_set});
  CHECK(a.model == b.model);
  REQUIRE(a.stats.size() == b.stats.size());
  for (std::size_t i = 0; i < a.stats.size(); ++i) {
    CHECK(a.stats[i].risk == b.stats[i].risk);
    CHECK(a.stats[i].frac_augmented == b.stats[i].frac_augmented);
    REQUIRE(a.stats[i].evals.size() == 1);
    CHECK(a.stats[i].evals[0].accuracy == b.stats[i].evals[0].accuracy);
  }

  FitConfig none = cfg;
  none.train.epochs = 0;
  const FitResult c = fit(none, train_set, {});
  Rng init(none.train.seed);
  CHECK(c.model == init_params(none.model_channels, 8, init));
  CHECK(c.stats.empty());
}

TEST_CASE("plain-training risk is non-increasing at a small learning rate") {
  // Linearly separable one-pixel dataset trained full-batch.
  std::vector<TrainingExample> data;
  for (int i = 0; i < 10; ++i) {
    data.push_back(pixel_example(0.8 + 0.01 * i, 1));
    data.push_back(pixel_example(0.1 + 0.01 * i, 0));
  }
  ToyDetectorParams model = passthrough_model();
  TrainConfig cfg;
  cfg.prle_enabled = false;
  cfg.learning_rate = 0.05;
  cfg.batch_size = static_cast<int>(data.size());
  Rng rng(0);
  double previous = empirical_risk(model, data);
  for (int epoch = 1; epoch <= 40; ++epoch) {
    train_epoch(model, data, {}, cfg, rng, epoch);
    const double risk = empirical_risk(model, data);
    CHECK(risk <= previous + 1e-12);
    previous = risk;
  }
}

TEST_CASE("epoch stats render as a fixed-header CSV") {
  EpochStats s;
  s.epoch = 1;
  s.risk = 0.5;
  s.frac_augmented = 0.25;
  s.train_accuracy = 0.75;
  s.evals.push_back({.accuracy = 0.625, .auc = 0.875});

  const std::string csv = epoch_stats_csv({s});
  std::istringstream lines(csv);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header == "epoch,risk,frac_augmented,train_acc,eval_acc,eval_auc");
  CHECK(row == "1,0.5,0.25,0.75,0.625,0.875");

  EpochStats no_eval = s;
  no_eval.evals.clear();
  const std::string csv2 = epoch_stats_csv({no_eval});
  CHECK(csv2.find("nan,nan") != std::string::npos);
}
