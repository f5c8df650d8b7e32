#include <doctest.h>

#include <cmath>

#include "prle/dataset.hpp"

using namespace prle;

namespace {

bool has_patch(const Image& img, const SyntheticDatasetConfig& cfg) {
  for (int r = cfg.patch_row; r < cfg.patch_row + cfg.patch_side; ++r)
    for (int c = cfg.patch_col; c < cfg.patch_col + cfg.patch_side; ++c)
      if (img(r, c, 0) != 1.0) return false;
  return true;
}

}  // namespace

TEST_CASE("rho=1 stamps the patch on exactly the label-1 images") {
  SyntheticDatasetConfig cfg;
  cfg.n_examples = 200;
  cfg.side = 16;
  cfg.patch_side = 4;
  cfg.patch_row = 2;
  cfg.patch_col = 2;
  cfg.patch_correlation = 1.0;
  cfg.seed = 5;
  for (const auto& ex : generate_synthetic_dataset(cfg))
    CHECK(has_patch(ex.image, cfg) == (ex.label == 1));
}

TEST_CASE("labels are balanced and pixels stay in range") {
  SyntheticDatasetConfig cfg;
  cfg.n_examples = 100;
  cfg.side = 12;
  cfg.patch_side = 3;
  cfg.seed = 7;
  const auto data = generate_synthetic_dataset(cfg);
  int ones = 0;
  for (const auto& ex : data) {
    ones += ex.label;
    for (double v : ex.image.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  CHECK(ones == 50);
}

TEST_CASE("rho=0.5 makes the patch uninformative of the label") {
  SyntheticDatasetConfig cfg;
  cfg.n_examples = 20000;
  cfg.side = 10;
  cfg.patch_side = 3;
  cfg.patch_row = 1;
  cfg.patch_col = 1;
  cfg.patch_correlation = 0.5;
  cfg.seed = 99;
  const auto data = generate_synthetic_dataset(cfg);

  // Empirical mutual information between patch presence and label, in bits.
  double joint[2][2] = {{0, 0}, {0, 0}};
  for (const auto& ex : data)
    joint[has_patch(ex.image, cfg) ? 1 : 0][ex.label] += 1.0;
  const double n = static_cast<double>(data.size());
  double mi = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double p_ab = joint[a][b] / n;
      if (p_ab == 0.0) continue;
      const double p_a = (joint[a][0] + joint[a][1]) / n;
      const double p_b = (joint[0][b] + joint[1][b]) / n;
      mi += p_ab * std::log2(p_ab / (p_a * p_b));
    }
  }
  CHECK(mi < 1e-3);
}

TEST_CASE("identical seeds give identical datasets, different seeds differ") {
  SyntheticDatasetConfig cfg;
  cfg.n_examples = 30;
  cfg.side = 8;
  cfg.patch_side = 2;
  cfg.seed = 42;
  const auto a = generate_synthetic_dataset(cfg);
  const auto b = generate_synthetic_dataset(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].label == b[i].label);
    CHECK(a[i].image == b[i].image);
  }

  cfg.seed = 43;
  const auto c = generate_synthetic_dataset(cfg);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size() && !any_diff; ++i)
    any_diff = !(a[i].image == c[i].image);
  CHECK(any_diff);
}

TEST_CASE("patch out of bounds is rejected") {
  SyntheticDatasetConfig cfg;
  cfg.n_examples = 4;
  cfg.side = 8;
  cfg.patch_side = 6;
  cfg.patch_row = 4;
  cfg.patch_col = 0;
  CHECK_THROWS_AS(generate_synthetic_dataset(cfg), std::invalid_argument);

  Image img(8, 8, 1);
  CHECK_THROWS_AS(stamp_patch(img, 5, 5, 4), std::invalid_argument);
}

TEST_CASE("probe images never carry the patch and are deterministic") {
  SyntheticDatasetConfig cfg;
  cfg.n_examples = 10;
  cfg.side = 16;
  cfg.patch_side = 16; // all-ones would be required for a false positive
  cfg.patch_row = 0;
  cfg.patch_col = 0;
  const auto probes = generate_probe_images(cfg, 20, 3);
  for (const auto& img : probes) CHECK_FALSE(has_patch(img, cfg));
  const auto again = generate_probe_images(cfg, 20, 3);
  for (std::size_t i = 0; i < probes.size(); ++i) CHECK(probes[i] == again[i]);
}
