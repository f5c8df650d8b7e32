#include "prle/dataset.hpp"

#include <algorithm>
#include <stdexcept>

#include "prle/rng.hpp"

namespace prle {

namespace {

void check_config(const SyntheticDatasetConfig& cfg) {
  if (cfg.n_examples < 1)
    throw std::invalid_argument("dataset: n_examples must be >= 1");
  if (cfg.side < 1) throw std::invalid_argument("dataset: side must be >= 1");
  if (cfg.patch_side < 1 || cfg.patch_row < 0 || cfg.patch_col < 0 ||
      cfg.patch_row + cfg.patch_side > cfg.side ||
      cfg.patch_col + cfg.patch_side > cfg.side)
    throw std::invalid_argument("dataset: patch out of bounds");
  if (cfg.patch_correlation < 0.0 || cfg.patch_correlation > 1.0)
    throw std::invalid_argument("dataset: patch_correlation outside [0,1]");
}

Image render_base(const SyntheticDatasetConfig& cfg, int label, Rng& rng) {
  Image img(cfg.side, cfg.side, 1);
  const double ramp_step =
      cfg.side > 1 ? 1.0 / static_cast<double>(cfg.side - 1) : 0.0;
  for (int r = 0; r < cfg.side; ++r) {
    for (int c = 0; c < cfg.side; ++c) {
      const double ramp = (label == 1 ? c : r) * ramp_step;
      const double v = cfg.noise_amplitude * rng.unit() +
                       cfg.global_signal_strength * ramp;
      img(r, c, 0) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

}  // namespace

void stamp_patch(Image& image, int row, int col, int side) {
  if (side < 1 || row < 0 || col < 0 || row + side > image.rows() ||
      col + side > image.cols())
    throw std::invalid_argument("stamp_patch: patch out of bounds");
  for (int r = row; r < row + side; ++r)
    for (int c = col; c < col + side; ++c)
      for (int ch = 0; ch < image.channels(); ++ch) image(r, c, ch) = 1.0;
}

std::vector<TrainingExample> generate_synthetic_dataset(
    const SyntheticDatasetConfig& cfg) {
  check_config(cfg);
  Rng rng(cfg.seed);

  std::vector<TrainingExample> out;
  out.reserve(cfg.n_examples);
  for (int i = 0; i < cfg.n_examples; ++i) {
    const int label = (i % 2 == 0) ? 1 : 0;
    const double patch_prob =
        label == 1 ? cfg.patch_correlation : 1.0 - cfg.patch_correlation;
    const bool with_patch = rng.unit() < patch_prob;

    TrainingExample ex;
    ex.label = label;
    ex.image = render_base(cfg, label, rng);
    if (with_patch)
      stamp_patch(ex.image, cfg.patch_row, cfg.patch_col, cfg.patch_side);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<Image> generate_probe_images(const SyntheticDatasetConfig& cfg,
                                         int count, std::uint64_t seed) {
  check_config(cfg);
  if (count < 1) throw std::invalid_argument("probe: count must be >= 1");
  Rng rng(seed);
  std::vector<Image> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(render_base(cfg, (i % 2 == 0) ? 1 : 0, rng));
  return out;
}

}  // namespace prle
