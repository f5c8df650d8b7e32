#pragma once

#include <cstdint>
#include <vector>

#include "prle/detector.hpp"
#include "prle/types.hpp"

namespace prle {

/// Planted-shortcut synthetic data: a label-correlated ramp carries the
/// true signal, a bright fixed-position patch carries the shortcut. With
/// patch_correlation = 1 the patch perfectly predicts the label; at 0.5 it
/// is uninformative.
struct SyntheticDatasetConfig {
  int n_examples = 2000;
  int side = 32;
  int patch_side = 6;
  int patch_row = 4;
  int patch_col = 4;
  double patch_correlation = 1.0;   // P(patch | label=1); label=0 uses 1-rho
  double global_signal_strength = 0.3;
  double noise_amplitude = 0.25;
  std::uint64_t seed = 0;
};

/// Deterministic given the seed. Labels alternate 1,0,1,0,... Per example
/// the draw order is: patch decision, then one noise draw per pixel in
/// row-major order. Label 1 carries a horizontal ramp, label 0 a vertical
/// one; pixels are clamped to [0,1] and the patch is stamped at exactly 1.0.
std::vector<TrainingExample> generate_synthetic_dataset(
    const SyntheticDatasetConfig& cfg);

/// Overwrite the side x side square at (row, col) with 1.0 on all channels.
void stamp_patch(Image& image, int row, int col, int side);

/// Patch-free images built from the same noise + ramp recipe, for measuring
/// how much a model's score moves when the patch is pasted in.
std::vector<Image> generate_probe_images(const SyntheticDatasetConfig& cfg,
                                         int count, std::uint64_t seed);

}  // namespace prle
