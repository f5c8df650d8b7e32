#pragma once

#include <string>
#include <vector>

#include "prle/types.hpp"

namespace prle {

/// Attention maps from the model zoo, one per member, identical dimensions,
/// values in [0,1].
struct ModelZooMaps {
  std::vector<AttentionMap> maps;
  std::vector<std::string> model_ids; // optional, same length when present
};

/// Throws if the zoo is empty, shapes differ, ids mismatch, or any value
/// falls outside [0,1].
void validate_zoo(const ModelZooMaps& zoo);

enum class FusionStrategy { kAverage, kNeighboring };
enum class Neighborhood { kFourConnected, kEightConnected };

struct FusionConfig {
  FusionStrategy strategy = FusionStrategy::kNeighboring;
  double tau1 = 0.3;    // average-fusion noise floor (strictly-greater keep)
  double lambda = 0.15; // neighbor-contrast threshold for region growth
  Neighborhood neighborhood = Neighborhood::kEightConnected;
  bool include_center_in_value_max = true;
  // Whether the contrast test may pair a map with itself. Pairing a map
  // with itself compares a pixel against its own neighborhood, which is
  // what keeps single-model zoos non-degenerate.
  bool pairs_include_same_model = true;
};

/// Pixel-wise mean across the zoo, kept only where it strictly exceeds tau1.
/// The mean sums the per-pixel values in ascending order, so the output is
/// bit-identical under any permutation of the zoo.
FusedMap average_fuse(const ModelZooMaps& zoo, double tau1);

/// True iff some ordered map pair (j, k) has a mean absolute difference
/// between j's in-bounds neighbors and k's center value strictly above
/// lambda. The neighborhood is clipped at borders and the mean divides by
/// the in-bounds neighbor count.
bool neighbor_indicator(const ModelZooMaps& zoo, int row, int col,
                        double lambda, Neighborhood neighborhood,
                        bool pairs_include_same_model = true);

/// Region-growing stage alone: where the indicator fires, the maximum
/// attention over all maps and neighbors (plus the center when configured);
/// zero elsewhere.
FusedMap neighboring_map(const ModelZooMaps& zoo, const FusionConfig& cfg);

/// Full neighboring fusion: the region-growing map combined with
/// average_fuse(zoo, tau1) by pointwise max, so grown regions always
/// contain the thresholded-average seed regions.
FusedMap neighboring_fuse(const ModelZooMaps& zoo, const FusionConfig& cfg);

/// Strategy dispatch.
FusedMap fuse(const ModelZooMaps& zoo, const FusionConfig& cfg);

/// 1 where the fused value is strictly positive.
BinaryMask to_binary_mask(const FusedMap& fused);

/// Pointwise 1 - value; an involution.
BinaryMask complement(const BinaryMask& mask);

/// Percentage of pixels inside the mask, 100 * ones / total.
double primary_region_ratio(const BinaryMask& mask);

/// Two-decimal rendering used by the stats reports, e.g. "17.79".
std::string format_ratio(double percent);

}  // namespace prle
