#pragma once

#include <vector>

#include "prle/types.hpp"

namespace prle {

struct PixelCoord {
  int row = 0;
  int col = 0;
  friend bool operator==(PixelCoord, PixelCoord) = default;
};

struct RankedPixel {
  PixelCoord pos;
  double value = 0.0;
  friend bool operator==(const RankedPixel&, const RankedPixel&) = default;
};

/// Strictly-positive pixels of a fused map, descending by value with
/// row-major coordinates breaking ties.
using RankedPixels = std::vector<RankedPixel>;

/// Whether the rank cutoff index i runs to alpha*|ranking| inclusively
/// (i <= alpha*n, the default) or exclusively (i < alpha*n).
enum class SelectionBound { kInclusive, kExclusive };

/// The retained top-alpha pixel coordinates, still in rank order.
struct SelectionSet {
  std::vector<PixelCoord> coords;
  double alpha = 0.0;
};

RankedPixels rank_pixels(const FusedMap& fused);

/// Keeps min(n, floor(alpha*n)+1) pixels under the inclusive bound, so a
/// nonempty ranking always yields at least one pixel. alpha must lie in
/// (0, 1].
SelectionSet select_top_alpha(const RankedPixels& ranked, double alpha,
                              SelectionBound bound = SelectionBound::kInclusive);

/// Mask restricted to the selection: mask(x) where x is selected, else 0.
BinaryMask apply_selection(const SelectionSet& selection,
                           const BinaryMask& mask);

struct AugmentedImage {
  Image image;
  bool masked = false; // provenance: original vs masked(alpha)
  double alpha = 0.0;
};

/// Zeroes the selected mask pixels out of the image; all channels are
/// masked identically and unselected pixels are passed through untouched.
AugmentedImage mask_image(const Image& image, const SelectionSet& selection,
                          const BinaryMask& mask);

/// Full exploitation pipeline: resample the fused map to image resolution
/// if needed, rank, keep the top-alpha pixels, restrict the binary mask and
/// occlude the image.
AugmentedImage dynamic_augment(const Image& image, const FusedMap& fused,
                               double alpha,
                               SelectionBound bound = SelectionBound::kInclusive);

}  // namespace prle
