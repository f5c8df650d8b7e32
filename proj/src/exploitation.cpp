#include "prle/exploitation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prle/cam.hpp"
#include "prle/fusion.hpp"

namespace prle {

RankedPixels rank_pixels(const FusedMap& fused) {
  RankedPixels ranked;
  for (int r = 0; r < fused.rows(); ++r)
    for (int c = 0; c < fused.cols(); ++c)
      if (fused(r, c) > 0.0) ranked.push_back({{r, c}, fused(r, c)});

  std::sort(ranked.begin(), ranked.end(),
            [](const RankedPixel& a, const RankedPixel& b) {
              if (a.value != b.value) return a.value > b.value;
              if (a.pos.row != b.pos.row) return a.pos.row < b.pos.row;
              return a.pos.col < b.pos.col;
            });
  return ranked;
}

SelectionSet select_top_alpha(const RankedPixels& ranked, double alpha,
                              SelectionBound bound) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("select_top_alpha: alpha outside (0,1]");

  SelectionSet out;
  out.alpha = alpha;
  if (ranked.empty()) return out;

  const double scaled = alpha * static_cast<double>(ranked.size());
  std::size_t count =
      bound == SelectionBound::kInclusive
          ? static_cast<std::size_t>(std::floor(scaled)) + 1
          : static_cast<std::size_t>(std::ceil(scaled));
  count = std::min(count, ranked.size());

  out.coords.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.coords.push_back(ranked[i].pos);
  return out;
}

BinaryMask apply_selection(const SelectionSet& selection,
                           const BinaryMask& mask) {
  if (mask.empty()) throw std::invalid_argument("apply_selection: empty mask");
  BinaryMask out(mask.rows(), mask.cols());
  for (const PixelCoord& p : selection.coords) {
    if (p.row < 0 || p.row >= mask.rows() || p.col < 0 || p.col >= mask.cols())
      throw std::invalid_argument(
          "apply_selection: selected coordinate out of bounds");
    out.set(p.row, p.col, mask(p.row, p.col));
  }
  return out;
}

AugmentedImage mask_image(const Image& image, const SelectionSet& selection,
                          const BinaryMask& mask) {
  if (image.rows() != mask.rows() || image.cols() != mask.cols())
    throw std::invalid_argument("mask_image: image/mask dimension mismatch");

  const BinaryMask effective = apply_selection(selection, mask);
  AugmentedImage out;
  out.image = image;
  out.masked = true;
  out.alpha = selection.alpha;
  for (int r = 0; r < image.rows(); ++r)
    for (int c = 0; c < image.cols(); ++c)
      if (effective(r, c))
        for (int ch = 0; ch < image.channels(); ++ch)
          out.image(r, c, ch) = 0.0;
  return out;
}

AugmentedImage dynamic_augment(const Image& image, const FusedMap& fused,
                               double alpha, SelectionBound bound) {
  const FusedMap at_res =
      (fused.rows() == image.rows() && fused.cols() == image.cols())
          ? fused
          : upsample_nearest(fused, image.rows(), image.cols());
  const RankedPixels ranked = rank_pixels(at_res);
  const SelectionSet selection = select_top_alpha(ranked, alpha, bound);
  return mask_image(image, selection, to_binary_mask(at_res));
}

}  // namespace prle
