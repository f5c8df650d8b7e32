#include "prle/cam.hpp"

#include <algorithm>
#include <stdexcept>

namespace prle {

RawCam compute_cam(const FeatureTensor& features, const GradTensor& grads) {
  if (!features.same_shape(grads))
    throw std::invalid_argument("compute_cam: feature/gradient shape mismatch");
  if (features.size() == 0)
    throw std::invalid_argument("compute_cam: empty tensors");
  if (!features.all_finite() || !grads.all_finite())
    throw std::invalid_argument("compute_cam: non-finite input");

  const int channels = features.channels();
  const int rows = features.rows();
  const int cols = features.cols();
  const double inv_area = 1.0 / (static_cast<double>(rows) * cols);

  // Per-channel weight: spatial mean of the score gradient, row-major sum.
  std::vector<double> weights(channels, 0.0);
  for (int k = 0; k < channels; ++k) {
    double sum = 0.0;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) sum += grads(k, r, c);
    weights[k] = sum * inv_area;
  }

  RawCam out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int k = 0; k < channels; ++k) acc += weights[k] * features(k, r, c);
      out(r, c) = acc > 0.0 ? acc : 0.0;
    }
  }
  return out;
}

AttentionMap normalize_minmax(const RawCam& cam) {
  if (cam.empty()) throw std::invalid_argument("normalize_minmax: empty map");
  if (!cam.all_finite())
    throw std::invalid_argument("normalize_minmax: non-finite input");

  const auto vals = cam.values();
  const auto [lo_it, hi_it] = std::minmax_element(vals.begin(), vals.end());
  const double lo = *lo_it;
  const double hi = *hi_it;

  AttentionMap out(cam.rows(), cam.cols());
  if (hi > lo) {
    const double span = hi - lo;
    for (std::size_t i = 0; i < vals.size(); ++i)
      out.values()[i] = (vals[i] - lo) / span;
  }
  return out;
}

AttentionMap upsample_nearest(const AttentionMap& map, int target_rows,
                              int target_cols) {
  if (map.empty()) throw std::invalid_argument("upsample_nearest: empty map");
  if (target_rows < map.rows() || target_cols < map.cols())
    throw std::invalid_argument(
        "upsample_nearest: target dimensions smaller than source");

  AttentionMap out(target_rows, target_cols);
  for (int r = 0; r < target_rows; ++r) {
    const int sr = static_cast<int>(static_cast<std::int64_t>(r) * map.rows() /
                                    target_rows);
    for (int c = 0; c < target_cols; ++c) {
      const int sc = static_cast<int>(static_cast<std::int64_t>(c) *
                                      map.cols() / target_cols);
      out(r, c) = map(sr, sc);
    }
  }
  return out;
}

}  // namespace prle
