#pragma once

#include "prle/types.hpp"

namespace prle {

/// Gradient-weighted class activation map: each channel is weighted by the
/// spatial mean of its score gradient, the weighted channels are summed and
/// the result is clamped at zero. Output values are >= 0.
RawCam compute_cam(const FeatureTensor& features, const GradTensor& grads);

/// Rescale a map to [0,1] by its own min/max. A constant map (no spread,
/// hence no primary region) normalizes to all zeros.
AttentionMap normalize_minmax(const RawCam& cam);

/// Nearest-neighbor upsampling; target dimensions must be >= the source
/// dimensions. Output values are a subset of the input values.
AttentionMap upsample_nearest(const AttentionMap& map, int target_rows,
                              int target_cols);

}  // namespace prle
