#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "prle/rng.hpp"
#include "prle/types.hpp"

namespace prle {

/// Parameters of the desk-scale detector:
/// conv(3x3, stride 1, zero pad 1) -> ReLU -> global average pool ->
/// linear -> sigmoid, single-channel input.
struct ToyDetectorParams {
  static constexpr int kKernel = 3;

  int channels = 0;    // K
  int input_side = 32; // expected square image side
  std::vector<double> conv_weights;   // K x 1 x 3 x 3, row-major
  std::vector<double> conv_bias;      // K
  std::vector<double> linear_weights; // K
  double linear_bias = 0.0;

  double conv_w(int k, int dr, int dc) const {
    return conv_weights[(static_cast<std::size_t>(k) * kKernel + dr) * kKernel +
                        dc];
  }
  double& conv_w(int k, int dr, int dc) {
    return conv_weights[(static_cast<std::size_t>(k) * kKernel + dr) * kKernel +
                        dc];
  }

  friend bool operator==(const ToyDetectorParams& a,
                         const ToyDetectorParams& b) {
    return a.channels == b.channels && a.input_side == b.input_side &&
           a.conv_weights == b.conv_weights && a.conv_bias == b.conv_bias &&
           a.linear_weights == b.linear_weights &&
           a.linear_bias == b.linear_bias;
  }
};

/// Gradients of the binary cross-entropy loss with respect to every
/// parameter, mirroring the ToyDetectorParams layout.
struct ParamGrads {
  std::vector<double> conv_weights;
  std::vector<double> conv_bias;
  std::vector<double> linear_weights;
  double linear_bias = 0.0;
};

struct ForwardTrace {
  ChannelStack activations;   // post-ReLU conv maps, K x H x W
  std::vector<double> pooled; // per-channel spatial mean, length K
  double logit = 0.0;         // pre-sigmoid z
  double score = 0.0;         // sigmoid(z)
};

struct TrainingExample {
  Image image; // single-channel, values in [0,1]
  int label = 0;
};

struct BackwardResult {
  ParamGrads loss_grads;          // d(bce)/d(params)
  GradTensor score_feature_grads; // d(score)/d(activations), for CAM
  ForwardTrace trace;
};

/// Uniform [-0.5, 0.5] scaled by 1/sqrt(fan-in), drawn in a fixed order:
/// conv weights (channel-major), conv biases, linear weights, linear bias.
ToyDetectorParams init_params(int channels, int input_side, Rng& rng);

ForwardTrace forward(const ToyDetectorParams& params, const Image& image);

BackwardResult backward(const ToyDetectorParams& params, const Image& image,
                        int label);

/// Binary cross-entropy with the score clamped to [eps, 1-eps], eps = 1e-12.
double bce_loss(double score, int label);

/// Post-ReLU conv activations paired with the score gradients at the same
/// layer; the inputs Grad-CAM consumes on this architecture.
std::pair<FeatureTensor, GradTensor> extract_cam_inputs(
    const ToyDetectorParams& params, const Image& image);

}  // namespace prle
