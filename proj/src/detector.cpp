#include "prle/detector.hpp"

#include <cmath>
#include <stdexcept>

namespace prle {

namespace {

constexpr double kBceEps = 1e-12;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_input(const ToyDetectorParams& params, const Image& image) {
  if (params.channels < 1)
    throw std::invalid_argument("detector: channels must be >= 1");
  if (image.channels() != 1)
    throw std::invalid_argument("detector: expected a single-channel image");
  if (image.rows() != params.input_side || image.cols() != params.input_side)
    throw std::invalid_argument("detector: image side != input_side");
}

}  // namespace

ToyDetectorParams init_params(int channels, int input_side, Rng& rng) {
  if (channels < 1)
    throw std::invalid_argument("init_params: channels must be >= 1");
  if (input_side < 1)
    throw std::invalid_argument("init_params: input_side must be >= 1");

  constexpr int k2 = ToyDetectorParams::kKernel * ToyDetectorParams::kKernel;
  const double conv_scale = 1.0 / std::sqrt(static_cast<double>(k2));
  const double linear_scale = 1.0 / std::sqrt(static_cast<double>(channels));

  ToyDetectorParams p;
  p.channels = channels;
  p.input_side = input_side;
  p.conv_weights.resize(static_cast<std::size_t>(channels) * k2);
  p.conv_bias.resize(channels);
  p.linear_weights.resize(channels);
  for (auto& w : p.conv_weights) w = rng.range(-0.5, 0.5) * conv_scale;
  for (auto& b : p.conv_bias) b = rng.range(-0.5, 0.5) * conv_scale;
  for (auto& w : p.linear_weights) w = rng.range(-0.5, 0.5) * linear_scale;
  p.linear_bias = rng.range(-0.5, 0.5) * linear_scale;
  return p;
}

ForwardTrace forward(const ToyDetectorParams& params, const Image& image) {
  check_input(params, image);
  const int side = params.input_side;
  const int channels = params.channels;
  const double inv_area = 1.0 / (static_cast<double>(side) * side);

  ForwardTrace trace;
  trace.activations = ChannelStack(channels, side, side);
  trace.pooled.assign(channels, 0.0);

  for (int k = 0; k < channels; ++k) {
    double pooled_sum = 0.0;
    for (int u = 0; u < side; ++u) {
      for (int v = 0; v < side; ++v) {
        double s = params.conv_bias[k];
        for (int dr = 0; dr < 3; ++dr) {
          const int r = u + dr - 1;
          if (r < 0 || r >= side) continue;
          for (int dc = 0; dc < 3; ++dc) {
            const int c = v + dc - 1;
            if (c < 0 || c >= side) continue;
            s += params.conv_w(k, dr, dc) * image(r, c, 0);
          }
        }
        const double act = s > 0.0 ? s : 0.0;
        trace.activations(k, u, v) = act;
        pooled_sum += act;
      }
    }
    trace.pooled[k] = pooled_sum * inv_area;
  }

  double z = params.linear_bias;
  for (int k = 0; k < channels; ++k)
    z += params.linear_weights[k] * trace.pooled[k];
  trace.logit = z;
  trace.score = sigmoid(z);
  return trace;
}

double bce_loss(double score, int label) {
  if (label != 0 && label != 1)
    throw std::invalid_argument("bce_loss: label must be 0 or 1");
  const double y = std::min(1.0 - kBceEps, std::max(kBceEps, score));
  return -(label * std::log(y) + (1 - label) * std::log(1.0 - y));
}

BackwardResult backward(const ToyDetectorParams& params, const Image& image,
                        int label) {
  if (label != 0 && label != 1)
    throw std::invalid_argument("backward: label must be 0 or 1");
  BackwardResult out;
  out.trace = forward(params, image);

  const int side = params.input_side;
  const int channels = params.channels;
  const double inv_area = 1.0 / (static_cast<double>(side) * side);
  const double score = out.trace.score;

  // d(bce o sigmoid)/dz collapses to score - label.
  const double dz = score - static_cast<double>(label);
  const double dsig = score * (1.0 - score); // sigma'(z)

  out.loss_grads.conv_weights.assign(params.conv_weights.size(), 0.0);
  out.loss_grads.conv_bias.assign(channels, 0.0);
  out.loss_grads.linear_weights.assign(channels, 0.0);
  out.loss_grads.linear_bias = dz;
  out.score_feature_grads = GradTensor(channels, side, side);

  for (int k = 0; k < channels; ++k) {
    out.loss_grads.linear_weights[k] = dz * out.trace.pooled[k];

    // Loss gradient w.r.t. each post-ReLU activation is constant across
    // the map thanks to global average pooling.
    const double dact = dz * params.linear_weights[k] * inv_area;
    const double feature_grad = dsig * params.linear_weights[k] * inv_area;

    double bias_grad = 0.0;
    double* wgrad =
        &out.loss_grads.conv_weights[static_cast<std::size_t>(k) * 9];
    for (int u = 0; u < side; ++u) {
      for (int v = 0; v < side; ++v) {
        out.score_feature_grads(k, u, v) = feature_grad;
        if (out.trace.activations(k, u, v) <= 0.0) continue; // ReLU gate
        bias_grad += dact;
        for (int dr = 0; dr < 3; ++dr) {
          const int r = u + dr - 1;
          if (r < 0 || r >= side) continue;
          for (int dc = 0; dc < 3; ++dc) {
            const int c = v + dc - 1;
            if (c < 0 || c >= side) continue;
            wgrad[dr * 3 + dc] += dact * image(r, c, 0);
          }
        }
      }
    }
    out.loss_grads.conv_bias[k] = bias_grad;
  }
  return out;
}

std::pair<FeatureTensor, GradTensor> extract_cam_inputs(
    const ToyDetectorParams& params, const Image& image) {
  // Label does not enter d(score)/d(activations); 0 is arbitrary.
  BackwardResult b = backward(params, image, 0);
  return {std::move(b.trace.activations), std::move(b.score_feature_grads)};
}

}  // namespace prle
