#include "prle/fusion.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <span>
#include <stdexcept>

namespace prle {

namespace {

constexpr std::array<std::array<int, 2>, 8> kEightOffsets = {
    {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};
constexpr std::array<std::array<int, 2>, 4> kFourOffsets = {
    {{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};

std::span<const std::array<int, 2>> offsets(Neighborhood n) {
  if (n == Neighborhood::kFourConnected)
    return {kFourOffsets.data(), kFourOffsets.size()};
  return {kEightOffsets.data(), kEightOffsets.size()};
}

void check_tau1(double tau1) {
  if (!(tau1 >= 0.0 && tau1 <= 1.0))
    throw std::invalid_argument("fusion: tau1 outside [0,1]");
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0))
    throw std::invalid_argument("fusion: lambda must be >= 0");
}

bool indicator_unchecked(const ModelZooMaps& zoo, int row, int col,
                         double lambda,
                         std::span<const std::array<int, 2>> offs,
                         bool pairs_include_same_model) {
  const int rows = zoo.maps.front().rows();
  const int cols = zoo.maps.front().cols();
  const int n_maps = static_cast<int>(zoo.maps.size());
  for (int j = 0; j < n_maps; ++j) {
    for (int k = 0; k < n_maps; ++k) {
      if (!pairs_include_same_model && j == k) continue;
      const double center = zoo.maps[k](row, col);
      double sum = 0.0;
      int count = 0;
      for (const auto& off : offs) {
        const int nr = row + off[0];
        const int nc = col + off[1];
        if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
        sum += std::abs(zoo.maps[j](nr, nc) - center);
        ++count;
      }
      if (count > 0 && sum / static_cast<double>(count) > lambda) return true;
    }
  }
  return false;
}

}  // namespace

void validate_zoo(const ModelZooMaps& zoo) {
  if (zoo.maps.empty())
    throw std::invalid_argument("fusion: zoo must hold at least one map");
  for (const auto& m : zoo.maps) {
    if (!m.same_shape(zoo.maps.front()))
      throw std::invalid_argument("fusion: zoo maps differ in shape");
    for (double v : m.values())
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("fusion: attention value outside [0,1]");
  }
  if (!zoo.model_ids.empty() && zoo.model_ids.size() != zoo.maps.size())
    throw std::invalid_argument("fusion: model_ids/maps length mismatch");
}

FusedMap average_fuse(const ModelZooMaps& zoo, double tau1) {
  validate_zoo(zoo);
  check_tau1(tau1);
  const int rows = zoo.maps.front().rows();
  const int cols = zoo.maps.front().cols();
  const double inv_count = 1.0 / static_cast<double>(zoo.maps.size());

  // Per-pixel values are summed in ascending order so the result does not
  // depend on how the zoo happens to be ordered.
  std::vector<double> at_pixel(zoo.maps.size());
  FusedMap out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      for (std::size_t i = 0; i < zoo.maps.size(); ++i)
        at_pixel[i] = zoo.maps[i](r, c);
      std::sort(at_pixel.begin(), at_pixel.end());
      double sum = 0.0;
      for (double v : at_pixel) sum += v;
      const double mean = sum * inv_count;
      out(r, c) = mean > tau1 ? mean : 0.0;
    }
  }
  return out;
}

bool neighbor_indicator(const ModelZooMaps& zoo, int row, int col,
                        double lambda, Neighborhood neighborhood,
                        bool pairs_include_same_model) {
  validate_zoo(zoo);
  check_lambda(lambda);
  const int rows = zoo.maps.front().rows();
  const int cols = zoo.maps.front().cols();
  if (row < 0 || row >= rows || col < 0 || col >= cols)
    throw std::invalid_argument("neighbor_indicator: pixel out of bounds");
  return indicator_unchecked(zoo, row, col, lambda, offsets(neighborhood),
                             pairs_include_same_model);
}

FusedMap neighboring_map(const ModelZooMaps& zoo, const FusionConfig& cfg) {
  validate_zoo(zoo);
  check_lambda(cfg.lambda);
  const int rows = zoo.maps.front().rows();
  const int cols = zoo.maps.front().cols();
  const auto offs = offsets(cfg.neighborhood);

  FusedMap out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!indicator_unchecked(zoo, r, c, cfg.lambda, offs,
                               cfg.pairs_include_same_model))
        continue;
      double best = 0.0;
      for (const auto& m : zoo.maps) {
        if (cfg.include_center_in_value_max) best = std::max(best, m(r, c));
        for (const auto& off : offs) {
          const int nr = r + off[0];
          const int nc = c + off[1];
          if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
          best = std::max(best, m(nr, nc));
        }
      }
      out(r, c) = best;
    }
  }
  return out;
}

FusedMap neighboring_fuse(const ModelZooMaps& zoo, const FusionConfig& cfg) {
  FusedMap averaged = average_fuse(zoo, cfg.tau1);
  const FusedMap grown = neighboring_map(zoo, cfg);
  for (std::size_t i = 0; i < averaged.size(); ++i)
    averaged.values()[i] = std::max(averaged.values()[i], grown.values()[i]);
  return averaged;
}

FusedMap fuse(const ModelZooMaps& zoo, const FusionConfig& cfg) {
  if (cfg.strategy == FusionStrategy::kAverage)
    return average_fuse(zoo, cfg.tau1);
  return neighboring_fuse(zoo, cfg);
}

BinaryMask to_binary_mask(const FusedMap& fused) {
  if (fused.empty())
    throw std::invalid_argument("to_binary_mask: empty map");
  BinaryMask mask(fused.rows(), fused.cols());
  for (int r = 0; r < fused.rows(); ++r)
    for (int c = 0; c < fused.cols(); ++c)
      mask.set(r, c, fused(r, c) > 0.0 ? 1 : 0);
  return mask;
}

BinaryMask complement(const BinaryMask& mask) {
  if (mask.empty()) throw std::invalid_argument("complement: empty mask");
  BinaryMask out(mask.rows(), mask.cols());
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c) out.set(r, c, 1 - mask(r, c));
  return out;
}

double primary_region_ratio(const BinaryMask& mask) {
  if (mask.empty())
    throw std::invalid_argument("primary_region_ratio: empty mask");
  return 100.0 * static_cast<double>(mask.count_ones()) /
         static_cast<double>(mask.size());
}

std::string format_ratio(double percent) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", percent);
  return buf;
}

}  // namespace prle
