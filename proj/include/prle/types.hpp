#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace prle {

/// Row-major H x W grid of doubles. Backs raw CAMs, attention maps and
/// fused maps; range invariants are enforced by the operations that
/// produce them.
class Map2D {
 public:
  Map2D() = default;
  Map2D(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(check_dims(rows, cols), fill) {}

  static Map2D from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows[0].empty())
      throw std::invalid_argument("Map2D: empty row data");
    Map2D m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int r = 0; r < m.rows_; ++r) {
      if (static_cast<int>(rows[r].size()) != m.cols_)
        throw std::invalid_argument("Map2D: ragged row data");
      for (int c = 0; c < m.cols_; ++c) m(r, c) = rows[r][c];
    }
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double operator()(int r, int c) const { return values_[index(r, c)]; }
  double& operator()(int r, int c) { return values_[index(r, c)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_shape(const Map2D& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }
  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Map2D& a, const Map2D& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.values_ == b.values_;
  }

 private:
  static std::size_t check_dims(int rows, int cols) {
    if (rows < 1 || cols < 1)
      throw std::invalid_argument("Map2D: dimensions must be >= 1");
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
};

/// Strictly 0/1 mask over image pixels.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int rows, int cols, std::uint8_t fill = 0)
      : rows_(rows), cols_(cols),
        values_(static_cast<std::size_t>(rows) * cols, check_bit(fill)) {
    if (rows < 1 || cols < 1)
      throw std::invalid_argument("BinaryMask: dimensions must be >= 1");
  }

  static BinaryMask from_rows(const std::vector<std::vector<int>>& rows) {
    if (rows.empty() || rows[0].empty())
      throw std::invalid_argument("BinaryMask: empty row data");
    BinaryMask m(static_cast<int>(rows.size()),
                 static_cast<int>(rows[0].size()));
    for (int r = 0; r < m.rows_; ++r) {
      if (static_cast<int>(rows[r].size()) != m.cols_)
        throw std::invalid_argument("BinaryMask: ragged row data");
      for (int c = 0; c < m.cols_; ++c)
        m.set(r, c, check_bit(static_cast<std::uint8_t>(rows[r][c])));
    }
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::uint8_t operator()(int r, int c) const { return values_[index(r, c)]; }
  void set(int r, int c, std::uint8_t bit) {
    values_[index(r, c)] = check_bit(bit);
  }

  std::span<const std::uint8_t> values() const { return values_; }

  std::size_t count_ones() const {
    std::size_t n = 0;
    for (auto v : values_) n += v;
    return n;
  }

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.values_ == b.values_;
  }

 private:
  static std::uint8_t check_bit(std::uint8_t v) {
    if (v > 1) throw std::invalid_argument("BinaryMask: value must be 0 or 1");
    return v;
  }
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> values_;
};

/// K x H x W stack of per-channel maps (feature activations or their
/// score gradients), row-major with the channel slowest.
class ChannelStack {
 public:
  ChannelStack() = default;
  ChannelStack(int channels, int rows, int cols, double fill = 0.0)
      : channels_(channels), rows_(rows), cols_(cols),
        values_(static_cast<std::size_t>(channels) * rows * cols, fill) {
    if (channels < 1 || rows < 1 || cols < 1)
      throw std::invalid_argument("ChannelStack: dimensions must be >= 1");
  }

  int channels() const { return channels_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }

  double operator()(int k, int r, int c) const { return values_[index(k, r, c)]; }
  double& operator()(int k, int r, int c) { return values_[index(k, r, c)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_shape(const ChannelStack& o) const {
    return channels_ == o.channels_ && rows_ == o.rows_ && cols_ == o.cols_;
  }
  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const ChannelStack& a, const ChannelStack& b) {
    return a.channels_ == b.channels_ && a.rows_ == b.rows_ &&
           a.cols_ == b.cols_ && a.values_ == b.values_;
  }

 private:
  std::size_t index(int k, int r, int c) const {
    return (static_cast<std::size_t>(k) * rows_ + r) * cols_ + c;
  }

  int channels_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
};

/// H x W x C image with values in [0,1], channel-last storage. C is 1
/// (grayscale, the canonical demo path) or 3 (RGB).
class Image {
 public:
  Image() = default;
  Image(int rows, int cols, int channels, double fill = 0.0)
      : rows_(rows), cols_(cols), channels_(channels),
        values_(static_cast<std::size_t>(rows) * cols * channels, fill) {
    if (rows < 1 || cols < 1)
      throw std::invalid_argument("Image: dimensions must be >= 1");
    if (channels != 1 && channels != 3)
      throw std::invalid_argument("Image: channels must be 1 or 3");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int channels() const { return channels_; }
  std::size_t size() const { return values_.size(); }

  double operator()(int r, int c, int ch = 0) const {
    return values_[index(r, c, ch)];
  }
  double& operator()(int r, int c, int ch = 0) {
    return values_[index(r, c, ch)];
  }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_shape(const Image& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && channels_ == o.channels_;
  }

  friend bool operator==(const Image& a, const Image& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ &&
           a.channels_ == b.channels_ && a.values_ == b.values_;
  }

 private:
  std::size_t index(int r, int c, int ch) const {
    return (static_cast<std::size_t>(r) * cols_ + c) * channels_ + ch;
  }

  int rows_ = 0;
  int cols_ = 0;
  int channels_ = 1;
  std::vector<double> values_;
};

// Role aliases for Map2D. RawCam holds nonnegative pre-normalization CAM
// values; AttentionMap and FusedMap hold values in [0,1].
using RawCam = Map2D;
using AttentionMap = Map2D;
using FusedMap = Map2D;

using FeatureTensor = ChannelStack;
using GradTensor = ChannelStack;

}  // namespace prle
