#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "prle/detector.hpp"
#include "prle/types.hpp"

namespace prle {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BadMagicError : IoError {
  using IoError::IoError;
};
struct BadVersionError : IoError {
  using IoError::IoError;
};
struct TruncatedFileError : IoError {
  using IoError::IoError;
};

/// On-disk tensor: "PRLE" magic, version byte 1, ndim byte (1..4), ndim
/// little-endian uint32 dims, then row-major (last dim fastest) 32-bit
/// little-endian IEEE-754 floats.
struct TensorData {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return dims.empty() ? 0 : n;
  }
};

void write_tensor(const std::filesystem::path& path, const TensorData& tensor);
TensorData read_tensor(const std::filesystem::path& path);

// Conversions between tensors and the in-memory (64-bit) domain types; file
// payloads stay 32-bit.
TensorData tensor_from_map(const Map2D& map);
Map2D map_from_tensor(const TensorData& tensor);
TensorData tensor_from_mask(const BinaryMask& mask);
BinaryMask mask_from_tensor(const TensorData& tensor);

/// Detector parameters serialize as one tensor file per field plus a JSON
/// manifest listing names and shapes.
void save_detector(const std::filesystem::path& dir,
                   const ToyDetectorParams& params);
ToyDetectorParams load_detector(const std::filesystem::path& dir);

}  // namespace prle
