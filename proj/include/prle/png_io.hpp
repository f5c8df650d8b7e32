#pragma once

#include <filesystem>

#include "prle/tensor_io.hpp"
#include "prle/types.hpp"

namespace prle {

struct UnsupportedImageError : IoError {
  using IoError::IoError;
};

/// 8-bit grayscale or RGB PNG; pixel p maps to p/255.
Image read_image_png(const std::filesystem::path& path);

/// Round-to-nearest 8-bit quantization, grayscale or RGB by channel count.
void write_image_png(const std::filesystem::path& path, const Image& image);

/// Masks export as 8-bit grayscale with 0 -> 0 and 1 -> 255.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

/// Strict inverse of write_mask_png; any pixel other than 0 or 255 is
/// rejected.
BinaryMask read_mask_png(const std::filesystem::path& path);

}  // namespace prle
