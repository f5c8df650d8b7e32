#include "prle/png_io.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include <png.h>

namespace prle {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FileHandle = std::unique_ptr<std::FILE, FileCloser>;

std::uint8_t quantize(double v) {
  const double clamped = std::min(1.0, std::max(0.0, v));
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

struct PngRead {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels; // row-major, interleaved
};

PngRead read_png_8bit(const std::filesystem::path& path) {
  FileHandle file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw IoError("png: cannot open " + path.string());

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png: read struct allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png: info struct allocation failed");
  }

  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png: failed to decode " + path.string());
  }

  png_init_io(png, file.get());
  png_read_info(png, info);

  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth != 8 ||
      (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_RGB)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw UnsupportedImageError(
        "png: only 8-bit grayscale or RGB supported: " + path.string());
  }

  PngRead out;
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = color_type == PNG_COLOR_TYPE_GRAY ? 1 : 3;

  const std::size_t stride =
      static_cast<std::size_t>(out.width) * out.channels;
  pixels.resize(stride * out.height);
  row_ptrs.resize(out.height);
  for (int r = 0; r < out.height; ++r) row_ptrs[r] = pixels.data() + r * stride;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  out.pixels = std::move(pixels);
  return out;
}

void write_png_8bit(const std::filesystem::path& path, int width, int height,
                    int channels, const std::vector<std::uint8_t>& pixels) {
  FileHandle file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw IoError("png: cannot open " + path.string());

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png: write struct allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png: info struct allocation failed");
  }

  std::vector<png_bytep> row_ptrs(height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: failed to encode " + path.string());
  }

  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int r = 0; r < height; ++r)
    row_ptrs[r] = const_cast<png_bytep>(pixels.data() + r * stride);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

Image read_image_png(const std::filesystem::path& path) {
  const PngRead raw = read_png_8bit(path);
  Image img(raw.height, raw.width, raw.channels);
  const double inv = 1.0 / 255.0;
  for (std::size_t i = 0; i < raw.pixels.size(); ++i)
    img.values()[i] = static_cast<double>(raw.pixels[i]) * inv;
  return img;
}

void write_image_png(const std::filesystem::path& path, const Image& image) {
  if (image.size() == 0)
    throw std::invalid_argument("write_image_png: empty image");
  std::vector<std::uint8_t> pixels(image.size());
  for (std::size_t i = 0; i < image.size(); ++i)
    pixels[i] = quantize(image.values()[i]);
  write_png_8bit(path, image.cols(), image.rows(), image.channels(), pixels);
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  if (mask.empty()) throw std::invalid_argument("write_mask_png: empty mask");
  std::vector<std::uint8_t> pixels(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i)
    pixels[i] = mask.values()[i] ? 255 : 0;
  write_png_8bit(path, mask.cols(), mask.rows(), 1, pixels);
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
  const PngRead raw = read_png_8bit(path);
  if (raw.channels != 1)
    throw UnsupportedImageError("png: mask must be grayscale: " +
                                path.string());
  BinaryMask mask(raw.height, raw.width);
  for (int r = 0; r < raw.height; ++r) {
    for (int c = 0; c < raw.width; ++c) {
      const std::uint8_t v = raw.pixels[static_cast<std::size_t>(r) * raw.width + c];
      if (v != 0 && v != 255)
        throw UnsupportedImageError("png: mask pixel is neither 0 nor 255: " +
                                    path.string());
      mask.set(r, c, v == 255 ? 1 : 0);
    }
  }
  return mask;
}

}  // namespace prle
