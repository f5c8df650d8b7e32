#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>

#include <png.h>

#include "prle/png_io.hpp"
#include "prle/rng.hpp"
#include "prle/tensor_io.hpp"

using namespace prle;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "prle_io_tests";
  fs::create_directories(dir);
  return dir;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("tensor write/read round-trips bitwise") {
  const fs::path path = temp_dir() / "roundtrip.prle";
  std::mt19937_64 engine(17);
  std::uniform_real_distribution<float> dist(-100.0f, 100.0f);

  for (int trial = 0; trial < 50; ++trial) {
    TensorData t;
    const int ndim = 1 + static_cast<int>(engine() % 4);
    for (int d = 0; d < ndim; ++d)
      t.dims.push_back(1 + static_cast<std::uint32_t>(engine() % 5));
    t.values.resize(t.element_count());
    for (auto& v : t.values) v = dist(engine);

    write_tensor(path, t);
    const TensorData back = read_tensor(path);
    CHECK(back.dims == t.dims);
    REQUIRE(back.values.size() == t.values.size());
    for (std::size_t i = 0; i < t.values.size(); ++i)
      CHECK(back.values[i] == t.values[i]);
  }
}

TEST_CASE("tensor file layout is byte-exact for a known scalar") {
  const fs::path path = temp_dir() / "quarter.prle";
  TensorData t;
  t.dims = {1, 1};
  t.values = {0.25f};
  write_tensor(path, t);

  const std::string bytes = read_bytes(path);
  const std::string expected = {
      'P',  'R',  'L',  'E',          // magic
      0x01,                            // version
      0x02,                            // ndim
      0x01, 0x00, 0x00, 0x00,          // dim 0
      0x01, 0x00, 0x00, 0x00,          // dim 1
      0x00, 0x00, char(0x80), 0x3E,    // 0.25f little-endian
  };
  CHECK(bytes == expected);
}

TEST_CASE("tensor reader raises distinct errors per failure mode") {
  const fs::path dir = temp_dir();
  const fs::path good_path = dir / "good.prle";
  TensorData t;
  t.dims = {2, 2};
  t.values = {1.0f, 2.0f, 3.0f, 4.0f};
  write_tensor(good_path, t);
  const std::string good = read_bytes(good_path);

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  write_bytes(dir / "bad_magic.prle", bad_magic);
  CHECK_THROWS_AS(read_tensor(dir / "bad_magic.prle"), BadMagicError);

  std::string bad_version = good;
  bad_version[4] = 0x02;
  write_bytes(dir / "bad_version.prle", bad_version);
  CHECK_THROWS_AS(read_tensor(dir / "bad_version.prle"), BadVersionError);

  write_bytes(dir / "truncated.prle", good.substr(0, good.size() - 3));
  CHECK_THROWS_AS(read_tensor(dir / "truncated.prle"), TruncatedFileError);

  write_bytes(dir / "trailing.prle", good + "xx");
  CHECK_THROWS_AS(read_tensor(dir / "trailing.prle"), TruncatedFileError);

  write_bytes(dir / "short_header.prle", good.substr(0, 4));
  CHECK_THROWS_AS(read_tensor(dir / "short_header.prle"), TruncatedFileError);

  CHECK_THROWS_AS(read_tensor(dir / "missing.prle"), IoError);
}

TEST_CASE("write_tensor validates dims and payload") {
  const fs::path path = temp_dir() / "invalid.prle";
  TensorData empty_dims;
  empty_dims.values = {1.0f};
  CHECK_THROWS_AS(write_tensor(path, empty_dims), std::invalid_argument);

  TensorData five_dims;
  five_dims.dims = {1, 1, 1, 1, 1};
  five_dims.values = {1.0f};
  CHECK_THROWS_AS(write_tensor(path, five_dims), std::invalid_argument);

  TensorData mismatch;
  mismatch.dims = {2, 2};
  mismatch.values = {1.0f};
  CHECK_THROWS_AS(write_tensor(path, mismatch), std::invalid_argument);
}

TEST_CASE("map and mask tensor conversions") {
  const Map2D map = Map2D::from_rows({{0.25, 0.5}, {0.75, 1.0}});
  const TensorData t = tensor_from_map(map);
  CHECK(t.dims == std::vector<std::uint32_t>{2, 2});
  const Map2D back = map_from_tensor(t);
  CHECK(back == map); // values are exactly representable in float

  const BinaryMask mask = BinaryMask::from_rows({{0, 1}, {1, 1}});
  CHECK(mask_from_tensor(tensor_from_mask(mask)) == mask);

  TensorData not_binary;
  not_binary.dims = {1, 2};
  not_binary.values = {0.0f, 0.5f};
  CHECK_THROWS_AS(mask_from_tensor(not_binary), std::invalid_argument);

  TensorData wrong_rank;
  wrong_rank.dims = {4};
  wrong_rank.values = {1, 1, 1, 1};
  CHECK_THROWS_AS(map_from_tensor(wrong_rank), std::invalid_argument);
}

TEST_CASE("detector parameters survive a save/load round trip") {
  Rng rng(23);
  const ToyDetectorParams p = init_params(3, 16, rng);
  const fs::path dir = temp_dir() / "detector";
  save_detector(dir, p);
  const ToyDetectorParams back = load_detector(dir);

  CHECK(back.channels == p.channels);
  CHECK(back.input_side == p.input_side);
  // Payloads are 32-bit, so loaded values are the float-rounded originals.
  for (std::size_t i = 0; i < p.conv_weights.size(); ++i)
    CHECK(back.conv_weights[i] ==
          static_cast<double>(static_cast<float>(p.conv_weights[i])));
  CHECK(back.linear_bias ==
        static_cast<double>(static_cast<float>(p.linear_bias)));
}

TEST_CASE("image PNG round trip stays within the quantization bound") {
  const fs::path path = temp_dir() / "image.png";
  Rng rng(29);
  Image img(9, 7, 1);
  for (auto& v : img.values()) v = rng.unit();
  write_image_png(path, img);
  const Image back = read_image_png(path);
  REQUIRE(back.same_shape(img));
  for (std::size_t i = 0; i < img.size(); ++i)
    CHECK(std::abs(back.values()[i] - img.values()[i]) <= 1.0 / 510.0);

  // A second write of the decoded image is lossless.
  write_image_png(path, back);
  const Image again = read_image_png(path);
  CHECK(again == back);
}

TEST_CASE("RGB images round trip channel by channel") {
  const fs::path path = temp_dir() / "rgb.png";
  Rng rng(31);
  Image img(4, 5, 3);
  for (auto& v : img.values()) v = rng.unit();
  write_image_png(path, img);
  const Image back = read_image_png(path);
  CHECK(back.channels() == 3);
  for (std::size_t i = 0; i < img.size(); ++i)
    CHECK(std::abs(back.values()[i] - img.values()[i]) <= 1.0 / 510.0);
}

TEST_CASE("all-black PNG reads as a zero image") {
  const fs::path path = temp_dir() / "black.png";
  write_image_png(path, Image(3, 3, 1, 0.0));
  const Image back = read_image_png(path);
  for (double v : back.values()) CHECK(v == 0.0);
}

TEST_CASE("mask PNG export/import is exact") {
  const fs::path path = temp_dir() / "mask.png";
  const BinaryMask mask = BinaryMask::from_rows({{0, 1}, {1, 1}});
  write_mask_png(path, mask);
  CHECK(read_mask_png(path) == mask);

  // The written pixels are exactly {0, 255}.
  const Image raw = read_image_png(path);
  CHECK(raw(0, 0) == 0.0);
  CHECK(raw(0, 1) == 1.0);
  CHECK(raw(1, 0) == 1.0);

  // A gray (non-binary) PNG is rejected as a mask.
  const fs::path gray_path = temp_dir() / "gray.png";
  write_image_png(gray_path, Image(2, 2, 1, 0.5));
  CHECK_THROWS_AS(read_mask_png(gray_path), UnsupportedImageError);
}

TEST_CASE("unsupported PNG bit depths are rejected") {
  // Hand-write a 16-bit grayscale PNG through libpng.
  const fs::path path = temp_dir() / "deep.png";
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  REQUIRE(f != nullptr);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  REQUIRE(setjmp(png_jmpbuf(png)) == 0);
  png_init_io(png, f);
  png_set_IHDR(png, info, 2, 2, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::uint8_t row[4] = {0, 0, 255, 255};
  png_bytep rows[2] = {const_cast<png_bytep>(row), const_cast<png_bytep>(row)};
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);

  CHECK_THROWS_AS(read_image_png(path), UnsupportedImageError);
}

TEST_CASE("missing image files raise IoError") {
  CHECK_THROWS_AS(read_image_png(temp_dir() / "nope.png"), IoError);
}
