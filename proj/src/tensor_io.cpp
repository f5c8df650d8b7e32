#include "prle/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace prle {

namespace {

constexpr char kMagic[4] = {'P', 'R', 'L', 'E'};
constexpr std::uint8_t kVersion = 1;

void put_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const TensorData& tensor) {
  if (tensor.dims.empty() || tensor.dims.size() > 4)
    throw std::invalid_argument("write_tensor: ndim must be 1..4");
  for (auto d : tensor.dims)
    if (d == 0) throw std::invalid_argument("write_tensor: zero dimension");
  if (tensor.values.size() != tensor.element_count())
    throw std::invalid_argument("write_tensor: payload/dims mismatch");

  std::string bytes;
  bytes.reserve(6 + 4 * tensor.dims.size() + 4 * tensor.values.size());
  bytes.append(kMagic, 4);
  bytes.push_back(static_cast<char>(kVersion));
  bytes.push_back(static_cast<char>(tensor.dims.size()));
  for (auto d : tensor.dims) put_u32_le(bytes, d);
  for (float v : tensor.values) put_u32_le(bytes, std::bit_cast<std::uint32_t>(v));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("write_tensor: cannot open " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write_tensor: write failed for " + path.string());
}

TensorData read_tensor(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("read_tensor: cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());

  if (bytes.size() < 6)
    throw TruncatedFileError("read_tensor: header truncated in " +
                             path.string());
  if (std::memcmp(p, kMagic, 4) != 0)
    throw BadMagicError("read_tensor: bad magic in " + path.string());
  if (p[4] != kVersion)
    throw BadVersionError("read_tensor: unsupported version " +
                          std::to_string(p[4]) + " in " + path.string());
  const std::size_t ndim = p[5];
  if (ndim < 1 || ndim > 4)
    throw BadVersionError("read_tensor: ndim outside 1..4 in " +
                          path.string());
  if (bytes.size() < 6 + 4 * ndim)
    throw TruncatedFileError("read_tensor: dims truncated in " +
                             path.string());

  TensorData tensor;
  tensor.dims.resize(ndim);
  for (std::size_t i = 0; i < ndim; ++i) {
    tensor.dims[i] = get_u32_le(p + 6 + 4 * i);
    if (tensor.dims[i] == 0)
      throw TruncatedFileError("read_tensor: zero dimension in " +
                               path.string());
  }

  const std::size_t count = tensor.element_count();
  const std::size_t expected = 6 + 4 * ndim + 4 * count;
  if (bytes.size() < expected)
    throw TruncatedFileError("read_tensor: payload truncated in " +
                             path.string());
  if (bytes.size() > expected)
    throw TruncatedFileError("read_tensor: trailing bytes in " +
                             path.string());

  tensor.values.resize(count);
  const unsigned char* payload = p + 6 + 4 * ndim;
  for (std::size_t i = 0; i < count; ++i)
    tensor.values[i] = std::bit_cast<float>(get_u32_le(payload + 4 * i));
  return tensor;
}

TensorData tensor_from_map(const Map2D& map) {
  if (map.empty()) throw std::invalid_argument("tensor_from_map: empty map");
  TensorData t;
  t.dims = {static_cast<std::uint32_t>(map.rows()),
            static_cast<std::uint32_t>(map.cols())};
  t.values.reserve(map.size());
  for (double v : map.values()) t.values.push_back(static_cast<float>(v));
  return t;
}

Map2D map_from_tensor(const TensorData& tensor) {
  if (tensor.dims.size() != 2)
    throw std::invalid_argument("map_from_tensor: tensor is not 2-D");
  Map2D map(static_cast<int>(tensor.dims[0]), static_cast<int>(tensor.dims[1]));
  for (std::size_t i = 0; i < tensor.values.size(); ++i)
    map.values()[i] = static_cast<double>(tensor.values[i]);
  return map;
}

TensorData tensor_from_mask(const BinaryMask& mask) {
  if (mask.empty()) throw std::invalid_argument("tensor_from_mask: empty mask");
  TensorData t;
  t.dims = {static_cast<std::uint32_t>(mask.rows()),
            static_cast<std::uint32_t>(mask.cols())};
  t.values.reserve(mask.size());
  for (auto v : mask.values()) t.values.push_back(v ? 1.0f : 0.0f);
  return t;
}

BinaryMask mask_from_tensor(const TensorData& tensor) {
  if (tensor.dims.size() != 2)
    throw std::invalid_argument("mask_from_tensor: tensor is not 2-D");
  BinaryMask mask(static_cast<int>(tensor.dims[0]),
                  static_cast<int>(tensor.dims[1]));
  for (std::size_t i = 0; i < tensor.values.size(); ++i) {
    const float v = tensor.values[i];
    if (v != 0.0f && v != 1.0f)
      throw std::invalid_argument("mask_from_tensor: value is not 0 or 1");
    mask.set(static_cast<int>(i) / mask.cols(),
             static_cast<int>(i) % mask.cols(), v == 1.0f ? 1 : 0);
  }
  return mask;
}

void save_detector(const std::filesystem::path& dir,
                   const ToyDetectorParams& params) {
  std::filesystem::create_directories(dir);
  const auto k = static_cast<std::uint32_t>(params.channels);

  const auto write_field = [&](const char* name,
                               std::vector<std::uint32_t> dims,
                               const std::vector<double>& values) {
    TensorData t;
    t.dims = std::move(dims);
    t.values.reserve(values.size());
    for (double v : values) t.values.push_back(static_cast<float>(v));
    write_tensor(dir / (std::string(name) + ".prle"), t);
  };

  write_field("conv_weights", {k, 1, 3, 3}, params.conv_weights);
  write_field("conv_bias", {k}, params.conv_bias);
  write_field("linear_weights", {k}, params.linear_weights);
  write_field("linear_bias", {1}, {params.linear_bias});

  nlohmann::json manifest;
  manifest["channels"] = params.channels;
  manifest["input_side"] = params.input_side;
  manifest["tensors"] = nlohmann::json::array();
  const auto add_entry = [&](const char* name, std::vector<std::uint32_t> dims) {
    manifest["tensors"].push_back(
        {{"name", name}, {"file", std::string(name) + ".prle"}, {"dims", dims}});
  };
  add_entry("conv_weights", {k, 1, 3, 3});
  add_entry("conv_bias", {k});
  add_entry("linear_weights", {k});
  add_entry("linear_bias", {1});

  std::ofstream f(dir / "manifest.json", std::ios::trunc);
  if (!f) throw IoError("save_detector: cannot open manifest in " +
                        dir.string());
  f << manifest.dump(2) << '\n';
}

ToyDetectorParams load_detector(const std::filesystem::path& dir) {
  std::ifstream f(dir / "manifest.json");
  if (!f) throw IoError("load_detector: missing manifest in " + dir.string());
  nlohmann::json manifest;
  try {
    f >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("load_detector: bad manifest in " + dir.string() + ": " +
                  e.what());
  }

  ToyDetectorParams p;
  p.channels = manifest.at("channels").get<int>();
  p.input_side = manifest.at("input_side").get<int>();
  if (p.channels < 1 || p.input_side < 1)
    throw IoError("load_detector: invalid manifest dimensions");

  const auto read_field = [&](const char* name, std::size_t expected) {
    const TensorData t = read_tensor(dir / (std::string(name) + ".prle"));
    if (t.values.size() != expected)
      throw IoError("load_detector: unexpected size for " + std::string(name));
    std::vector<double> out;
    out.reserve(expected);
    for (float v : t.values) out.push_back(static_cast<double>(v));
    return out;
  };

  const auto k = static_cast<std::size_t>(p.channels);
  p.conv_weights = read_field("conv_weights", k * 9);
  p.conv_bias = read_field("conv_bias", k);
  p.linear_weights = read_field("linear_weights", k);
  p.linear_bias = read_field("linear_bias", 1)[0];
  return p;
}

}  // namespace prle
