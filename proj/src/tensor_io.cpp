#include "mast/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "mast/error.hpp"

namespace mast {

namespace {

constexpr char kMagic[4] = {'M', 'A', 'S', 'T'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kMaxDims = 8;

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<std::conditional_t<
      sizeof(T) == 8, std::int64_t,
      std::conditional_t<sizeof(T) == 4, std::int32_t,
                         std::conditional_t<sizeof(T) == 2, std::int16_t, std::int8_t>>>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const std::string& in, std::size_t offset) {
  using U = std::make_unsigned_t<std::conditional_t<
      sizeof(T) == 8, std::int64_t,
      std::conditional_t<sizeof(T) == 4, std::int32_t,
                         std::conditional_t<sizeof(T) == 2, std::int16_t, std::int8_t>>>>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<U>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return std::bit_cast<T>(bits);
}

std::uint64_t product(const std::vector<std::uint64_t>& shape) {
  std::uint64_t n = 1;
  for (auto d : shape) {
    if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d) {
      fail(ErrorCode::BadHeader, "shape overflows");
    }
    n *= d;
  }
  return n;
}

std::string shape_string(const std::vector<std::uint64_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

bool is_real(Dtype dtype) { return dtype == Dtype::Float32 || dtype == Dtype::Float64; }

}  // namespace

std::string_view to_string(Dtype dtype) {
  switch (dtype) {
    case Dtype::Float32: return "float32";
    case Dtype::Int32: return "int32";
    case Dtype::Float64: return "float64";
  }
  return "unknown";
}

std::size_t dtype_size(Dtype dtype) { return dtype == Dtype::Float64 ? 8 : 4; }

std::uint64_t RawTensor::element_count() const { return product(shape); }

RawTensor parse_tensor(const std::string& bytes) {
  if (bytes.size() < 8 || bytes.compare(0, 4, kMagic, 4) != 0) {
    fail(ErrorCode::BadHeader, "missing MAST magic");
  }
  if (static_cast<std::uint8_t>(bytes[4]) != kVersion) {
    fail(ErrorCode::BadHeader, "unsupported format version " +
                                   std::to_string(static_cast<std::uint8_t>(bytes[4])));
  }
  const auto code = static_cast<std::uint8_t>(bytes[5]);
  if (code < 1 || code > 3) fail(ErrorCode::UnsupportedDtype, "dtype code " + std::to_string(code));
  RawTensor tensor;
  tensor.dtype = static_cast<Dtype>(code);

  const auto ndim = get_le<std::uint16_t>(bytes, 6);
  if (ndim == 0 || ndim > kMaxDims) fail(ErrorCode::BadHeader, "ndim " + std::to_string(ndim));
  const std::size_t header = 8 + 8 * static_cast<std::size_t>(ndim);
  if (bytes.size() < header) fail(ErrorCode::BadHeader, "header truncated");
  for (std::size_t d = 0; d < ndim; ++d) tensor.shape.push_back(get_le<std::uint64_t>(bytes, 8 + 8 * d));

  const std::uint64_t count = product(tensor.shape);
  const std::size_t width = dtype_size(tensor.dtype);
  if (count > (std::numeric_limits<std::uint64_t>::max() - header) / width) {
    fail(ErrorCode::BadHeader, "shape overflows");
  }
  const std::uint64_t expected = header + count * width;
  if (bytes.size() < expected) {
    fail(ErrorCode::TruncatedPayload, "payload has " + std::to_string(bytes.size() - header) +
                                          " bytes, shape " + shape_string(tensor.shape) +
                                          " needs " + std::to_string(count * width));
  }
  if (bytes.size() > expected) fail(ErrorCode::BadHeader, "trailing bytes after payload");

  std::size_t offset = header;
  switch (tensor.dtype) {
    case Dtype::Float32:
      tensor.real.resize(count);
      for (auto& v : tensor.real) v = get_le<float>(bytes, std::exchange(offset, offset + 4));
      break;
    case Dtype::Float64:
      tensor.real.resize(count);
      for (auto& v : tensor.real) v = get_le<double>(bytes, std::exchange(offset, offset + 8));
      break;
    case Dtype::Int32:
      tensor.integer.resize(count);
      for (auto& v : tensor.integer) v = get_le<std::int32_t>(bytes, std::exchange(offset, offset + 4));
      break;
  }
  return tensor;
}

RawTensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::IoFailure, "read error on " + path.string());
  try {
    return parse_tensor(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + std::string(e.what()));
  }
}

std::string serialize_tensor(const RawTensor& tensor) {
  if (tensor.shape.empty()) fail(ErrorCode::ShapeMismatch, "tensor shape is empty");
  if (tensor.shape.size() > kMaxDims) fail(ErrorCode::ShapeMismatch, "too many dimensions");
  const std::uint64_t count = tensor.element_count();
  if (is_real(tensor.dtype) ? tensor.real.size() != count : tensor.integer.size() != count) {
    fail(ErrorCode::ShapeMismatch, "payload size does not match shape " + shape_string(tensor.shape));
  }

  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  out.push_back(static_cast<char>(tensor.dtype));
  put_le(out, static_cast<std::uint16_t>(tensor.shape.size()));
  for (auto d : tensor.shape) put_le(out, d);
  out.reserve(out.size() + count * dtype_size(tensor.dtype));
  switch (tensor.dtype) {
    case Dtype::Float32:
      for (double v : tensor.real) {
        if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "refusing to write NaN or Inf");
        put_le(out, static_cast<float>(v));
      }
      break;
    case Dtype::Float64:
      for (double v : tensor.real) {
        if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "refusing to write NaN or Inf");
        put_le(out, v);
      }
      break;
    case Dtype::Int32:
      for (auto v : tensor.integer) put_le(out, v);
      break;
  }
  return out;
}

void write_tensor(const RawTensor& tensor, const std::filesystem::path& path) {
  const std::string bytes = serialize_tensor(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) fail(ErrorCode::IoFailure, "write error on " + path.string());
}

RawTensor to_tensor(const FeatureMap& features, Dtype dtype) {
  if (!is_real(dtype)) fail(ErrorCode::UnsupportedDtype, "feature maps are stored as floats");
  RawTensor t;
  t.dtype = dtype;
  t.shape = {static_cast<std::uint64_t>(features.channels()),
             static_cast<std::uint64_t>(features.height()),
             static_cast<std::uint64_t>(features.width())};
  // [C, H, W] row-major is exactly a row-major C x (H*W) matrix.
  t.real.resize(t.element_count());
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      t.real.data(), features.channels(), features.locations()) = features.data();
  return t;
}

FeatureMap to_feature_map(const RawTensor& tensor) {
  if (!is_real(tensor.dtype)) {
    fail(ErrorCode::UnsupportedDtype, "feature map must be float32 or float64");
  }
  if (tensor.shape.size() != 3) {
    fail(ErrorCode::ShapeMismatch, "feature map must be [C, H, W], got " + shape_string(tensor.shape));
  }
  for (auto d : tensor.shape) {
    if (d == 0 || d > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
      fail(ErrorCode::ShapeMismatch, "bad feature map shape " + shape_string(tensor.shape));
    }
  }
  const int channels = static_cast<int>(tensor.shape[0]);
  const int height = static_cast<int>(tensor.shape[1]);
  const int width = static_cast<int>(tensor.shape[2]);
  Matrix data = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                               Eigen::RowMajor>>(tensor.real.data(), channels,
                                                                 static_cast<Eigen::Index>(width) * height);
  return FeatureMap(channels, width, height, std::move(data));
}

FeatureMap read_feature_map(const std::filesystem::path& path) {
  try {
    return to_feature_map(read_tensor(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ShapeMismatch || e.code() == ErrorCode::UnsupportedDtype ||
        e.code() == ErrorCode::NonFinite) {
      throw Error(e.code(), path.string() + ": " + std::string(e.what()));
    }
    throw;
  }
}

void write_feature_map(const FeatureMap& features, const std::filesystem::path& path, Dtype dtype) {
  write_tensor(to_tensor(features, dtype), path);
}

LabelMap read_label_map(const std::filesystem::path& path) {
  RawTensor t = read_tensor(path);
  if (t.dtype != Dtype::Int32) {
    fail(ErrorCode::UnsupportedDtype, path.string() + ": label map must be int32");
  }
  if (t.shape.size() != 2 || t.shape[0] == 0 || t.shape[1] == 0) {
    fail(ErrorCode::ShapeMismatch, path.string() + ": label map must be [H, W]");
  }
  return {static_cast<int>(t.shape[1]), static_cast<int>(t.shape[0]), std::move(t.integer)};
}

void write_label_map(const LabelMap& labels, const std::filesystem::path& path) {
  RawTensor t;
  t.dtype = Dtype::Int32;
  t.shape = {static_cast<std::uint64_t>(labels.height), static_cast<std::uint64_t>(labels.width)};
  t.integer = labels.labels;
  write_tensor(t, path);
}

ProjectionPair read_projections(const std::filesystem::path& path) {
  const RawTensor t = read_tensor(path);
  if (!is_real(t.dtype)) fail(ErrorCode::UnsupportedDtype, path.string() + ": projections must be float");
  if (t.shape.size() != 3 || t.shape[0] != 2 || t.shape[1] != t.shape[2] || t.shape[1] == 0) {
    fail(ErrorCode::ShapeMismatch, path.string() + ": projections must be [2, C, C], got " +
                                       shape_string(t.shape));
  }
  const auto c = static_cast<Eigen::Index>(t.shape[1]);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Matrix p_c = Eigen::Map<const RowMajor>(t.real.data(), c, c);
  Matrix p_s = Eigen::Map<const RowMajor>(t.real.data() + c * c, c, c);
  return {std::move(p_c), std::move(p_s)};
}

void write_projections(const ProjectionPair& pair, const std::filesystem::path& path, Dtype dtype) {
  if (!is_real(dtype)) fail(ErrorCode::UnsupportedDtype, "projections are stored as floats");
  const auto c = static_cast<Eigen::Index>(pair.channels());
  RawTensor t;
  t.dtype = dtype;
  t.shape = {2, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(c)};
  t.real.resize(t.element_count());
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<RowMajor>(t.real.data(), c, c) = pair.p_c;
  Eigen::Map<RowMajor>(t.real.data() + c * c, c, c) = pair.p_s;
  write_tensor(t, path);
}

AffinityMatrix read_affinity(const std::filesystem::path& path, int n_content, int n_style) {
  const RawTensor t = read_tensor(path);
  if (t.dtype != Dtype::Int32) fail(ErrorCode::UnsupportedDtype, path.string() + ": affinity must be int32");
  if (t.shape.size() != 2 || t.shape[1] != 2) {
    fail(ErrorCode::ShapeMismatch, path.string() + ": affinity must be [N, 2]");
  }
  std::vector<Correspondence> entries(t.shape[0]);
  for (std::size_t n = 0; n < entries.size(); ++n) {
    entries[n] = {t.integer[2 * n], t.integer[2 * n + 1]};
  }
  return AffinityMatrix(n_content, n_style, std::move(entries));
}

void write_affinity(const AffinityMatrix& affinity, const std::filesystem::path& path) {
  RawTensor t;
  t.dtype = Dtype::Int32;
  t.shape = {static_cast<std::uint64_t>(affinity.pair_count()), 2};
  for (const auto& e : affinity.entries()) {
    t.integer.push_back(e.content);
    t.integer.push_back(e.style);
  }
  write_tensor(t, path);
}

}  // namespace mast
