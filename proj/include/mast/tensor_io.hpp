#pragma once

// Tensor file layout (all integers little-endian):
//
//   offset  size       field
//   0       4          magic "MAST"
//   4       1          format version, currently 1
//   5       1          dtype: 1 = float32, 2 = int32, 3 = float64
//   6       2          ndim (uint16, 1..8)
//   8       8 * ndim   dims (uint64 each), outermost first
//   ...                payload: product(dims) elements, row-major, little-endian
//
// Nothing may follow the payload. Feature maps are stored as [C, H, W],
// label maps as [H, W], projection pairs as [2, C, C] (P_c then P_s) and
// affinities as int32 [N, 2] rows of (content index, style index).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mast/affinity.hpp"
#include "mast/feature_model.hpp"

namespace mast {

enum class Dtype : std::uint8_t { Float32 = 1, Int32 = 2, Float64 = 3 };

std::string_view to_string(Dtype dtype);
std::size_t dtype_size(Dtype dtype);

/// Decoded tensor. Float payloads are promoted to double in `real`; int32
/// payloads land in `integer`. Exactly one of the two is populated.
struct RawTensor {
  Dtype dtype = Dtype::Float32;
  std::vector<std::uint64_t> shape;
  std::vector<double> real;
  std::vector<std::int32_t> integer;

  std::uint64_t element_count() const;
};

struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;  ///< index y * width + x
};

/// Throws BadHeader, UnsupportedDtype, TruncatedPayload or IoFailure.
RawTensor read_tensor(const std::filesystem::path& path);
RawTensor parse_tensor(const std::string& bytes);

/// Doubles are narrowed to float32 with round-to-nearest-even when the dtype
/// asks for it. Throws ShapeMismatch for an empty shape, NonFinite, IoFailure.
void write_tensor(const RawTensor& tensor, const std::filesystem::path& path);
std::string serialize_tensor(const RawTensor& tensor);

FeatureMap read_feature_map(const std::filesystem::path& path);
void write_feature_map(const FeatureMap& features, const std::filesystem::path& path,
                       Dtype dtype = Dtype::Float32);
RawTensor to_tensor(const FeatureMap& features, Dtype dtype = Dtype::Float32);
FeatureMap to_feature_map(const RawTensor& tensor);

LabelMap read_label_map(const std::filesystem::path& path);
void write_label_map(const LabelMap& labels, const std::filesystem::path& path);

/// Projections default to float64 on disk so the orthogonality check in the
/// transfer step still holds after a round trip.
ProjectionPair read_projections(const std::filesystem::path& path);
void write_projections(const ProjectionPair& pair, const std::filesystem::path& path,
                       Dtype dtype = Dtype::Float64);

AffinityMatrix read_affinity(const std::filesystem::path& path, int n_content, int n_style);
void write_affinity(const AffinityMatrix& affinity, const std::filesystem::path& path);

}  // namespace mast
