#include "mast/feature_model.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "mast/error.hpp"

namespace mast {

FeatureMap::FeatureMap(int channels, int width, int height, Matrix data)
    : channels_(channels), width_(width), height_(height), data_(std::move(data)) {
  if (channels <= 0 || width <= 0 || height <= 0) {
    fail(ErrorCode::ShapeMismatch, "feature map dimensions must be positive");
  }
  if (data_.rows() != channels || data_.cols() != static_cast<Eigen::Index>(width) * height) {
    fail(ErrorCode::ShapeMismatch,
         "feature data is " + std::to_string(data_.rows()) + "x" + std::to_string(data_.cols()) +
             ", expected " + std::to_string(channels) + "x" + std::to_string(width * height));
  }
  if (!data_.allFinite()) fail(ErrorCode::NonFinite, "feature map contains NaN or Inf");
}

Vector column(const FeatureMap& feature_map, int index) {
  if (index < 0 || index >= feature_map.locations()) {
    fail(ErrorCode::IndexOutOfRange, "column " + std::to_string(index) + " of " +
                                         std::to_string(feature_map.locations()));
  }
  return feature_map.data().col(index);
}

namespace {

std::set<std::int32_t> positive_labels(const std::vector<std::int32_t>& labels) {
  std::set<std::int32_t> out;
  for (auto label : labels) {
    if (label < 0) fail(ErrorCode::InvalidLabel, "negative label " + std::to_string(label));
    if (label > 0) out.insert(label);
  }
  return out;
}

}  // namespace

const RegionSpec& validate_regions(const RegionSpec& spec, int content_locations,
                                   int style_locations) {
  if (spec.content_labels.size() != static_cast<std::size_t>(content_locations)) {
    fail(ErrorCode::ShapeMismatch, "content label map has " +
                                       std::to_string(spec.content_labels.size()) +
                                       " cells, expected " + std::to_string(content_locations));
  }
  if (spec.style_labels.size() != static_cast<std::size_t>(style_locations)) {
    fail(ErrorCode::ShapeMismatch, "style label map has " +
                                       std::to_string(spec.style_labels.size()) +
                                       " cells, expected " + std::to_string(style_locations));
  }
  const auto content = positive_labels(spec.content_labels);
  const auto style = positive_labels(spec.style_labels);
  for (auto label : content) {
    if (!style.count(label)) {
      fail(ErrorCode::DanglingLabel, "label " + std::to_string(label) + " only in content map");
    }
  }
  for (auto label : style) {
    if (!content.count(label)) {
      fail(ErrorCode::DanglingLabel, "label " + std::to_string(label) + " only in style map");
    }
  }
  return spec;
}

const RegionSpec& validate_regions(const RegionSpec& spec, const FeatureMap& content,
                                   const FeatureMap& style) {
  return validate_regions(spec, content.locations(), style.locations());
}

std::vector<std::int32_t> region_labels(const RegionSpec& spec) {
  const auto labels = positive_labels(spec.content_labels);
  return {labels.begin(), labels.end()};
}

double orthogonality_residual(const Matrix& m) {
  return (m.transpose() * m - Matrix::Identity(m.cols(), m.cols())).norm();
}

ProjectionPair::ProjectionPair(Matrix content_projection, Matrix style_projection)
    : p_c(std::move(content_projection)), p_s(std::move(style_projection)) {
  if (p_c.rows() != p_c.cols() || p_s.rows() != p_s.cols() || p_c.rows() != p_s.rows() ||
      p_c.rows() == 0) {
    fail(ErrorCode::DimensionMismatch, "projections must be square with equal dimension");
  }
}

ProjectionPair ProjectionPair::identity(int channels) {
  return {Matrix::Identity(channels, channels), Matrix::Identity(channels, channels)};
}

double ProjectionPair::orthogonality_error() const {
  return std::max(orthogonality_residual(p_c), orthogonality_residual(p_s));
}

}  // namespace mast
