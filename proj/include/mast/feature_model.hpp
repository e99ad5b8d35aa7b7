#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace mast {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A C x (W*H) matrix of encoder activations, one column per spatial location.
/// Column index is y * width + x. Immutable once constructed.
class FeatureMap {
 public:
  /// Throws ShapeMismatch if data is not channels x (width*height) and
  /// NonFinite if any entry is NaN or infinite.
  FeatureMap(int channels, int width, int height, Matrix data);

  int channels() const noexcept { return channels_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int locations() const noexcept { return width_ * height_; }
  const Matrix& data() const noexcept { return data_; }

 private:
  int channels_;
  int width_;
  int height_;
  Matrix data_;
};

/// Feature vector at spatial index `index`. Throws IndexOutOfRange.
Vector column(const FeatureMap& feature_map, int index);

enum class RegionKind { UserCorrespondence, SemanticSegmentation };

/// Paired label maps. Label 0 is unlabeled; a positive label on the content
/// side corresponds to the cells carrying the same label on the style side.
struct RegionSpec {
  RegionKind kind = RegionKind::UserCorrespondence;
  std::vector<std::int32_t> content_labels;
  std::vector<std::int32_t> style_labels;
};

/// Checks label array sizes against the two location counts and that every
/// positive label appears on both sides. Returns the spec unchanged.
const RegionSpec& validate_regions(const RegionSpec& spec, int content_locations,
                                   int style_locations);
const RegionSpec& validate_regions(const RegionSpec& spec, const FeatureMap& content,
                                   const FeatureMap& style);

/// Sorted distinct positive labels of a validated spec.
std::vector<std::int32_t> region_labels(const RegionSpec& spec);

/// ‖MᵀM − I‖_F.
double orthogonality_residual(const Matrix& m);

/// Two square C x C projections into the common subspace.
struct ProjectionPair {
  Matrix p_c;
  Matrix p_s;

  ProjectionPair(Matrix content_projection, Matrix style_projection);

  static ProjectionPair identity(int channels);

  int channels() const noexcept { return static_cast<int>(p_c.rows()); }
  /// Largest of the two orthogonality residuals.
  double orthogonality_error() const;
};

}  // namespace mast
