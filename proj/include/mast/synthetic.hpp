#pragma once

#include <cstdint>

#include "mast/feature_model.hpp"
#include "mast/tensor_io.hpp"

namespace mast {

struct SyntheticOptions {
  std::uint64_t seed = 0;
  int channels = 8;
  int content_width = 8;
  int content_height = 8;
  int style_width = 8;
  int style_height = 8;
  int clusters = 2;
  /// Magnitude of the skew generator of the hidden rotation.
  double rotation_scale = 0.3;
  double noise = 0.3;
};

/// Clustered content features and style features drawn from the same
/// clusters, then rotated by a hidden orthogonal matrix. Cluster membership
/// is laid out in vertical bands so it doubles as a segmentation.
struct SyntheticPair {
  FeatureMap content;
  FeatureMap style;
  Matrix rotation;
  LabelMap content_regions;
  LabelMap style_regions;
};

SyntheticPair make_synthetic_pair(const SyntheticOptions& options);

/// Random orthogonal matrix: the Cayley transform of a random skew matrix
/// scaled by `scale`.
Matrix random_rotation(int channels, double scale, std::uint64_t seed);

}  // namespace mast
