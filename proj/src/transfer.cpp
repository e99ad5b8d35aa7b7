#include "mast/transfer.hpp"

#include <string>

#include "mast/error.hpp"

namespace mast {

namespace {

FeatureMap apply(const FeatureMap& features, const ProjectionPair& pair, const Matrix& composite) {
  if (features.channels() != pair.channels()) {
    fail(ErrorCode::DimensionMismatch, "features have " + std::to_string(features.channels()) +
                                           " channels, projections are " +
                                           std::to_string(pair.channels()) + "x" +
                                           std::to_string(pair.channels()));
  }
  const double error = pair.orthogonality_error();
  if (!(error <= kOrthogonalityTolerance)) {
    fail(ErrorCode::NonOrthogonalPair, "orthogonality residual " + std::to_string(error));
  }
  return FeatureMap(features.channels(), features.width(), features.height(),
                    composite * features.data());
}

}  // namespace

FeatureMap transfer_to_style(const FeatureMap& content, const ProjectionPair& pair) {
  return apply(content, pair, pair.p_s * pair.p_c.transpose());
}

FeatureMap transfer_to_content(const FeatureMap& style, const ProjectionPair& pair) {
  return apply(style, pair, pair.p_c * pair.p_s.transpose());
}

}  // namespace mast
