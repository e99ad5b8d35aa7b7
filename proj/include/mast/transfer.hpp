#pragma once

#include "mast/feature_model.hpp"

namespace mast {

/// Pairs whose orthogonality residual exceeds this are rejected.
inline constexpr double kOrthogonalityTolerance = 1e-6;

/// F_cs = P_s P_cᵀ F_c. Spatial shape passes through.
FeatureMap transfer_to_style(const FeatureMap& content, const ProjectionPair& pair);

/// F_sc = P_c P_sᵀ F_s.
FeatureMap transfer_to_content(const FeatureMap& style, const ProjectionPair& pair);

}  // namespace mast
