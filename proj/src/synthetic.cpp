#include "mast/synthetic.hpp"

#include <cmath>
#include <random>

#include "mast/error.hpp"
#include "mast/stiefel_optimizer.hpp"

namespace mast {

namespace {

LabelMap band_labels(int width, int height, int clusters) {
  LabelMap map{width, height, std::vector<std::int32_t>(static_cast<std::size_t>(width) * height)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      map.labels[static_cast<std::size_t>(y) * width + x] = 1 + (x * clusters) / width;
    }
  }
  return map;
}

Matrix clustered_features(const Matrix& centers, const LabelMap& labels, double noise,
                          std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, noise);
  Matrix out(centers.rows(), static_cast<Eigen::Index>(labels.labels.size()));
  for (Eigen::Index i = 0; i < out.cols(); ++i) {
    const int cluster = labels.labels[i] - 1;
    for (Eigen::Index c = 0; c < out.rows(); ++c) {
      out(c, i) = std::abs(centers(c, cluster) + gauss(rng));
    }
  }
  return out;
}

}  // namespace

Matrix random_rotation(int channels, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix a(channels, channels);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = gauss(rng);
  const Matrix skew = scale * (a - a.transpose());
  return cayley_retract(Matrix::Identity(channels, channels), skew, 1.0);
}

SyntheticPair make_synthetic_pair(const SyntheticOptions& o) {
  if (o.channels < 1 || o.clusters < 1 || o.clusters > std::min(o.content_width, o.style_width)) {
    fail(ErrorCode::InvalidConfig, "synthetic options out of range");
  }
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Matrix centers(o.channels, o.clusters);
  for (Eigen::Index i = 0; i < centers.size(); ++i) centers(i) = uniform(rng);

  LabelMap content_regions = band_labels(o.content_width, o.content_height, o.clusters);
  LabelMap style_regions = band_labels(o.style_width, o.style_height, o.clusters);
  Matrix content = clustered_features(centers, content_regions, o.noise, rng);
  Matrix style_raw = clustered_features(centers, style_regions, o.noise, rng);
  Matrix rotation = random_rotation(o.channels, o.rotation_scale, rng());

  return {FeatureMap(o.channels, o.content_width, o.content_height, std::move(content)),
          FeatureMap(o.channels, o.style_width, o.style_height, rotation * style_raw),
          std::move(rotation), std::move(content_regions), std::move(style_regions)};
}

}  // namespace mast
