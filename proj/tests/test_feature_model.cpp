#include <doctest.h>

#include <limits>

#include "mast/error.hpp"
#include "mast/feature_model.hpp"
#include "test_util.hpp"

using testing::code_of;

using namespace mast;

namespace {

FeatureMap two_by_one() {
  Matrix data(2, 2);
  data << 1, 3,
          2, 4;
  return FeatureMap(2, 2, 1, data);
}

}  // namespace

TEST_CASE("column extracts feature vectors by spatial index") {
  const auto f = two_by_one();
  CHECK(column(f, 0) == Vector::Map(std::vector<double>{1, 2}.data(), 2));
  CHECK(column(f, 1) == Vector::Map(std::vector<double>{3, 4}.data(), 2));
  CHECK(code_of([&] { column(f, 2); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([&] { column(f, -1); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("columns reassemble the feature map") {
  Matrix data = Matrix::Random(3, 12);
  const FeatureMap f(3, 4, 3, data);
  Matrix rebuilt(3, 12);
  for (int i = 0; i < f.locations(); ++i) rebuilt.col(i) = column(f, i);
  CHECK(rebuilt == data);
}

TEST_CASE("feature map rejects bad shapes and non-finite data") {
  CHECK(code_of([] { FeatureMap(2, 2, 2, Matrix::Zero(2, 3)); }) == ErrorCode::ShapeMismatch);
  CHECK(code_of([] { FeatureMap(0, 1, 1, Matrix::Zero(0, 1)); }) == ErrorCode::ShapeMismatch);
  Matrix bad = Matrix::Zero(1, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(code_of([&] { FeatureMap(1, 2, 1, bad); }) == ErrorCode::NonFinite);
}

TEST_CASE("validate_regions") {
  RegionSpec ok{RegionKind::UserCorrespondence, {0, 1, 1, 0}, {1, 0}};
  CHECK(&validate_regions(ok, 4, 2) == &ok);
  CHECK(region_labels(ok) == std::vector<std::int32_t>{1});

  RegionSpec dangling{RegionKind::UserCorrespondence, {0, 2}, {0, 0}};
  CHECK(code_of([&] { validate_regions(dangling, 2, 2); }) == ErrorCode::DanglingLabel);

  RegionSpec style_only{RegionKind::SemanticSegmentation, {0, 0}, {3, 0}};
  CHECK(code_of([&] { validate_regions(style_only, 2, 2); }) == ErrorCode::DanglingLabel);

  RegionSpec short_content{RegionKind::UserCorrespondence, {0, 1, 1}, {1, 0}};
  CHECK(code_of([&] { validate_regions(short_content, 4, 2); }) == ErrorCode::ShapeMismatch);

  RegionSpec negative{RegionKind::UserCorrespondence, {-1, 0}, {0, 0}};
  CHECK(code_of([&] { validate_regions(negative, 2, 2); }) == ErrorCode::InvalidLabel);
}

TEST_CASE("validate_regions against feature maps") {
  const FeatureMap content(1, 2, 2, Matrix::Ones(1, 4));
  const FeatureMap style(1, 2, 1, Matrix::Ones(1, 2));
  RegionSpec spec{RegionKind::UserCorrespondence, {0, 1, 1, 0}, {1, 0}};
  CHECK_NOTHROW(validate_regions(spec, content, style));
  spec.style_labels.push_back(0);
  CHECK(code_of([&] { validate_regions(spec, content, style); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("projection pair shape and orthogonality") {
  const auto identity = ProjectionPair::identity(3);
  CHECK(identity.orthogonality_error() == 0.0);
  CHECK(code_of([] { ProjectionPair(Matrix::Identity(2, 2), Matrix::Identity(3, 3)); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([] { ProjectionPair(Matrix::Zero(2, 3), Matrix::Zero(2, 3)); }) ==
        ErrorCode::DimensionMismatch);
  const ProjectionPair scaled(2.0 * Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  CHECK(scaled.orthogonality_error() == doctest::Approx(std::sqrt(18.0)));
}
