#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mast/tensor_io.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mast;
using testing::code_of;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "mast_tensor_io_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("header layout is fixed") {
  RawTensor t{Dtype::Float32, {1, 1, 2}, {1.0, 2.0}, {}};
  const std::string bytes = serialize_tensor(t);
  const std::string expected_header("MAST\x01\x01\x03\x00", 8);
  CHECK(bytes.substr(0, 8) == expected_header);
  CHECK(bytes.size() == 8 + 3 * 8 + 2 * 4);
  CHECK(bytes.substr(8, 8) == std::string("\x01\0\0\0\0\0\0\0", 8));
  // 1.0f = 0x3f800000, little-endian
  CHECK(bytes.substr(32, 4) == std::string("\x00\x00\x80\x3f", 4));
}

TEST_CASE("[C,H,W] maps to columns y*W + x") {
  const auto fm = to_feature_map(parse_tensor(serialize_tensor({Dtype::Float32, {1, 1, 2}, {1.0, 2.0}, {}})));
  CHECK(fm.channels() == 1);
  CHECK(fm.width() == 2);
  CHECK(fm.height() == 1);
  CHECK(fm.data()(0, 0) == 1.0);
  CHECK(fm.data()(0, 1) == 2.0);

  RawTensor chw{Dtype::Float64, {2, 2, 3}, {}, {}};
  for (int n = 0; n < 12; ++n) chw.real.push_back(n);
  const auto f = to_feature_map(chw);
  for (int c = 0; c < 2; ++c) {
    for (int y = 0; y < 2; ++y) {
      for (int x = 0; x < 3; ++x) CHECK(f.data()(c, y * 3 + x) == c * 6 + y * 3 + x);
    }
  }
  CHECK(to_tensor(f, Dtype::Float64).real == chw.real);
}

TEST_CASE("malformed files") {
  const std::string good = serialize_tensor({Dtype::Float32, {2, 3}, {1, 2, 3, 4, 5, 6}, {}});
  CHECK(code_of([&] { parse_tensor(good.substr(0, good.size() - 1)); }) == ErrorCode::TruncatedPayload);
  CHECK(code_of([&] { parse_tensor(good + "x"); }) == ErrorCode::BadHeader);
  CHECK(code_of([&] { parse_tensor("NOPE" + good.substr(4)); }) == ErrorCode::BadHeader);
  CHECK(code_of([&] { parse_tensor(good.substr(0, 12)); }) == ErrorCode::BadHeader);
  std::string bad_dtype = good;
  bad_dtype[5] = 9;
  CHECK(code_of([&] { parse_tensor(bad_dtype); }) == ErrorCode::UnsupportedDtype);
  std::string no_dims = good;
  no_dims[6] = 0;
  CHECK(code_of([&] { parse_tensor(no_dims); }) == ErrorCode::BadHeader);
  CHECK(code_of([] { read_tensor("/nonexistent/mast/file"); }) == ErrorCode::IoFailure);
  CHECK(code_of([] { serialize_tensor({Dtype::Float32, {}, {}, {}}); }) == ErrorCode::ShapeMismatch);
  CHECK(code_of([] { serialize_tensor({Dtype::Float32, {3}, {1.0}, {}}); }) == ErrorCode::ShapeMismatch);
  CHECK(code_of([] { serialize_tensor({Dtype::Float32, {1}, {std::nan("")}, {}}); }) == ErrorCode::NonFinite);
  CHECK(code_of([] { to_feature_map({Dtype::Int32, {1, 1, 1}, {}, {1}}); }) == ErrorCode::UnsupportedDtype);
  CHECK(code_of([] { to_feature_map({Dtype::Float32, {2, 2}, {1, 2, 3, 4}, {}}); }) == ErrorCode::ShapeMismatch);
  CHECK(code_of([] { write_tensor({Dtype::Int32, {1}, {}, {1}}, "/nonexistent/dir/x.mast"); }) ==
        ErrorCode::IoFailure);
}

TEST_CASE("float64 narrows to nearest float32") {
  const double value = 1.0 + std::ldexp(1.0, -24);  // halfway between two floats: ties to even
  const auto back = parse_tensor(serialize_tensor({Dtype::Float32, {2}, {value, 0.1}, {}}));
  CHECK(back.real[0] == 1.0);
  CHECK(back.real[1] == static_cast<double>(0.1f));
}

TEST_CASE("read then write reproduces files byte for byte") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_int_distribution<int> label(-3, 40);
  std::normal_distribution<float> value(0.0f, 10.0f);
  for (int trial = 0; trial < 20; ++trial) {
    RawTensor t;
    t.dtype = static_cast<Dtype>(1 + trial % 3);
    const int ndim = 1 + trial % 4;
    for (int d = 0; d < ndim; ++d) t.shape.push_back(dim(rng));
    for (std::uint64_t n = 0; n < t.element_count(); ++n) {
      if (t.dtype == Dtype::Int32) {
        t.integer.push_back(label(rng));
      } else {
        t.real.push_back(value(rng));
      }
    }
    const auto path = scratch("roundtrip_" + std::to_string(trial) + ".mast");
    write_tensor(t, path);
    const std::string original = slurp(path);
    const auto copy = scratch("roundtrip_copy.mast");
    write_tensor(read_tensor(path), copy);
    CHECK(slurp(copy) == original);
  }
}

TEST_CASE("typed helpers round trip") {
  std::mt19937_64 rng(5);
  const Matrix p = oracle::random_orthogonal(7, rng);
  const ProjectionPair pair(p, p.transpose());
  write_projections(pair, scratch("proj.mast"));
  const auto back = read_projections(scratch("proj.mast"));
  CHECK(back.p_c == pair.p_c);
  CHECK(back.p_s == pair.p_s);

  const LabelMap labels{3, 2, {0, 1, 1, 2, 0, 2}};
  write_label_map(labels, scratch("labels.mast"));
  const auto lb = read_label_map(scratch("labels.mast"));
  CHECK(lb.width == 3);
  CHECK(lb.height == 2);
  CHECK(lb.labels == labels.labels);
  CHECK(code_of([&] { read_feature_map(scratch("labels.mast")); }) == ErrorCode::UnsupportedDtype);

  const AffinityMatrix a(4, 5, {{0, 4}, {3, 1}, {2, 2}});
  write_affinity(a, scratch("aff.mast"));
  CHECK(read_affinity(scratch("aff.mast"), 4, 5).entries() == a.entries());
  CHECK(code_of([&] { read_affinity(scratch("aff.mast"), 2, 2); }) == ErrorCode::IndexOutOfRange);
  write_affinity(AffinityMatrix(2, 2), scratch("empty_aff.mast"));
  CHECK(read_affinity(scratch("empty_aff.mast"), 2, 2).pair_count() == 0);
}
