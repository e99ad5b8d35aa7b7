#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mast/job.hpp"
#include "mast/synthetic.hpp"
#include "mast/tensor_io.hpp"
#include "test_util.hpp"

using namespace mast;
using testing::code_of;
namespace fs = std::filesystem;

namespace {

fs::path workdir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mast_job_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<nlohmann::json> report_lines(const std::string& text) {
  std::vector<nlohmann::json> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(nlohmann::json::parse(line));
  return lines;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(MAST_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Two-cluster synthetic pair with band masks written next to it.
JobManifest synthetic_job(const fs::path& dir, std::uint64_t seed = 1) {
  SyntheticOptions options;
  options.seed = seed;
  options.channels = 8;
  options.content_width = options.style_width = 10;
  options.content_height = options.style_height = 8;
  const auto pair = make_synthetic_pair(options);
  write_feature_map(pair.content, dir / "content.mast");
  write_feature_map(pair.style, dir / "style.mast");
  write_label_map(pair.content_regions, dir / "content_mask.mast");
  write_label_map(pair.style_regions, dir / "style_mask.mast");
  JobManifest m;
  m.content_features = dir / "content.mast";
  m.style_features = dir / "style.mast";
  m.content_mask = dir / "content_mask.mast";
  m.style_mask = dir / "style_mask.mast";
  m.outputs.stylized = dir / "stylized.mast";
  m.outputs.projections = dir / "projections.mast";
  m.outputs.report = dir / "report.jsonl";
  return m;
}

}  // namespace

TEST_CASE("identity pairing through user masks reproduces the content") {
  const auto dir = workdir("identity");
  std::mt19937_64 rng(12);
  const auto f = testing::random_features(4, 3, 3, rng, true);
  write_feature_map(f, dir / "f.mast");
  LabelMap labels{3, 3, {}};
  for (int i = 0; i < 9; ++i) labels.labels.push_back(i + 1);
  write_label_map(labels, dir / "mask.mast");

  JobManifest m;
  m.content_features = m.style_features = dir / "f.mast";
  m.mode = AlignmentMode::UserEdit;
  m.content_mask = m.style_mask = dir / "mask.mast";
  m.outputs.stylized = dir / "out.mast";
  const auto result = run_job(m);
  CHECK(result.alignment.report.termination == Termination::Converged);
  CHECK(slurp(dir / "out.mast") == slurp(dir / "f.mast"));
}

TEST_CASE("synthetic two-cluster job converges with a nonincreasing objective") {
  const auto dir = workdir("two_cluster");
  for (auto mode : {AlignmentMode::Unsupervised, AlignmentMode::UserEdit, AlignmentMode::Semantic}) {
    auto m = synthetic_job(dir);
    m.mode = mode;
    m.bidirectional = true;
    m.outputs.reverse = dir / "reverse.mast";
    m.solver.max_iterations = 2000;
    const auto result = run_job(m);
    const auto lines = report_lines(slurp(*m.outputs.report));
    REQUIRE(lines.size() >= 3);
    CHECK(lines.front()["type"] == "config");
    CHECK(lines.front()["mode"] == std::string(to_string(mode)));
    CHECK(lines.back()["type"] == "summary");
    CHECK(lines.back()["termination"] == "Converged");
    double previous = lines.back()["initial_objective"];
    for (std::size_t n = 1; n + 1 < lines.size(); ++n) {
      const double objective = lines[n]["objective"];
      CHECK(objective <= previous + 1e-10);
      previous = objective;
    }
    const double bound = lines.back()["procrustes_bound"];
    CHECK(std::abs(previous - bound) <= 1e-4 * std::abs(bound));
    CHECK(result.pair_count == lines.back()["pair_count"].get<int>());
    CHECK(read_feature_map(dir / "reverse.mast").locations() == 80);
    CHECK(read_projections(*m.outputs.projections).orthogonality_error() <= 1e-8);
  }
}

TEST_CASE("manifest validation") {
  JobManifest m;
  m.content_features = "c.mast";
  m.style_features = "s.mast";
  m.outputs.stylized = "o.mast";
  CHECK_NOTHROW(m.validate());
  m.mode = AlignmentMode::Semantic;
  m.content_mask = "cm.mast";
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::InvalidManifest);
  CHECK(code_of([&] { run_job(m); }) == ErrorCode::InvalidManifest);
  m.style_mask = "sm.mast";
  CHECK_NOTHROW(m.validate());
  m.bidirectional = true;
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::InvalidManifest);
  m.bidirectional = false;
  m.k = 0;
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::InvalidManifest);
  m.k = 5;
  m.solver.epsilon = -1;
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_mode("fancy"); }) == ErrorCode::InvalidManifest);
  CHECK(code_of([] { parse_manifest("{not json", ""); }) == ErrorCode::InvalidManifest);
  CHECK(code_of([] { parse_manifest(R"({"solver": {"step_rule": "newton"}})", ""); }) ==
        ErrorCode::InvalidConfig);
}

TEST_CASE("manifest parsing resolves relative paths") {
  const auto m = parse_manifest(R"({
    "content_features": "c.mast", "style_features": "/abs/s.mast", "mode": "semantic",
    "content_mask": "cm.mast", "style_mask": "sm.mast", "k": 3, "threads": 2,
    "solver": {"max_iterations": 7, "epsilon": 1e-9, "step_rule": "growth"},
    "outputs": {"stylized": "out/o.mast", "report": "r.jsonl"}})",
                                "/jobs");
  CHECK(m.content_features == fs::path("/jobs/c.mast"));
  CHECK(m.style_features == fs::path("/abs/s.mast"));
  CHECK(m.mode == AlignmentMode::Semantic);
  CHECK(m.k == 3);
  CHECK(m.threads == 2);
  CHECK(m.solver.max_iterations == 7);
  CHECK(m.solver.epsilon == 1e-9);
  CHECK(m.solver.tau_init == 1e-2);
  CHECK(m.solver.step_rule == StepRule::Growth);
  CHECK(m.outputs.stylized == fs::path("/jobs/out/o.mast"));
  CHECK(m.outputs.report == fs::path("/jobs/r.jsonl"));
  CHECK_FALSE(m.outputs.projections.has_value());
}

TEST_CASE("jobs are deterministic across runs and thread counts") {
  const auto dir = workdir("determinism");
  auto m = synthetic_job(dir, 4);
  run_job(m);
  const std::string stylized = slurp(dir / "stylized.mast");
  const std::string report = slurp(dir / "report.jsonl");
  for (int run = 0; run < 2; ++run) {
    run_job(m);
    CHECK(slurp(dir / "stylized.mast") == stylized);
    CHECK(slurp(dir / "report.jsonl") == report);
  }
  m.threads = 4;
  run_job(m);
  CHECK(slurp(dir / "stylized.mast") == stylized);
}

TEST_CASE("CLI exit codes and flag precedence") {
  const auto dir = workdir("cli");
  const auto m = synthetic_job(dir);
  std::ofstream(dir / "job.json") << R"({"content_features": "content.mast", "style_features": "style.mast",
    "k": 3, "solver": {"max_iterations": 50, "epsilon": 1e-7},
    "outputs": {"stylized": "stylized.mast", "report": "report.jsonl"}})";

  const std::string manifest = (dir / "job.json").string();
  REQUIRE(run_cli("run " + manifest) == 0);
  auto header = report_lines(slurp(dir / "report.jsonl")).front();
  CHECK(header["k"] == 3);
  CHECK(header["solver"]["max_iterations"] == 50);
  CHECK(header["solver"]["epsilon"] == 1e-7);
  CHECK(header["solver"]["tau_init"] == 1e-2);

  REQUIRE(run_cli("run " + manifest + " --k 4 --iters 20") == 0);
  header = report_lines(slurp(dir / "report.jsonl")).front();
  CHECK(header["k"] == 4);
  CHECK(header["solver"]["max_iterations"] == 20);
  CHECK(header["solver"]["epsilon"] == 1e-7);

  CHECK(run_cli("run " + manifest + " --mode semantic") == exit_code(ErrorCode::InvalidManifest));
  CHECK(run_cli("run " + manifest + " --k 1000") == exit_code(ErrorCode::KTooLarge));
  CHECK(run_cli("run " + manifest + " --content " + (dir / "missing.mast").string()) ==
        exit_code(ErrorCode::IoFailure));
  CHECK(run_cli("run --bogus-flag") == kExitUsage);

  write_feature_map(FeatureMap(2, 2, 2, Matrix::Zero(2, 4)), dir / "zero.mast");
  CHECK(run_cli("run --content " + (dir / "zero.mast").string() + " --style " +
                (dir / "zero.mast").string() + " --k 1 --out " + (dir / "z_out.mast").string()) ==
        exit_code(ErrorCode::EmptyAffinity));
}

TEST_CASE("exit codes are distinct") {
  std::set<int> seen{kExitOk, kExitUsage};
  for (int c = 0; c <= static_cast<int>(ErrorCode::InvalidManifest); ++c) {
    CHECK(seen.insert(exit_code(static_cast<ErrorCode>(c))).second);
  }
}
