#include "mast/job.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mast/affinity.hpp"
#include "mast/tensor_io.hpp"
#include "mast/transfer.hpp"

namespace mast {

using nlohmann::json;

std::string_view to_string(AlignmentMode mode) {
  switch (mode) {
    case AlignmentMode::Unsupervised: return "unsupervised";
    case AlignmentMode::UserEdit: return "user_edit";
    case AlignmentMode::Semantic: return "semantic";
  }
  return "unknown";
}

AlignmentMode parse_mode(std::string_view text) {
  if (text == "unsupervised") return AlignmentMode::Unsupervised;
  if (text == "user_edit") return AlignmentMode::UserEdit;
  if (text == "semantic") return AlignmentMode::Semantic;
  fail(ErrorCode::InvalidManifest, "unknown mode '" + std::string(text) + "'");
}

void JobManifest::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::InvalidManifest, what);
  };
  require(!content_features.empty(), "content_features is required");
  require(!style_features.empty(), "style_features is required");
  require(!outputs.stylized.empty(), "outputs.stylized is required");
  if (mode != AlignmentMode::Unsupervised) {
    require(content_mask && !content_mask->empty(),
            std::string(to_string(mode)) + " mode requires content_mask");
    require(style_mask && !style_mask->empty(),
            std::string(to_string(mode)) + " mode requires style_mask");
  }
  require(!bidirectional || outputs.reverse, "bidirectional requires outputs.reverse");
  require(k >= 1, "k must be positive");
  require(threads >= 1, "threads must be positive");
  solver.validate();
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
void read_if(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

}  // namespace

RegionSpec load_regions(const JobManifest& m, const FeatureMap& content, const FeatureMap& style) {
  const LabelMap content_labels = read_label_map(*m.content_mask);
  const LabelMap style_labels = read_label_map(*m.style_mask);
  if (content_labels.width != content.width() || content_labels.height != content.height()) {
    fail(ErrorCode::ShapeMismatch, m.content_mask->string() + " does not match content features");
  }
  if (style_labels.width != style.width() || style_labels.height != style.height()) {
    fail(ErrorCode::ShapeMismatch, m.style_mask->string() + " does not match style features");
  }
  RegionSpec spec{m.mode == AlignmentMode::Semantic ? RegionKind::SemanticSegmentation
                                                    : RegionKind::UserCorrespondence,
                  content_labels.labels, style_labels.labels};
  validate_regions(spec, content, style);
  return spec;
}

AffinityMatrix build_affinity(const JobManifest& manifest, const FeatureMap& content,
                              const FeatureMap& style) {
  const KnnOptions knn{manifest.threads};
  switch (manifest.mode) {
    case AlignmentMode::UserEdit:
      return merge_user_regions(knn_affinity(content, style, manifest.k, knn),
                                load_regions(manifest, content, style));
    case AlignmentMode::Semantic:
      return semantic_affinity(content, style, manifest.k, load_regions(manifest, content, style),
                               knn);
    case AlignmentMode::Unsupervised:
      break;
  }
  return knn_affinity(content, style, manifest.k, knn);
}

namespace {

json config_json(const JobManifest& m) {
  auto opt = [](const std::optional<std::filesystem::path>& p) -> json {
    return p ? json(p->string()) : json(nullptr);
  };
  return {
      {"type", "config"},
      {"content_features", m.content_features.string()},
      {"style_features", m.style_features.string()},
      {"mode", std::string(to_string(m.mode))},
      {"content_mask", opt(m.content_mask)},
      {"style_mask", opt(m.style_mask)},
      {"k", m.k},
      {"bidirectional", m.bidirectional},
      {"threads", m.threads},
      {"solver",
       {{"max_iterations", m.solver.max_iterations},
        {"epsilon", m.solver.epsilon},
        {"tau_init", m.solver.tau_init},
        {"backtrack_factor", m.solver.backtrack_factor},
        {"armijo_c1", m.solver.armijo_c1},
        {"max_backtracks", m.solver.max_backtracks},
        {"tau_growth", m.solver.tau_growth},
        {"step_rule", std::string(to_string(m.solver.step_rule))}}},
  };
}

}  // namespace

JobManifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir) {
  JobManifest m;
  try {
    const json j = json::parse(json_text);
    if (j.contains("content_features")) m.content_features = resolve(base_dir, j.at("content_features").get<std::string>());
    if (j.contains("style_features")) m.style_features = resolve(base_dir, j.at("style_features").get<std::string>());
    if (j.contains("mode")) m.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("content_mask")) m.content_mask = resolve(base_dir, j.at("content_mask").get<std::string>());
    if (j.contains("style_mask")) m.style_mask = resolve(base_dir, j.at("style_mask").get<std::string>());
    read_if(j, "k", m.k);
    read_if(j, "bidirectional", m.bidirectional);
    read_if(j, "threads", m.threads);
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      read_if(s, "max_iterations", m.solver.max_iterations);
      read_if(s, "epsilon", m.solver.epsilon);
      read_if(s, "tau_init", m.solver.tau_init);
      read_if(s, "backtrack_factor", m.solver.backtrack_factor);
      read_if(s, "armijo_c1", m.solver.armijo_c1);
      read_if(s, "max_backtracks", m.solver.max_backtracks);
      read_if(s, "tau_growth", m.solver.tau_growth);
      if (s.contains("step_rule")) m.solver.step_rule = parse_step_rule(s.at("step_rule").get<std::string>());
    }
    if (j.contains("outputs")) {
      const json& o = j.at("outputs");
      auto path_of = [&](const char* key) -> std::optional<std::filesystem::path> {
        if (!o.contains(key) || o.at(key).is_null()) return std::nullopt;
        return resolve(base_dir, o.at(key).get<std::string>());
      };
      if (auto p = path_of("stylized")) m.outputs.stylized = *p;
      m.outputs.reverse = path_of("reverse");
      m.outputs.projections = path_of("projections");
      m.outputs.affinity = path_of("affinity");
      m.outputs.report = path_of("report");
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidManifest, e.what());
  }
  return m;
}

JobManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoFailure, "cannot open manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), path.parent_path());
}

void write_report(std::ostream& out, const JobManifest& manifest, const JobResult& result) {
  const SolverReport& r = result.alignment.report;
  out << config_json(manifest).dump() << '\n';
  for (int t = 0; t < r.iterations_run; ++t) {
    out << json{{"type", "iteration"},
                {"iteration", t},
                {"objective", r.objective_trace[t]},
                {"residual_c", r.residual_c_trace[t]},
                {"residual_s", r.residual_s_trace[t]},
                {"tau_c", r.tau_trace[t].tau_c},
                {"tau_s", r.tau_trace[t].tau_s}}
               .dump()
        << '\n';
  }
  out << json{{"type", "summary"},
              {"termination", std::string(to_string(r.termination))},
              {"iterations_run", r.iterations_run},
              {"initial_objective", r.initial_objective},
              {"final_objective",
               r.objective_trace.empty() ? r.initial_objective : r.objective_trace.back()},
              {"procrustes_bound", result.procrustes_bound},
              {"pair_count", result.pair_count},
              {"stalled_iterations", r.stalled_iterations},
              {"orthogonality_error", result.alignment.pair.orthogonality_error()}}
             .dump()
      << '\n';
}

JobResult run_job(const JobManifest& manifest, std::ostream* report) {
  manifest.validate();
  const FeatureMap content = read_feature_map(manifest.content_features);
  const FeatureMap style = read_feature_map(manifest.style_features);
  const AffinityMatrix affinity = build_affinity(manifest, content, style);
  if (manifest.outputs.affinity) write_affinity(affinity, *manifest.outputs.affinity);

  const NormalizedAffinity normalized = normalize_affinity(affinity);
  const CrossKernel kernel = CrossKernel::build(content, style, normalized);
  JobResult result{align(kernel, manifest.solver), affinity.pair_count(),
                   procrustes_oracle(kernel).objective};

  write_feature_map(transfer_to_style(content, result.alignment.pair), manifest.outputs.stylized);
  if (manifest.bidirectional) {
    write_feature_map(transfer_to_content(style, result.alignment.pair), *manifest.outputs.reverse);
  }
  if (manifest.outputs.projections) {
    write_projections(result.alignment.pair, *manifest.outputs.projections);
  }
  if (manifest.outputs.report) {
    std::ofstream out(*manifest.outputs.report, std::ios::trunc);
    if (!out) fail(ErrorCode::IoFailure, "cannot open " + manifest.outputs.report->string());
    write_report(out, manifest, result);
    if (!out) fail(ErrorCode::IoFailure, "write error on " + manifest.outputs.report->string());
  }
  if (report) write_report(*report, manifest, result);
  return result;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidManifest: return 3;
    case ErrorCode::InvalidConfig: return 4;
    case ErrorCode::IoFailure: return 10;
    case ErrorCode::BadHeader: return 11;
    case ErrorCode::TruncatedPayload: return 12;
    case ErrorCode::UnsupportedDtype: return 13;
    case ErrorCode::ShapeMismatch: return 20;
    case ErrorCode::ChannelMismatch: return 21;
    case ErrorCode::DimensionMismatch: return 22;
    case ErrorCode::IndexOutOfRange: return 23;
    case ErrorCode::NonFinite: return 24;
    case ErrorCode::DanglingLabel: return 30;
    case ErrorCode::InvalidLabel: return 31;
    case ErrorCode::KTooLarge: return 32;
    case ErrorCode::KTooLargeForRegion: return 33;
    case ErrorCode::EmptyAffinity: return 40;
    case ErrorCode::NumericalFailure: return 50;
    case ErrorCode::NonOrthogonalPair: return 51;
  }
  return 1;
}

}  // namespace mast
