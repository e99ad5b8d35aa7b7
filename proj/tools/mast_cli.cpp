// mast: feature-space manifold alignment for style transfer.
//
//   mast synth     generate a synthetic content/style feature pair
//   mast inspect   print a tensor file's header and value statistics
//   mast affinity  build the cross-domain k-NN affinity
//   mast align     learn the orthogonal projection pair
//   mast transfer  apply a projection pair to a feature map
//   mast run       full pipeline from a JSON manifest and/or flags

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>

#include <CLI11.hpp>

#include "mast/job.hpp"
#include "mast/synthetic.hpp"
#include "mast/tensor_io.hpp"
#include "mast/transfer.hpp"

namespace {

using mast::JobManifest;

int cmd_inspect(const std::string& path) {
  const mast::RawTensor t = mast::read_tensor(path);
  std::cout << "dtype: " << mast::to_string(t.dtype) << "\nshape: [";
  for (std::size_t i = 0; i < t.shape.size(); ++i) std::cout << (i ? ", " : "") << t.shape[i];
  std::cout << "]\nelements: " << t.element_count() << '\n';
  if (t.element_count() == 0) return mast::kExitOk;
  auto stats = [](const auto& values) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double sum = std::accumulate(values.begin(), values.end(), 0.0);
    std::cout << "min: " << *lo << "\nmax: " << *hi << "\nmean: " << sum / values.size() << '\n';
  };
  if (t.dtype == mast::Dtype::Int32) {
    stats(t.integer);
  } else {
    stats(t.real);
  }
  return mast::kExitOk;
}

struct SynthArgs {
  mast::SyntheticOptions options;
  std::string content_out, style_out, content_mask_out, style_mask_out;
};

int cmd_synth(const SynthArgs& args) {
  const auto pair = mast::make_synthetic_pair(args.options);
  mast::write_feature_map(pair.content, args.content_out);
  mast::write_feature_map(pair.style, args.style_out);
  if (!args.content_mask_out.empty()) mast::write_label_map(pair.content_regions, args.content_mask_out);
  if (!args.style_mask_out.empty()) mast::write_label_map(pair.style_regions, args.style_mask_out);
  return mast::kExitOk;
}

struct PipelineFlags {
  std::string manifest;
  std::string content, style, mode, content_mask, style_mask;
  std::string stylized_out, reverse_out, projections_out, affinity_out, report_out, affinity_in;
  int k = mast::kDefaultNeighbours;
  int iters = 100;
  double epsilon = 1e-6;
  double tau_init = 1e-2;
  int threads = 1;
  bool bidirectional = false;
};

// Flags win over the manifest, which wins over built-in defaults.
JobManifest effective_manifest(const PipelineFlags& f, const CLI::App& app) {
  JobManifest m = f.manifest.empty() ? JobManifest{} : mast::load_manifest(f.manifest);
  auto given = [&](const char* name) {
    const auto* option = app.get_option_no_throw(name);
    return option != nullptr && option->count() > 0;
  };
  if (given("--content")) m.content_features = f.content;
  if (given("--style")) m.style_features = f.style;
  if (given("--mode")) m.mode = mast::parse_mode(f.mode);
  if (given("--content-mask")) m.content_mask = f.content_mask;
  if (given("--style-mask")) m.style_mask = f.style_mask;
  if (given("--k")) m.k = f.k;
  if (given("--iters")) m.solver.max_iterations = f.iters;
  if (given("--epsilon")) m.solver.epsilon = f.epsilon;
  if (given("--tau-init")) m.solver.tau_init = f.tau_init;
  if (given("--threads")) m.threads = f.threads;
  if (given("--bidirectional")) m.bidirectional = f.bidirectional;
  if (given("--out")) m.outputs.stylized = f.stylized_out;
  if (given("--reverse-out")) m.outputs.reverse = f.reverse_out;
  if (given("--projections-out")) m.outputs.projections = f.projections_out;
  if (given("--affinity-out")) m.outputs.affinity = f.affinity_out;
  if (given("--report")) m.outputs.report = f.report_out;
  return m;
}

int cmd_run(const PipelineFlags& f, const CLI::App& app) {
  const JobManifest m = effective_manifest(f, app);
  mast::run_job(m, m.outputs.report ? nullptr : &std::cout);
  return mast::kExitOk;
}

int cmd_affinity(const PipelineFlags& f, const CLI::App& app) {
  JobManifest m = effective_manifest(f, app);
  m.outputs.stylized = "-";
  m.validate();
  const auto content = mast::read_feature_map(m.content_features);
  const auto style = mast::read_feature_map(m.style_features);
  const auto affinity = mast::build_affinity(m, content, style);
  mast::write_affinity(affinity, f.affinity_out);
  std::cout << "pairs: " << affinity.pair_count() << '\n';
  return mast::kExitOk;
}

int cmd_align(const PipelineFlags& f, const CLI::App& app) {
  JobManifest m = effective_manifest(f, app);
  m.solver.validate();
  const auto content = mast::read_feature_map(m.content_features);
  const auto style = mast::read_feature_map(m.style_features);
  const auto affinity = mast::read_affinity(f.affinity_in, content.locations(), style.locations());
  const auto normalized = mast::normalize_affinity(affinity);
  const auto kernel = mast::CrossKernel::build(content, style, normalized);
  mast::JobResult result{mast::align(kernel, m.solver), affinity.pair_count(),
                         mast::procrustes_oracle(kernel).objective};
  mast::write_projections(result.alignment.pair, f.projections_out);
  if (!f.report_out.empty()) {
    std::ofstream out(f.report_out, std::ios::trunc);
    mast::write_report(out, m, result);
  } else {
    mast::write_report(std::cout, m, result);
  }
  return mast::kExitOk;
}

int cmd_transfer(const std::string& input, const std::string& projections,
                 const std::string& direction, const std::string& output) {
  const auto features = mast::read_feature_map(input);
  const auto pair = mast::read_projections(projections);
  const auto moved = direction == "to-content" ? mast::transfer_to_content(features, pair)
                                               : mast::transfer_to_style(features, pair);
  mast::write_feature_map(moved, output);
  return mast::kExitOk;
}

void add_feature_inputs(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--content", f.content, "Content feature tensor [C,H,W]");
  cmd->add_option("--style", f.style, "Style feature tensor [C,H,W]");
}

void add_affinity_flags(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--mode", f.mode, "unsupervised | user_edit | semantic")
      ->check(CLI::IsMember({"unsupervised", "user_edit", "semantic"}));
  cmd->add_option("--content-mask", f.content_mask, "Content label map [H,W] int32");
  cmd->add_option("--style-mask", f.style_mask, "Style label map [H,W] int32");
  cmd->add_option("--k", f.k, "Nearest neighbours per query")->capture_default_str();
  cmd->add_option("--threads", f.threads, "Worker threads for the neighbour search")
      ->capture_default_str();
}

void add_solver_flags(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--iters", f.iters, "Maximum solver iterations")->capture_default_str();
  cmd->add_option("--epsilon", f.epsilon, "Gradient residual tolerance")->capture_default_str();
  cmd->add_option("--tau-init", f.tau_init, "Initial curvilinear step")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manifold alignment style transfer in feature space"};
  app.require_subcommand(1);

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "Print tensor header and statistics");
  inspect->add_option("file", inspect_path)->required();

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic feature pair");
  auto& so = synth_args.options;
  synth->add_option("--seed", so.seed, "Generator seed")->capture_default_str();
  synth->add_option("--channels", so.channels)->capture_default_str();
  synth->add_option("--width", so.content_width)->capture_default_str();
  synth->add_option("--height", so.content_height)->capture_default_str();
  synth->add_option("--style-width", so.style_width)->capture_default_str();
  synth->add_option("--style-height", so.style_height)->capture_default_str();
  synth->add_option("--clusters", so.clusters)->capture_default_str();
  synth->add_option("--rotation", so.rotation_scale, "Hidden rotation scale")->capture_default_str();
  synth->add_option("--noise", so.noise)->capture_default_str();
  synth->add_option("--content-out", synth_args.content_out)->required();
  synth->add_option("--style-out", synth_args.style_out)->required();
  synth->add_option("--content-mask-out", synth_args.content_mask_out);
  synth->add_option("--style-mask-out", synth_args.style_mask_out);

  PipelineFlags aff_flags;
  auto* affinity = app.add_subcommand("affinity", "Build the cross-domain affinity");
  affinity->add_option("manifest", aff_flags.manifest, "Optional JSON job manifest");
  add_feature_inputs(affinity, aff_flags);
  add_affinity_flags(affinity, aff_flags);
  affinity->add_option("--affinity-out", aff_flags.affinity_out, "Output [N,2] int32")->required();

  PipelineFlags align_flags;
  auto* align = app.add_subcommand("align", "Learn the orthogonal projection pair");
  align->add_option("manifest", align_flags.manifest, "Optional JSON job manifest");
  add_feature_inputs(align, align_flags);
  add_solver_flags(align, align_flags);
  align->add_option("--affinity", align_flags.affinity_in, "Affinity from `affinity`")->required();
  align->add_option("--projections-out", align_flags.projections_out, "Output [2,C,C] projection pair")->required();
  align->add_option("--report", align_flags.report_out, "Report file (default stdout)");

  std::string tr_in, tr_proj, tr_dir = "to-style", tr_out;
  auto* transfer = app.add_subcommand("transfer", "Apply a projection pair");
  transfer->add_option("--input", tr_in)->required();
  transfer->add_option("--projections", tr_proj)->required();
  transfer->add_option("--direction", tr_dir)
      ->check(CLI::IsMember({"to-style", "to-content"}))
      ->capture_default_str();
  transfer->add_option("--out", tr_out)->required();

  PipelineFlags run_flags;
  auto* run = app.add_subcommand("run", "Run the full feature pipeline");
  run->add_option("manifest", run_flags.manifest, "Optional JSON job manifest");
  add_feature_inputs(run, run_flags);
  add_affinity_flags(run, run_flags);
  add_solver_flags(run, run_flags);
  run->add_flag("--bidirectional", run_flags.bidirectional, "Also write style -> content");
  run->add_option("--out", run_flags.stylized_out, "Stylized features");
  run->add_option("--reverse-out", run_flags.reverse_out, "Reverse transfer features");
  run->add_option("--projections-out", run_flags.projections_out, "Output [2,C,C] projection pair");
  run->add_option("--affinity-out", run_flags.affinity_out, "Output [N,2] int32");
  run->add_option("--report", run_flags.report_out, "Report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? mast::kExitOk : mast::kExitUsage;
  }

  try {
    if (*inspect) return cmd_inspect(inspect_path);
    if (*synth) return cmd_synth(synth_args);
    if (*affinity) return cmd_affinity(aff_flags, *affinity);
    if (*align) return cmd_align(align_flags, *align);
    if (*transfer) return cmd_transfer(tr_in, tr_proj, tr_dir, tr_out);
    if (*run) return cmd_run(run_flags, *run);
  } catch (const mast::Error& e) {
    std::cerr << "mast: " << e.what() << '\n';
    if (e.code() == mast::ErrorCode::EmptyAffinity) {
      std::cerr << "mast: no content/style correspondences were found; check k, masks and "
                   "that the features are not all zero\n";
    }
    return mast::exit_code(e.code());
  }
  return mast::kExitUsage;
}
