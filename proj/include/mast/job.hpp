#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "mast/affinity.hpp"
#include "mast/error.hpp"
#include "mast/stiefel_optimizer.hpp"

namespace mast {

enum class AlignmentMode { Unsupervised, UserEdit, Semantic };

std::string_view to_string(AlignmentMode mode);
/// Accepts "unsupervised", "user_edit" and "semantic". Throws InvalidManifest.
AlignmentMode parse_mode(std::string_view text);

struct JobOutputs {
  std::filesystem::path stylized;
  std::optional<std::filesystem::path> reverse;      ///< written when bidirectional
  std::optional<std::filesystem::path> projections;
  std::optional<std::filesystem::path> affinity;
  std::optional<std::filesystem::path> report;
};

struct JobManifest {
  std::filesystem::path content_features;
  std::filesystem::path style_features;
  AlignmentMode mode = AlignmentMode::Unsupervised;
  std::optional<std::filesystem::path> content_mask;
  std::optional<std::filesystem::path> style_mask;
  int k = kDefaultNeighbours;
  SolverConfig solver;
  bool bidirectional = false;
  int threads = 1;
  JobOutputs outputs;

  /// Throws InvalidManifest (missing paths, masks absent in a mode that
  /// needs them, nonpositive k or threads) or InvalidConfig.
  void validate() const;
};

/// Reads a JSON manifest. Relative paths resolve against the manifest's
/// directory.
JobManifest load_manifest(const std::filesystem::path& path);
JobManifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir);

/// Reads and validates the manifest's masks against the feature maps.
RegionSpec load_regions(const JobManifest& manifest, const FeatureMap& content,
                        const FeatureMap& style);

/// Affinity for the manifest's mode: plain k-NN, k-NN merged with user
/// regions, or per-segment k-NN.
AffinityMatrix build_affinity(const JobManifest& manifest, const FeatureMap& content,
                              const FeatureMap& style);

struct JobResult {
  AlignResult alignment;
  int pair_count = 0;
  double procrustes_bound = 0.0;
};

/// Full feature-domain pipeline. Writes every configured output and streams
/// the report to `report` (and to outputs.report when set).
JobResult run_job(const JobManifest& manifest, std::ostream* report = nullptr);

/// Line-delimited JSON report: one config header, one line per iteration,
/// one summary line.
void write_report(std::ostream& out, const JobManifest& manifest, const JobResult& result);

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;

/// Distinct process exit status per error code.
int exit_code(ErrorCode code);

}  // namespace mast
