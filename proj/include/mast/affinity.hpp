#pragma once

#include <compare>
#include <vector>

#include <Eigen/SparseCore>

#include "mast/feature_model.hpp"

namespace mast {

/// One nonzero of the binary affinity matrix: content location `content`
/// corresponds to style location `style`.
struct Correspondence {
  int content = 0;
  int style = 0;

  auto operator<=>(const Correspondence&) const = default;
};

/// Sparse binary cross-domain affinity. Entries are kept sorted and unique.
class AffinityMatrix {
 public:
  /// Throws IndexOutOfRange for entries outside the n_content x n_style grid.
  AffinityMatrix(int n_content, int n_style, std::vector<Correspondence> entries = {});

  int n_content() const noexcept { return n_content_; }
  int n_style() const noexcept { return n_style_; }
  const std::vector<Correspondence>& entries() const noexcept { return entries_; }
  int pair_count() const noexcept { return static_cast<int>(entries_.size()); }
  bool contains(Correspondence entry) const;

 private:
  int n_content_;
  int n_style_;
  std::vector<Correspondence> entries_;
};

/// U_cs = A / N together with its row sums (d_c) and column sums (d_s).
struct NormalizedAffinity {
  Eigen::SparseMatrix<double> u_cs;
  Vector d_c;
  Vector d_s;
  int pair_count = 0;
};

struct NormalizedColumns {
  FeatureMap features;
  std::vector<int> zero_columns;
};

/// Scales every column to unit Euclidean norm. All-zero columns stay zero and
/// are listed in zero_columns.
NormalizedColumns normalize_columns(const FeatureMap& feature_map);

struct KnnOptions {
  /// Worker threads for the similarity and neighbour search. Output does not
  /// depend on this value.
  int threads = 1;
};

inline constexpr int kDefaultNeighbours = 5;

/// Exact cosine k-NN affinity: (i, j) is present when content i is among the
/// k most similar content columns to style j, or style j is among the k most
/// similar style columns to content i. Ties go to the lower spatial index;
/// zero columns neither select nor get selected.
AffinityMatrix knn_affinity(const FeatureMap& content, const FeatureMap& style, int k,
                            const KnnOptions& options = {});

/// Union of `base` with the cross product of every user-drawn region pair.
AffinityMatrix merge_user_regions(const AffinityMatrix& base, const RegionSpec& spec);

/// k-NN affinity computed independently inside each labelled segmentation
/// region. Unlabelled cells and cross-label pairs never appear.
AffinityMatrix semantic_affinity(const FeatureMap& content, const FeatureMap& style, int k,
                                 const RegionSpec& spec, const KnnOptions& options = {});

/// Throws EmptyAffinity when there are no correspondences.
NormalizedAffinity normalize_affinity(const AffinityMatrix& affinity);

}  // namespace mast
