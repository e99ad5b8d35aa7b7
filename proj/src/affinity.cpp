#include "mast/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <thread>

#include "mast/error.hpp"

namespace mast {

AffinityMatrix::AffinityMatrix(int n_content, int n_style, std::vector<Correspondence> entries)
    : n_content_(n_content), n_style_(n_style), entries_(std::move(entries)) {
  if (n_content <= 0 || n_style <= 0) {
    fail(ErrorCode::ShapeMismatch, "affinity dimensions must be positive");
  }
  for (const auto& e : entries_) {
    if (e.content < 0 || e.content >= n_content || e.style < 0 || e.style >= n_style) {
      fail(ErrorCode::IndexOutOfRange, "affinity entry (" + std::to_string(e.content) + ", " +
                                           std::to_string(e.style) + ") outside " +
                                           std::to_string(n_content) + "x" +
                                           std::to_string(n_style));
    }
  }
  std::sort(entries_.begin(), entries_.end());
  entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
}

bool AffinityMatrix::contains(Correspondence entry) const {
  return std::binary_search(entries_.begin(), entries_.end(), entry);
}

NormalizedColumns normalize_columns(const FeatureMap& feature_map) {
  const Matrix& in = feature_map.data();
  Matrix out(in.rows(), in.cols());
  std::vector<int> zeros;
  for (Eigen::Index i = 0; i < in.cols(); ++i) {
    double sum_sq = 0.0;
    for (Eigen::Index c = 0; c < in.rows(); ++c) sum_sq += in(c, i) * in(c, i);
    const double norm = std::sqrt(sum_sq);
    if (norm == 0.0) {
      out.col(i).setZero();
      zeros.push_back(static_cast<int>(i));
      continue;
    }
    for (Eigen::Index c = 0; c < in.rows(); ++c) out(c, i) = in(c, i) / norm;
  }
  return {FeatureMap(feature_map.channels(), feature_map.width(), feature_map.height(),
                     std::move(out)),
          std::move(zeros)};
}

namespace {

// Runs fn(begin, end) over [0, count) split into contiguous chunks.
template <typename Fn>
void parallel_chunks(int count, int threads, Fn&& fn) {
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads == 1) {
    fn(0, count);
    return;
  }
  std::vector<std::jthread> workers;
  const int chunk = (count + threads - 1) / threads;
  for (int begin = 0; begin < count; begin += chunk) {
    workers.emplace_back([&fn, begin, end = std::min(count, begin + chunk)] { fn(begin, end); });
  }
}

// Neighbour search restricted to the given (ascending) index subsets of
// unit-normalised columns. Zero columns are excluded from both roles.
class SubsetKnn {
 public:
  SubsetKnn(const NormalizedColumns& content, const NormalizedColumns& style,
            std::vector<int> content_ids, std::vector<int> style_ids)
      : content_(content.features.data()), style_(style.features.data()) {
    content_ids_ = drop_zero(std::move(content_ids), content.zero_columns);
    style_ids_ = drop_zero(std::move(style_ids), style.zero_columns);
  }

  std::vector<Correspondence> run(int k, int threads) const {
    const int nc = static_cast<int>(content_ids_.size());
    const int ns = static_cast<int>(style_ids_.size());
    if (nc == 0 || ns == 0) return {};

    // similarity(a, b), a over content_ids_, b over style_ids_, row-major.
    std::vector<double> similarity(static_cast<std::size_t>(nc) * ns);
    const Eigen::Index channels = content_.rows();
    parallel_chunks(nc, threads, [&](int begin, int end) {
      for (int a = begin; a < end; ++a) {
        const double* u = content_.col(content_ids_[a]).data();
        for (int b = 0; b < ns; ++b) {
          const double* v = style_.col(style_ids_[b]).data();
          double dot = 0.0;
          for (Eigen::Index c = 0; c < channels; ++c) dot += u[c] * v[c];
          similarity[static_cast<std::size_t>(a) * ns + b] = dot;
        }
      }
    });

    // Queries 0..ns-1 are style columns searching content, then nc content
    // columns searching style. Each query owns its output slot.
    const int queries = ns + nc;
    std::vector<std::vector<Correspondence>> found(queries);
    parallel_chunks(queries, threads, [&](int begin, int end) {
      std::vector<int> order;
      for (int q = begin; q < end; ++q) {
        const bool style_query = q < ns;
        const int self = style_query ? q : q - ns;
        const int candidates = style_query ? nc : ns;
        auto sim = [&](int other) {
          return style_query ? similarity[static_cast<std::size_t>(other) * ns + self]
                             : similarity[static_cast<std::size_t>(self) * ns + other];
        };
        order.resize(candidates);
        for (int i = 0; i < candidates; ++i) order[i] = i;
        const int take = std::min(k, candidates);
        std::partial_sort(order.begin(), order.begin() + take, order.end(), [&](int l, int r) {
          const double sl = sim(l), sr = sim(r);
          return sl != sr ? sl > sr : l < r;
        });
        auto& out = found[q];
        out.reserve(take);
        for (int i = 0; i < take; ++i) {
          out.push_back(style_query ? Correspondence{content_ids_[order[i]], style_ids_[self]}
                                    : Correspondence{content_ids_[self], style_ids_[order[i]]});
        }
      }
    });

    std::vector<Correspondence> entries;
    for (auto& f : found) entries.insert(entries.end(), f.begin(), f.end());
    return entries;
  }

 private:
  static std::vector<int> drop_zero(std::vector<int> ids, const std::vector<int>& zeros) {
    std::erase_if(ids, [&](int id) { return std::binary_search(zeros.begin(), zeros.end(), id); });
    return ids;
  }

  const Matrix& content_;
  const Matrix& style_;
  std::vector<int> content_ids_;
  std::vector<int> style_ids_;
};

std::vector<int> iota_ids(int n) {
  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = i;
  return ids;
}

void check_channels(const FeatureMap& content, const FeatureMap& style) {
  if (content.channels() != style.channels()) {
    fail(ErrorCode::ChannelMismatch, "content has " + std::to_string(content.channels()) +
                                         " channels, style has " +
                                         std::to_string(style.channels()));
  }
}

void check_k(int k) {
  if (k < 1) fail(ErrorCode::InvalidConfig, "k must be positive, got " + std::to_string(k));
}

}  // namespace

AffinityMatrix knn_affinity(const FeatureMap& content, const FeatureMap& style, int k,
                            const KnnOptions& options) {
  check_channels(content, style);
  check_k(k);
  if (k > std::min(content.locations(), style.locations())) {
    fail(ErrorCode::KTooLarge, "k = " + std::to_string(k) + " exceeds min(" +
                                   std::to_string(content.locations()) + ", " +
                                   std::to_string(style.locations()) + ")");
  }
  const auto cn = normalize_columns(content);
  const auto sn = normalize_columns(style);
  SubsetKnn search(cn, sn, iota_ids(content.locations()), iota_ids(style.locations()));
  return AffinityMatrix(content.locations(), style.locations(), search.run(k, options.threads));
}

AffinityMatrix merge_user_regions(const AffinityMatrix& base, const RegionSpec& spec) {
  validate_regions(spec, base.n_content(), base.n_style());
  std::map<std::int32_t, std::vector<int>> style_cells;
  for (int j = 0; j < base.n_style(); ++j) {
    if (spec.style_labels[j] > 0) style_cells[spec.style_labels[j]].push_back(j);
  }
  std::vector<Correspondence> entries = base.entries();
  for (int i = 0; i < base.n_content(); ++i) {
    const auto label = spec.content_labels[i];
    if (label <= 0) continue;
    for (int j : style_cells[label]) entries.push_back({i, j});
  }
  return AffinityMatrix(base.n_content(), base.n_style(), std::move(entries));
}

AffinityMatrix semantic_affinity(const FeatureMap& content, const FeatureMap& style, int k,
                                 const RegionSpec& spec, const KnnOptions& options) {
  check_channels(content, style);
  check_k(k);
  validate_regions(spec, content, style);

  std::map<std::int32_t, std::pair<std::vector<int>, std::vector<int>>> regions;
  for (int i = 0; i < content.locations(); ++i) {
    if (spec.content_labels[i] > 0) regions[spec.content_labels[i]].first.push_back(i);
  }
  for (int j = 0; j < style.locations(); ++j) {
    if (spec.style_labels[j] > 0) regions[spec.style_labels[j]].second.push_back(j);
  }
  for (const auto& [label, cells] : regions) {
    const auto smaller = std::min(cells.first.size(), cells.second.size());
    if (static_cast<std::size_t>(k) > smaller) {
      fail(ErrorCode::KTooLargeForRegion, "k = " + std::to_string(k) + " exceeds the " +
                                              std::to_string(smaller) +
                                              " cells of region label " + std::to_string(label));
    }
  }

  const auto cn = normalize_columns(content);
  const auto sn = normalize_columns(style);
  std::vector<Correspondence> entries;
  for (auto& [label, cells] : regions) {
    SubsetKnn search(cn, sn, cells.first, cells.second);
    auto found = search.run(k, options.threads);
    entries.insert(entries.end(), found.begin(), found.end());
  }
  return AffinityMatrix(content.locations(), style.locations(), std::move(entries));
}

NormalizedAffinity normalize_affinity(const AffinityMatrix& affinity) {
  const int n = affinity.pair_count();
  if (n == 0) {
    fail(ErrorCode::EmptyAffinity,
         "affinity has no correspondences; the content and style features share no neighbours");
  }
  const double weight = 1.0 / n;
  NormalizedAffinity out;
  out.pair_count = n;
  out.u_cs.resize(affinity.n_content(), affinity.n_style());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n);
  std::vector<int> row_count(affinity.n_content(), 0), col_count(affinity.n_style(), 0);
  for (const auto& e : affinity.entries()) {
    triplets.emplace_back(e.content, e.style, weight);
    ++row_count[e.content];
    ++col_count[e.style];
  }
  out.u_cs.setFromTriplets(triplets.begin(), triplets.end());
  out.d_c.resize(affinity.n_content());
  out.d_s.resize(affinity.n_style());
  for (int i = 0; i < affinity.n_content(); ++i) out.d_c(i) = row_count[i] * weight;
  for (int j = 0; j < affinity.n_style(); ++j) out.d_s(j) = col_count[j] * weight;
  return out;
}

}  // namespace mast
