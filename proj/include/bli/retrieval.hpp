#pragma once

#include "bli/common.hpp"

#include <span>
#include <vector>

namespace bli {

enum class Measure { Cosine, Dot };

/// Ranked results for a batch of queries: row q holds the k best target
/// indices (descending score, ties to the lower index) and their scores.
struct TopK {
  Index n_queries = 0;
  Index k = 0;
  std::vector<Index> indices;
  std::vector<double> scores;

  std::span<const Index> row(Index q) const {
    return {indices.data() + q * k, static_cast<std::size_t>(k)};
  }
  std::span<const double> row_scores(Index q) const {
    return {scores.data() + q * k, static_cast<std::size_t>(k)};
  }
};

/// Blocking of the score computation. Queries are split into fixed chunks
/// that are distributed over threads; targets are scanned in fixed blocks.
/// Neither choice changes the results.
struct RetrievalOptions {
  Index query_chunk = 64;
  Index target_block = 8192;
};

using ConstRef = Eigen::Ref<const Matrix>;

/// Exact top-k by cosine or dot product.
TopK nn_topk(const ConstRef& queries, const ConstRef& targets, Index k,
             Measure measure = Measure::Cosine, const RetrievalOptions& opts = {});

/// Hubness statistics: r_values[y] is the mean similarity of target row y to
/// its k nearest rows of source_space.
struct CslsStats {
  Vector r_values;
  Index k = 0;
  Measure measure = Measure::Cosine;
};

inline constexpr Index kCslsNeighbors = 10;

CslsStats compute_csls_stats(const ConstRef& source_space, const ConstRef& target_space,
                             Index k = kCslsNeighbors, Measure measure = Measure::Cosine,
                             const RetrievalOptions& opts = {});

/// Top-k by 2·m(x, y) − r_X(y). The query-side term r_Y(x) is constant per
/// query and left out; reported scores therefore exclude it.
TopK csls_topk(const ConstRef& queries, const ConstRef& targets, const CslsStats& stats, Index k,
               const RetrievalOptions& opts = {});

/// Row-normalized copy (parallel); throws on a zero row.
Matrix normalized_rows(const ConstRef& m);

/// cos(a, b); throws if either vector is zero.
double cosine(const RowVector& a, const RowVector& b);

}  // namespace bli
