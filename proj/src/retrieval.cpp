#include "bli/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bli {
namespace {

struct Scored {
  double score;
  Index index;
};

// Total order: higher score first, then lower index.
inline bool better(const Scored& a, const Scored& b) {
  return a.score > b.score || (a.score == b.score && a.index < b.index);
}

// Bounded heap whose front is the worst retained candidate.
class TopKHeap {
 public:
  explicit TopKHeap(Index k) : k_(static_cast<std::size_t>(k)) { items_.reserve(k_); }

  void offer(double score, Index index) {
    const Scored c{score, index};
    if (items_.size() < k_) {
      items_.push_back(c);
      std::push_heap(items_.begin(), items_.end(), better);
    } else if (better(c, items_.front())) {
      std::pop_heap(items_.begin(), items_.end(), better);
      items_.back() = c;
      std::push_heap(items_.begin(), items_.end(), better);
    }
  }

  void write_sorted(Index* idx, double* score) {
    std::sort_heap(items_.begin(), items_.end(), better);
    for (std::size_t i = 0; i < items_.size(); ++i) {
      idx[i] = items_[i].index;
      score[i] = items_[i].score;
    }
  }

 private:
  std::size_t k_;
  std::vector<Scored> items_;
};

// score(q, t) = scale·<q, t> − bias[t] (bias optional).
TopK blocked_topk(const ConstRef& queries, const ConstRef& targets, Index k, double scale,
                  const Vector* bias, const RetrievalOptions& opts) {
  if (k <= 0) throw Error("top-k retrieval: k must be positive");
  if (queries.cols() != targets.cols()) {
    throw Error("top-k retrieval: query dim " + std::to_string(queries.cols()) +
                " != target dim " + std::to_string(targets.cols()));
  }
  if (k > targets.rows()) {
    throw Error("top-k retrieval: k=" + std::to_string(k) + " exceeds target count " +
                std::to_string(targets.rows()));
  }
  const Index chunk = std::max<Index>(1, opts.query_chunk);
  const Index tblock = std::max<Index>(1, opts.target_block);
  TopK out;
  out.n_queries = queries.rows();
  out.k = k;
  out.indices.resize(static_cast<std::size_t>(out.n_queries * k));
  out.scores.resize(out.indices.size());

  const Index n_chunks = (queries.rows() + chunk - 1) / chunk;
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (Index c = 0; c < n_chunks; ++c) {
    const Index q0 = c * chunk;
    const Index nq = std::min(chunk, queries.rows() - q0);
    std::vector<TopKHeap> heaps(static_cast<std::size_t>(nq), TopKHeap(k));
    Matrix block_scores;
    for (Index t0 = 0; t0 < targets.rows(); t0 += tblock) {
      const Index nt = std::min(tblock, targets.rows() - t0);
      block_scores.noalias() = queries.middleRows(q0, nq) * targets.middleRows(t0, nt).transpose();
      for (Index i = 0; i < nq; ++i) {
        auto& heap = heaps[static_cast<std::size_t>(i)];
        for (Index j = 0; j < nt; ++j) {
          double s = scale * block_scores(i, j);
          if (bias) s -= (*bias)(t0 + j);
          heap.offer(s, t0 + j);
        }
      }
    }
    for (Index i = 0; i < nq; ++i) {
      const auto off = static_cast<std::size_t>((q0 + i) * k);
      heaps[static_cast<std::size_t>(i)].write_sorted(out.indices.data() + off,
                                                      out.scores.data() + off);
    }
  }
  return out;
}

}  // namespace

Matrix normalized_rows(const ConstRef& m) {
  Matrix out(m.rows(), m.cols());
  bool zero_row = false;
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n == 0.0 || !std::isfinite(n)) {
#pragma omp atomic write
      zero_row = true;
    } else {
      out.row(i) = m.row(i) / n;
    }
  }
  if (zero_row) throw Error("cannot normalize a zero or non-finite row");
  return out;
}

double cosine(const RowVector& a, const RowVector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error("cosine of a zero vector");
  return a.dot(b) / (na * nb);
}

TopK nn_topk(const ConstRef& queries, const ConstRef& targets, Index k, Measure measure,
             const RetrievalOptions& opts) {
  if (measure == Measure::Dot) return blocked_topk(queries, targets, k, 1.0, nullptr, opts);
  const Matrix qn = normalized_rows(queries);
  const Matrix tn = normalized_rows(targets);
  return blocked_topk(qn, tn, k, 1.0, nullptr, opts);
}

CslsStats compute_csls_stats(const ConstRef& source_space, const ConstRef& target_space, Index k,
                             Measure measure, const RetrievalOptions& opts) {
  if (k <= 0) throw Error("CSLS: k must be positive");
  if (k >= source_space.rows()) {
    throw Error("CSLS: k=" + std::to_string(k) + " must be smaller than the source vocabulary (" +
                std::to_string(source_space.rows()) + ")");
  }
  const TopK nn = nn_topk(target_space, source_space, k, measure, opts);
  CslsStats stats;
  stats.k = k;
  stats.measure = measure;
  stats.r_values.resize(target_space.rows());
  for (Index y = 0; y < target_space.rows(); ++y) {
    double sum = 0.0;
    for (double s : nn.row_scores(y)) sum += s;
    stats.r_values(y) = sum / static_cast<double>(k);
  }
  return stats;
}

TopK csls_topk(const ConstRef& queries, const ConstRef& targets, const CslsStats& stats, Index k,
               const RetrievalOptions& opts) {
  if (stats.r_values.size() != targets.rows()) {
    throw Error("CSLS: statistics cover " + std::to_string(stats.r_values.size()) +
                " targets, retrieval has " + std::to_string(targets.rows()));
  }
  if (stats.measure == Measure::Dot) return blocked_topk(queries, targets, k, 2.0, &stats.r_values, opts);
  const Matrix qn = normalized_rows(queries);
  const Matrix tn = normalized_rows(targets);
  return blocked_topk(qn, tn, k, 2.0, &stats.r_values, opts);
}

}  // namespace bli
