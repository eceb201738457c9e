#include "bli/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace bli::reference {
namespace {

double dot(const Matrix& a, Index i, const Matrix& b, Index j) {
  double s = 0.0;
  for (Index c = 0; c < a.cols(); ++c) s += a(i, c) * b(j, c);
  return s;
}

double norm(const Matrix& a, Index i) { return std::sqrt(dot(a, i, a, i)); }

double similarity(const Matrix& a, Index i, const Matrix& b, Index j, Measure m) {
  const double d = dot(a, i, b, j);
  return m == Measure::Dot ? d : d / (norm(a, i) * norm(b, j));
}

// Sorts all targets for one query and keeps the first k.
void rank_row(const std::vector<double>& scores, Index k, TopK& out, Index q) {
  std::vector<Index> order(scores.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double sa = scores[static_cast<std::size_t>(a)], sb = scores[static_cast<std::size_t>(b)];
    return sa > sb || (sa == sb && a < b);
  });
  for (Index r = 0; r < k; ++r) {
    out.indices[static_cast<std::size_t>(q * k + r)] = order[static_cast<std::size_t>(r)];
    out.scores[static_cast<std::size_t>(q * k + r)] =
        scores[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
  }
}

TopK make_topk(Index n_queries, Index k) {
  TopK t;
  t.n_queries = n_queries;
  t.k = k;
  t.indices.resize(static_cast<std::size_t>(n_queries * k));
  t.scores.resize(t.indices.size());
  return t;
}

}  // namespace

Matrix apply_map(const Matrix& m, const Matrix& w) {
  if (m.cols() != w.rows()) throw Error("reference::apply_map: shape mismatch");
  Matrix out = Matrix::Zero(m.rows(), w.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < w.cols(); ++j) {
      double s = 0.0;
      for (Index c = 0; c < m.cols(); ++c) s += m(i, c) * w(c, j);
      out(i, j) = s;
    }
  return out;
}

TopK nn_topk(const Matrix& queries, const Matrix& targets, Index k, Measure measure) {
  if (k <= 0 || k > targets.rows()) throw Error("reference::nn_topk: bad k");
  TopK out = make_topk(queries.rows(), k);
  std::vector<double> scores(static_cast<std::size_t>(targets.rows()));
  for (Index q = 0; q < queries.rows(); ++q) {
    for (Index t = 0; t < targets.rows(); ++t) {
      scores[static_cast<std::size_t>(t)] = similarity(queries, q, targets, t, measure);
    }
    rank_row(scores, k, out, q);
  }
  return out;
}

CslsStats compute_csls_stats(const Matrix& source_space, const Matrix& target_space, Index k,
                             Measure measure) {
  if (k <= 0 || k >= source_space.rows()) throw Error("reference::compute_csls_stats: bad k");
  CslsStats stats;
  stats.k = k;
  stats.measure = measure;
  stats.r_values.resize(target_space.rows());
  std::vector<double> sims(static_cast<std::size_t>(source_space.rows()));
  for (Index y = 0; y < target_space.rows(); ++y) {
    for (Index x = 0; x < source_space.rows(); ++x) {
      sims[static_cast<std::size_t>(x)] = similarity(target_space, y, source_space, x, measure);
    }
    std::sort(sims.begin(), sims.end(), std::greater<>());
    double s = 0.0;
    for (Index i = 0; i < k; ++i) s += sims[static_cast<std::size_t>(i)];
    stats.r_values(y) = s / static_cast<double>(k);
  }
  return stats;
}

TopK csls_topk(const Matrix& queries, const Matrix& targets, const CslsStats& stats, Index k) {
  if (k <= 0 || k > targets.rows()) throw Error("reference::csls_topk: bad k");
  TopK out = make_topk(queries.rows(), k);
  std::vector<double> scores(static_cast<std::size_t>(targets.rows()));
  for (Index q = 0; q < queries.rows(); ++q) {
    for (Index t = 0; t < targets.rows(); ++t) {
      scores[static_cast<std::size_t>(t)] =
          2.0 * similarity(queries, q, targets, t, stats.measure) - stats.r_values(t);
    }
    rank_row(scores, k, out, q);
  }
  return out;
}

NegativePool mine_hard_negatives(const BilingualDictionary& dict, const Matrix& x_mapped,
                                 const Matrix& y_mapped, Index n_neg) {
  NegativePool pool;
  pool.n_neg = n_neg;
  for (const auto& p : dict.pairs()) {
    auto nearest = [&](const Matrix& space, const Matrix& query_space, Index query, Index exclude) {
      std::vector<std::pair<double, Index>> c;
      for (Index j = 0; j < space.rows(); ++j) {
        if (j == exclude) continue;
        c.emplace_back(similarity(query_space, query, space, j, Measure::Cosine), j);
      }
      std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
      });
      std::vector<Index> out;
      for (Index i = 0; i < n_neg; ++i) out.push_back(c[static_cast<std::size_t>(i)].second);
      return out;
    };
    pool.neg_x.push_back(nearest(x_mapped, y_mapped, p.tgt, p.src));
    pool.neg_y.push_back(nearest(y_mapped, x_mapped, p.src, p.tgt));
  }
  return pool;
}

LossAndGrad infonce_loss_grad(const BilingualDictionary& dict, const NegativePool& pool,
                              const Matrix& x, const Matrix& y, const Matrix& w_x,
                              const Matrix& w_y, double tau) {
  const Index d = w_x.cols();
  LossAndGrad out;
  out.grad_x = Matrix::Zero(w_x.rows(), d);
  out.grad_y = Matrix::Zero(w_y.rows(), d);
  const double n = static_cast<double>(dict.size());

  auto mapped = [](const Matrix& raw, Index r, const Matrix& w) -> RowVector { return raw.row(r) * w; };
  // d cos(a, b) / d a
  auto dcos = [](const RowVector& a, const RowVector& b) -> RowVector {
    const double na = a.norm(), nb = b.norm();
    const double c = a.dot(b) / (na * nb);
    return b / (na * nb) - c * a / (na * na);
  };

  for (std::size_t i = 0; i < dict.size(); ++i) {
    const Index m = dict[i].src, nn = dict[i].tgt;
    struct Term { Index xr, yr; };
    std::vector<Term> terms{{m, nn}};
    for (Index j : pool.neg_y[i]) terms.push_back({m, j});
    for (Index j : pool.neg_x[i]) terms.push_back({j, nn});

    std::vector<double> logits;
    for (const auto& t : terms) {
      const RowVector u = mapped(x, t.xr, w_x), v = mapped(y, t.yr, w_y);
      logits.push_back(u.dot(v) / (u.norm() * v.norm()) / tau);
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - mx);
    const double lse = mx + std::log(z);
    out.loss += (lse - logits[0]) / n;

    for (std::size_t t = 0; t < terms.size(); ++t) {
      const double p = std::exp(logits[t] - lse);
      const double c = (p - (t == 0 ? 1.0 : 0.0)) / (tau * n);
      const RowVector u = mapped(x, terms[t].xr, w_x), v = mapped(y, terms[t].yr, w_y);
      out.grad_x += c * x.row(terms[t].xr).transpose() * dcos(u, v);
      out.grad_y += c * y.row(terms[t].yr).transpose() * dcos(v, u);
    }
  }
  return out;
}

}  // namespace bli::reference
