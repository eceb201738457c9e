#include "bli/contrastive.hpp"

#include "bli/linear_mapping.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <unordered_map>

namespace bli {
namespace {

constexpr Index kReduceBlock = 4096;

// Rows of one vocabulary that take part in the objective, in first-use order.
struct ActiveRows {
  std::vector<Index> rows;
  std::vector<Index> local;  // vocab index -> position in rows, or -1

  explicit ActiveRows(Index vocab) : local(static_cast<std::size_t>(vocab), -1) {}

  Index touch(Index v) {
    auto& slot = local[static_cast<std::size_t>(v)];
    if (slot < 0) {
      slot = static_cast<Index>(rows.size());
      rows.push_back(v);
    }
    return slot;
  }
};

struct MappedRows {
  Matrix raw;      // x_r
  Matrix unit;     // x_r W / |x_r W|
  Vector inv_norm; // 1 / |x_r W|
};

MappedRows map_rows(const Matrix& full, const std::vector<Index>& rows, const Matrix& w,
                    const char* side) {
  MappedRows out;
  out.raw = gather_rows(full, rows);
  out.unit = apply_map(out.raw, w);
  out.inv_norm.resize(out.unit.rows());
  for (Index i = 0; i < out.unit.rows(); ++i) {
    const double n = out.unit.row(i).norm();
    if (n == 0.0 || !std::isfinite(n)) {
      throw Error(std::string("InfoNCE: mapped ") + side + " vector of word " +
                  std::to_string(rows[static_cast<std::size_t>(i)]) + " is zero or non-finite");
    }
    out.inv_norm(i) = 1.0 / n;
    out.unit.row(i) *= out.inv_norm(i);
  }
  return out;
}

// Gradient with respect to the unnormalized mapped rows, accumulated per row
// in term order:  g_r = (Σ c_t v̂_t − (Σ c_t cos_t) û_r) / |u_r|.
Matrix row_gradients(const MappedRows& self, const MappedRows& partner,
                     const std::vector<Index>& self_of_term,
                     const std::vector<Index>& partner_of_term, const std::vector<double>& coef,
                     const std::vector<double>& cos) {
  const Index n_rows = self.unit.rows();
  std::vector<Index> start(static_cast<std::size_t>(n_rows) + 1, 0);
  for (Index r : self_of_term) ++start[static_cast<std::size_t>(r) + 1];
  for (std::size_t i = 1; i < start.size(); ++i) start[i] += start[i - 1];
  std::vector<Index> order(self_of_term.size());
  {
    std::vector<Index> fill(start.begin(), start.end() - 1);
    for (std::size_t t = 0; t < self_of_term.size(); ++t) {
      order[static_cast<std::size_t>(fill[static_cast<std::size_t>(self_of_term[t])]++)] =
          static_cast<Index>(t);
    }
  }
  Matrix g(n_rows, self.unit.cols());
#pragma omp parallel for schedule(dynamic, 64) num_threads(thread_count())
  for (Index r = 0; r < n_rows; ++r) {
    RowVector acc = RowVector::Zero(self.unit.cols());
    double cos_weight = 0.0;
    for (Index p = start[static_cast<std::size_t>(r)]; p < start[static_cast<std::size_t>(r) + 1]; ++p) {
      const auto t = static_cast<std::size_t>(order[static_cast<std::size_t>(p)]);
      acc.noalias() += coef[t] * partner.unit.row(partner_of_term[t]);
      cos_weight += coef[t] * cos[t];
    }
    g.row(r) = (acc - cos_weight * self.unit.row(r)) * self.inv_norm(r);
  }
  return g;
}

// rawᵀ·g summed over fixed row blocks, partial products added in block order.
Matrix blocked_transpose_product(const Matrix& raw, const Matrix& g) {
  const Index n_blocks = (raw.rows() + kReduceBlock - 1) / kReduceBlock;
  std::vector<Matrix> partial(static_cast<std::size_t>(n_blocks));
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (Index b = 0; b < n_blocks; ++b) {
    const Index r0 = b * kReduceBlock;
    const Index n = std::min(kReduceBlock, raw.rows() - r0);
    partial[static_cast<std::size_t>(b)].noalias() =
        raw.middleRows(r0, n).transpose() * g.middleRows(r0, n);
  }
  Matrix out = Matrix::Zero(raw.cols(), g.cols());
  for (const auto& p : partial) out += p;
  return out;
}

LossAndGrad evaluate_objective(const BilingualDictionary& dict, const NegativePool& pool,
                               const Matrix& x, const Matrix& y, const Matrix& w_x,
                               const Matrix& w_y, double tau, bool want_grad) {
  if (dict.empty()) throw Error("InfoNCE: empty dictionary");
  if (pool.size() != dict.size()) throw Error("InfoNCE: negative pool not aligned with dictionary");
  if (!(tau > 0.0)) throw Error("InfoNCE: tau must be positive");
  if (w_x.rows() != x.cols() || w_y.rows() != y.cols() || w_x.cols() != w_y.cols()) {
    throw Error("InfoNCE: map shapes do not match embedding dims");
  }
  dict.check_bounds(x.rows(), y.rows());

  ActiveRows ax(x.rows()), ay(y.rows());
  const std::size_t n_pairs = dict.size();
  std::vector<std::size_t> offset(n_pairs + 1, 0);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    offset[i + 1] = offset[i] + 1 + pool.neg_y[i].size() + pool.neg_x[i].size();
  }
  const std::size_t n_terms = offset[n_pairs];
  std::vector<Index> term_x(n_terms), term_y(n_terms);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const auto& p = dict[i];
    const Index lx = ax.touch(p.src), ly = ay.touch(p.tgt);
    std::size_t t = offset[i];
    term_x[t] = lx;
    term_y[t] = ly;
    ++t;
    for (Index j : pool.neg_y[i]) {
      if (j < 0 || j >= y.rows()) throw Error("InfoNCE: negative index out of range");
      term_x[t] = lx;
      term_y[t] = ay.touch(j);
      ++t;
    }
    for (Index j : pool.neg_x[i]) {
      if (j < 0 || j >= x.rows()) throw Error("InfoNCE: negative index out of range");
      term_x[t] = ax.touch(j);
      term_y[t] = ly;
      ++t;
    }
  }

  const MappedRows mx = map_rows(x, ax.rows, w_x, "source");
  const MappedRows my = map_rows(y, ay.rows, w_y, "target");

  std::vector<double> cos(n_terms), coef(n_terms), pair_loss(n_pairs);
  const double scale = 1.0 / (tau * static_cast<double>(n_pairs));
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::size_t i = 0; i < n_pairs; ++i) {
    double max_logit = -INFINITY;
    for (std::size_t t = offset[i]; t < offset[i + 1]; ++t) {
      cos[t] = mx.unit.row(term_x[t]).dot(my.unit.row(term_y[t]));
      max_logit = std::max(max_logit, cos[t] / tau);
    }
    double denom = 0.0;
    for (std::size_t t = offset[i]; t < offset[i + 1]; ++t) denom += std::exp(cos[t] / tau - max_logit);
    const double lse = max_logit + std::log(denom);
    pair_loss[i] = lse - cos[offset[i]] / tau;
    for (std::size_t t = offset[i]; t < offset[i + 1]; ++t) {
      const double prob = std::exp(cos[t] / tau - lse);
      coef[t] = (prob - (t == offset[i] ? 1.0 : 0.0)) * scale;
    }
  }

  LossAndGrad out;
  double total = 0.0;
  for (double l : pair_loss) total += l;
  out.loss = total / static_cast<double>(n_pairs);
  if (!want_grad) return out;

  const Matrix gx = row_gradients(mx, my, term_x, term_y, coef, cos);
  const Matrix gy = row_gradients(my, mx, term_y, term_x, coef, cos);
  out.grad_x = blocked_transpose_product(mx.raw, gx);
  out.grad_y = blocked_transpose_product(my.raw, gy);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (n_cl < 0) throw Error("n_cl must be >= 0");
  if (n_neg < 0) throw Error("n_neg must be >= 0");
  if (!(lr > 0.0)) throw Error("lr must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error("gamma must be in (0, 1]");
  if (!(tau > 0.0)) throw Error("tau must be > 0");
  if (refresh_interval < 1) throw Error("refresh_interval must be >= 1");
}

NegativePool mine_hard_negatives(const BilingualDictionary& dict, const Matrix& x_mapped,
                                 const Matrix& y_mapped, Index n_neg,
                                 const RetrievalOptions& opts) {
  if (n_neg < 0) throw Error("mine_hard_negatives: n_neg must be >= 0");
  if (x_mapped.cols() != y_mapped.cols()) throw Error("mine_hard_negatives: dimension mismatch");
  if (n_neg >= x_mapped.rows() || n_neg >= y_mapped.rows()) {
    throw Error("mine_hard_negatives: n_neg=" + std::to_string(n_neg) +
                " must be smaller than both vocabularies");
  }
  dict.check_bounds(x_mapped.rows(), y_mapped.rows());
  NegativePool pool;
  pool.n_neg = n_neg;
  pool.neg_x.assign(dict.size(), {});
  pool.neg_y.assign(dict.size(), {});
  if (n_neg == 0 || dict.empty()) return pool;

  // One query per distinct word; several pairs can share it.
  auto distinct = [](const BilingualDictionary& d, bool src_side) {
    std::vector<Index> words, slot(d.size());
    std::unordered_map<Index, Index> seen;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const Index w = src_side ? d[i].src : d[i].tgt;
      auto [it, fresh] = seen.emplace(w, static_cast<Index>(words.size()));
      if (fresh) words.push_back(w);
      slot[i] = it->second;
    }
    return std::pair{words, slot};
  };
  const auto [tgt_words, tgt_slot] = distinct(dict, false);
  const auto [src_words, src_slot] = distinct(dict, true);

  // Neighbours of mapped targets among mapped sources give neg_x, and vice versa.
  const TopK near_x = nn_topk(gather_rows(y_mapped, tgt_words), x_mapped, n_neg + 1,
                              Measure::Cosine, opts);
  const TopK near_y = nn_topk(gather_rows(x_mapped, src_words), y_mapped, n_neg + 1,
                              Measure::Cosine, opts);

  auto take = [n_neg](std::span<const Index> ranked, Index exclude) {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(n_neg));
    for (Index c : ranked) {
      if (c == exclude) continue;
      if (static_cast<Index>(out.size()) == n_neg) break;
      out.push_back(c);
    }
    return out;
  };
  for (std::size_t i = 0; i < dict.size(); ++i) {
    pool.neg_x[i] = take(near_x.row(tgt_slot[i]), dict[i].src);
    pool.neg_y[i] = take(near_y.row(src_slot[i]), dict[i].tgt);
  }
  return pool;
}

double infonce_loss(const BilingualDictionary& dict, const NegativePool& pool, const Matrix& x,
                    const Matrix& y, const Matrix& w_x, const Matrix& w_y, double tau) {
  return evaluate_objective(dict, pool, x, y, w_x, w_y, tau, false).loss;
}

LossAndGrad infonce_loss_grad(const BilingualDictionary& dict, const NegativePool& pool,
                              const Matrix& x, const Matrix& y, const Matrix& w_x,
                              const Matrix& w_y, double tau) {
  return evaluate_objective(dict, pool, x, y, w_x, w_y, tau, true);
}

std::pair<Matrix, Matrix> infonce_grad(const BilingualDictionary& dict, const NegativePool& pool,
                                       const Matrix& x, const Matrix& y, const Matrix& w_x,
                                       const Matrix& w_y, double tau) {
  auto r = infonce_loss_grad(dict, pool, x, y, w_x, w_y, tau);
  return {std::move(r.grad_x), std::move(r.grad_y)};
}

FinetuneResult contrastive_finetune(const BilingualDictionary& dict, const VocabEmbedding& x,
                                    const VocabEmbedding& y, const LinearMapPair& maps,
                                    const TrainConfig& cfg, const EpochObserver& observer) {
  cfg.validate();
  FinetuneResult result{maps, {}, cfg.lr};
  if (cfg.n_cl == 0) return result;
  if (dict.empty()) throw Error("contrastive_finetune: empty dictionary");

  NegativePool pool;
  double lr = cfg.lr;
  for (int epoch = 0; epoch < cfg.n_cl; ++epoch) {
    const bool remine = epoch % cfg.refresh_interval == 0;
    if (remine) {
      const Matrix xm = apply_map(x.matrix(), result.maps.w_x);
      const Matrix ym = apply_map(y.matrix(), result.maps.w_y);
      pool = mine_hard_negatives(dict, xm, ym, cfg.n_neg);
    }
    auto lg = infonce_loss_grad(dict, pool, x.matrix(), y.matrix(), result.maps.w_x,
                                result.maps.w_y, cfg.tau);
    if (!std::isfinite(lg.loss) || !lg.grad_x.allFinite() || !lg.grad_y.allFinite()) {
      throw DivergenceError("contrastive fine-tuning diverged at epoch " + std::to_string(epoch),
                            epoch);
    }
    result.losses.push_back(lg.loss);
    if (observer) observer({epoch, lg.loss, lr, remine});
    result.maps.w_x -= lr * lg.grad_x;
    result.maps.w_y -= lr * lg.grad_y;
    lr *= cfg.gamma;
  }
  result.final_lr = lr;
  return result;
}

}  // namespace bli
