#pragma once

#include "bli/embedding.hpp"
#include "bli/retrieval.hpp"

#include <functional>
#include <vector>

namespace bli {

/// Hard negatives per positive pair i of a dictionary: neg_x[i] are source
/// words close to the mapped target word, neg_y[i] target words close to the
/// mapped source word. The true counterpart is never included.
struct NegativePool {
  Index n_neg = 0;
  std::vector<std::vector<Index>> neg_x;
  std::vector<std::vector<Index>> neg_y;

  std::size_t size() const { return neg_x.size(); }
};

struct TrainConfig {
  int n_cl = 200;           // epochs over the contrastive dictionary
  Index n_neg = 150;        // negatives per side
  double lr = 1.5;
  double gamma = 0.99;      // lr ← lr·gamma after every epoch
  double tau = 1.0;
  int refresh_interval = 1; // epochs between re-mining

  /// Throws bli::Error when a field is out of range.
  void validate() const;
};

/// For each pair (m, n): neg_x = the n_neg source rows most cosine-similar to
/// y_mapped[n] other than m; neg_y symmetric. Ties go to the lower index.
/// n_neg must be smaller than both vocabularies.
NegativePool mine_hard_negatives(const BilingualDictionary& dict, const Matrix& x_mapped,
                                 const Matrix& y_mapped, Index n_neg,
                                 const RetrievalOptions& opts = {});

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad_x;
  Matrix grad_y;
};

/// Mean over pairs of −log p_i with
///   s(a, b) = exp(cos(x_a W_x, y_b W_y) / tau)
///   p_i     = s(m_i, n_i) / (Σ_{j ∈ {n_i} ∪ neg_y[i]} s(m_i, j) + Σ_{j ∈ neg_x[i]} s(j, n_i)).
/// x and y are the raw (unmapped) matrices.
double infonce_loss(const BilingualDictionary& dict, const NegativePool& pool, const Matrix& x,
                    const Matrix& y, const Matrix& w_x, const Matrix& w_y, double tau);

/// Loss plus its exact gradient with respect to W_x and W_y. Pair terms are
/// computed in parallel and reduced in a fixed order, so the result is
/// bit-identical for any thread count.
LossAndGrad infonce_loss_grad(const BilingualDictionary& dict, const NegativePool& pool,
                              const Matrix& x, const Matrix& y, const Matrix& w_x,
                              const Matrix& w_y, double tau);

std::pair<Matrix, Matrix> infonce_grad(const BilingualDictionary& dict, const NegativePool& pool,
                                       const Matrix& x, const Matrix& y, const Matrix& w_x,
                                       const Matrix& w_y, double tau);

struct EpochReport {
  int epoch = 0;       // 0-based
  double loss = 0.0;   // at the maps entering this epoch
  double lr = 0.0;     // step size used in this epoch
  bool remined = false;
};

struct FinetuneResult {
  LinearMapPair maps;
  std::vector<double> losses;  // one per epoch
  double final_lr = 0.0;
};

using EpochObserver = std::function<void(const EpochReport&)>;

/// Full-batch SGD on the InfoNCE objective for cfg.n_cl epochs. Negatives are
/// re-mined against the current maps every refresh_interval epochs. Throws
/// DivergenceError if the loss turns non-finite.
FinetuneResult contrastive_finetune(const BilingualDictionary& dict, const VocabEmbedding& x,
                                    const VocabEmbedding& y, const LinearMapPair& maps,
                                    const TrainConfig& cfg, const EpochObserver& observer = {});

}  // namespace bli
