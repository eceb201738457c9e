#pragma once

// Single-threaded, loop-level versions of the parallel kernels. They share no
// code with the blocked/OpenMP paths and exist so tests and benchmarks have
// something simple to compare against.

#include "bli/contrastive.hpp"
#include "bli/retrieval.hpp"

namespace bli::reference {

Matrix apply_map(const Matrix& m, const Matrix& w);

TopK nn_topk(const Matrix& queries, const Matrix& targets, Index k, Measure measure);

CslsStats compute_csls_stats(const Matrix& source_space, const Matrix& target_space, Index k,
                             Measure measure = Measure::Cosine);

TopK csls_topk(const Matrix& queries, const Matrix& targets, const CslsStats& stats, Index k);

NegativePool mine_hard_negatives(const BilingualDictionary& dict, const Matrix& x_mapped,
                                 const Matrix& y_mapped, Index n_neg);

/// Accumulates the gradient pair by pair as outer products x_rᵀ·∂L/∂u_r.
LossAndGrad infonce_loss_grad(const BilingualDictionary& dict, const NegativePool& pool,
                              const Matrix& x, const Matrix& y, const Matrix& w_x,
                              const Matrix& w_y, double tau);

}  // namespace bli::reference
