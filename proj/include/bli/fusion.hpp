#pragma once

#include "bli/embedding.hpp"

#include <utility>

namespace bli {

inline constexpr double kDefaultLambda = 0.2;

/// Row-orthonormal d1×d2 map (W·Wᵀ = I, d1 ≤ d2) plus the interpolation
/// weight of the LM-side vector.
struct FusionMap {
  Matrix w;
  double lambda = kDefaultLambda;
};

/// argmin ‖XW − Y‖_F subject to W·Wᵀ = I. With XᵀY = U[S, 0]Vᵀ (full SVD)
/// the minimizer is U[I, 0]Vᵀ. Throws if d1 > d2, if the row counts differ
/// or on non-finite input.
FusionMap generalized_procrustes(const Matrix& x, const Matrix& y, double lambda = kDefaultLambda);

/// (1 − λ)·(v₁W / ‖v₁W‖) + λ·(v₂ / ‖v₂‖). Not renormalized.
RowVector interpolate(const RowVector& v_c1, const RowVector& v_c2, const FusionMap& fmap);

/// Fits W on both languages' seed words (each seed word contributes one
/// (C1 vector, C2 vector) row per occurrence; both sides l2-normalized
/// first) and interpolates every word of both vocabularies. c2_* may list
/// the words in a different order but must cover the same vocabulary; the
/// outputs follow the C1 word order. d0 indexes the C1 vocabularies.
std::pair<VocabEmbedding, VocabEmbedding> fuse_spaces(const VocabEmbedding& c1_x,
                                                      const VocabEmbedding& c1_y,
                                                      const VocabEmbedding& c2_x,
                                                      const VocabEmbedding& c2_y,
                                                      const BilingualDictionary& d0,
                                                      double lambda = kDefaultLambda,
                                                      FusionMap* fitted = nullptr);

}  // namespace bli
