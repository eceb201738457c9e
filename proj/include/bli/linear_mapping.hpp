#pragma once

#include "bli/embedding.hpp"

namespace bli {

inline constexpr double kDefaultRidge = 1e-10;
inline constexpr double kEigenFloor = 1e-12;

/// Inverse and forward square roots of a symmetric PSD matrix, taken from a
/// single eigendecomposition of (m + ridge·I). Eigenvalues below 1e-12 are
/// clamped before either root is formed.
struct PsdRoots {
  Matrix inv_sqrt;
  Matrix sqrt;
};

PsdRoots psd_roots(const Matrix& m, double ridge = kDefaultRidge);

/// (m + ridge·I)^(-1/2). Throws on asymmetric (> 1e-10) or non-finite input.
Matrix inverse_sqrt_psd(const Matrix& m, double ridge = 0.0);

/// Intermediate quantities of the whitening / SVD / re-weighting /
/// de-whitening construction. Exposed so the staged pipeline can be checked
/// against the fused matrices.
struct AdvancedMappingFactors {
  Matrix whiten_x;    // (XᵀX)^(-1/2)
  Matrix whiten_y;    // (YᵀY)^(-1/2)
  Matrix dewhiten_x;  // (XᵀX)^(1/2)
  Matrix dewhiten_y;  // (YᵀY)^(1/2)
  Matrix u;           // X'ᵀY' = U S Vᵀ
  Vector s;
  Matrix v;
};

AdvancedMappingFactors advanced_mapping_factors(const Matrix& x_d, const Matrix& y_d,
                                                double ridge = kDefaultRidge);

/// Fuses the factors into one d×d matrix per side:
///   W_x = (XᵀX)^(-1/2) U S^(1/2) Uᵀ (XᵀX)^(1/2) U
///   W_y = (YᵀY)^(-1/2) V S^(1/2) Vᵀ (YᵀY)^(1/2) V
/// x_d and y_d are the dictionary-aligned rows (|D| ≥ 2, same shape).
LinearMapPair advanced_mapping(const Matrix& x_d, const Matrix& y_d, double ridge = kDefaultRidge);

/// advanced_mapping over the rows selected by a dictionary.
LinearMapPair advanced_mapping(const BilingualDictionary& dict, const VocabEmbedding& x,
                               const VocabEmbedding& y, double ridge = kDefaultRidge);

/// m·w, computed over fixed-size row blocks in parallel; the result does not
/// depend on the thread count.
Matrix apply_map(const Matrix& m, const Matrix& w);
VocabEmbedding apply_map(const VocabEmbedding& emb, const Matrix& w);

}  // namespace bli
