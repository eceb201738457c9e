#include "bli/fusion.hpp"

#include "bli/embed_io.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace bli {
namespace {

// c2 rows reordered to follow c1's words.
Matrix align_to(const VocabEmbedding& c1, const VocabEmbedding& c2, const char* side) {
  std::vector<std::string> missing;
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(c1.size()));
  for (const auto& w : c1.words()) {
    auto j = c2.find(w);
    if (!j) {
      missing.push_back(w);
    } else {
      order.push_back(*j);
    }
  }
  if (!missing.empty() || c1.size() != c2.size()) {
    std::string msg = std::string("fuse_spaces: ") + side + " C1/C2 vocabularies differ";
    if (!missing.empty()) {
      msg += "; missing from C2:";
      for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
      if (missing.size() > 10) msg += " ... (" + std::to_string(missing.size()) + " total)";
    } else {
      msg += " in size (" + std::to_string(c1.size()) + " vs " + std::to_string(c2.size()) + ")";
    }
    throw Error(msg);
  }
  return gather_rows(c2.matrix(), order);
}

}  // namespace

FusionMap generalized_procrustes(const Matrix& x, const Matrix& y, double lambda) {
  if (x.rows() != y.rows()) throw Error("generalized_procrustes: row counts differ");
  if (x.rows() < 1) throw Error("generalized_procrustes: no training rows");
  if (x.cols() > y.cols()) {
    throw Error("generalized_procrustes: d1=" + std::to_string(x.cols()) + " > d2=" +
                std::to_string(y.cols()) + " admits no row-orthonormal solution");
  }
  if (!x.allFinite() || !y.allFinite()) throw Error("generalized_procrustes: non-finite input");
  if (lambda < 0.0 || lambda > 1.0) throw Error("interpolation weight must lie in [0, 1]");
  const Index d1 = x.cols();
  Eigen::BDCSVD<Matrix> svd(x.transpose() * y, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw Error("generalized_procrustes: SVD failed");
  // U [I, 0] Vᵀ keeps only the first d1 right singular vectors.
  FusionMap f;
  f.w = svd.matrixU() * svd.matrixV().leftCols(d1).transpose();
  f.lambda = lambda;
  return f;
}

RowVector interpolate(const RowVector& v_c1, const RowVector& v_c2, const FusionMap& fmap) {
  if (v_c1.size() != fmap.w.rows() || v_c2.size() != fmap.w.cols()) {
    throw Error("interpolate: vector sizes do not match the fusion map");
  }
  const RowVector mapped = v_c1 * fmap.w;
  const double n1 = mapped.norm();
  const double n2 = v_c2.norm();
  if (n1 == 0.0) throw Error("interpolate: C1 vector maps to zero");
  if (n2 == 0.0) throw Error("interpolate: C2 vector is zero");
  return (1.0 - fmap.lambda) * (mapped / n1) + fmap.lambda * (v_c2 / n2);
}

std::pair<VocabEmbedding, VocabEmbedding> fuse_spaces(const VocabEmbedding& c1_x,
                                                      const VocabEmbedding& c1_y,
                                                      const VocabEmbedding& c2_x,
                                                      const VocabEmbedding& c2_y,
                                                      const BilingualDictionary& d0,
                                                      double lambda, FusionMap* fitted) {
  if (c1_x.dim() != c1_y.dim() || c2_x.dim() != c2_y.dim()) {
    throw Error("fuse_spaces: source/target dims differ within a stage");
  }
  if (d0.empty()) throw Error("fuse_spaces: empty seed dictionary");
  d0.check_bounds(c1_x.size(), c1_y.size());
  Matrix c2x = align_to(c1_x, c2_x, "source");
  Matrix c2y = align_to(c1_y, c2_y, "target");
  Matrix c1x = c1_x.matrix(), c1y = c1_y.matrix();
  l2_normalize_rows(c1x);
  l2_normalize_rows(c1y);
  l2_normalize_rows(c2x);
  l2_normalize_rows(c2y);

  const Index n = static_cast<Index>(2 * d0.size());
  Matrix train_c1(n, c1x.cols()), train_c2(n, c2x.cols());
  Index r = 0;
  for (const auto& p : d0.pairs()) {
    train_c1.row(r) = c1x.row(p.src);
    train_c2.row(r++) = c2x.row(p.src);
    train_c1.row(r) = c1y.row(p.tgt);
    train_c2.row(r++) = c2y.row(p.tgt);
  }
  const FusionMap fmap = generalized_procrustes(train_c1, train_c2, lambda);
  if (fitted) *fitted = fmap;

  auto fuse = [&](const Matrix& c1, const Matrix& c2) {
    Matrix out(c1.rows(), c2.cols());
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (Index i = 0; i < c1.rows(); ++i) {
      // Rows are unit norm and W has orthonormal rows, so ‖c1·W‖ = 1.
      out.row(i) = interpolate(c1.row(i), c2.row(i), fmap);
    }
    return out;
  };
  return {c1_x.with_matrix(fuse(c1x, c2x)), c1_y.with_matrix(fuse(c1y, c2y))};
}

}  // namespace bli
