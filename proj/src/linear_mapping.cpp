#include "bli/linear_mapping.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace bli {
namespace {

constexpr Index kRowBlock = 512;

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw Error(std::string(what) + ": non-finite entries");
}

}  // namespace

PsdRoots psd_roots(const Matrix& m, double ridge) {
  if (m.rows() != m.cols()) throw Error("psd_roots: matrix is not square");
  if (ridge < 0.0) throw Error("psd_roots: negative ridge");
  check_finite(m, "psd_roots");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error("psd_roots: matrix is not symmetric");
  }
  Matrix sym = 0.5 * (m + m.transpose());
  sym.diagonal().array() += ridge;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw Error("psd_roots: eigendecomposition failed");
  const Vector lambda = eig.eigenvalues().cwiseMax(kEigenFloor);
  const Matrix& q = eig.eigenvectors();
  PsdRoots out;
  out.inv_sqrt = q * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
  out.sqrt = q * lambda.cwiseSqrt().asDiagonal() * q.transpose();
  return out;
}

Matrix inverse_sqrt_psd(const Matrix& m, double ridge) { return psd_roots(m, ridge).inv_sqrt; }

AdvancedMappingFactors advanced_mapping_factors(const Matrix& x_d, const Matrix& y_d,
                                                double ridge) {
  if (x_d.rows() != y_d.rows() || x_d.cols() != y_d.cols()) {
    throw Error("advanced_mapping: X_D is " + std::to_string(x_d.rows()) + "x" +
                std::to_string(x_d.cols()) + " but Y_D is " + std::to_string(y_d.rows()) + "x" +
                std::to_string(y_d.cols()));
  }
  if (x_d.rows() < 2) throw Error("advanced_mapping: need at least 2 dictionary rows");
  check_finite(x_d, "advanced_mapping");
  check_finite(y_d, "advanced_mapping");

  AdvancedMappingFactors f;
  auto rx = psd_roots(x_d.transpose() * x_d, ridge);
  auto ry = psd_roots(y_d.transpose() * y_d, ridge);
  f.whiten_x = std::move(rx.inv_sqrt);
  f.dewhiten_x = std::move(rx.sqrt);
  f.whiten_y = std::move(ry.inv_sqrt);
  f.dewhiten_y = std::move(ry.sqrt);

  const Matrix xw = x_d * f.whiten_x;
  const Matrix yw = y_d * f.whiten_y;
  Eigen::BDCSVD<Matrix> svd(xw.transpose() * yw, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw Error("advanced_mapping: SVD failed");
  f.u = svd.matrixU();
  f.s = svd.singularValues();
  f.v = svd.matrixV();
  return f;
}

LinearMapPair advanced_mapping(const Matrix& x_d, const Matrix& y_d, double ridge) {
  const auto f = advanced_mapping_factors(x_d, y_d, ridge);
  const auto sqrt_s = f.s.cwiseSqrt().asDiagonal();
  LinearMapPair maps;
  maps.w_x = f.whiten_x * f.u * sqrt_s * f.u.transpose() * f.dewhiten_x * f.u;
  maps.w_y = f.whiten_y * f.v * sqrt_s * f.v.transpose() * f.dewhiten_y * f.v;
  check_finite(maps.w_x, "advanced_mapping W_x");
  check_finite(maps.w_y, "advanced_mapping W_y");
  return maps;
}

LinearMapPair advanced_mapping(const BilingualDictionary& dict, const VocabEmbedding& x,
                               const VocabEmbedding& y, double ridge) {
  auto [x_d, y_d] = dictionary_rows(dict, x.matrix(), y.matrix());
  return advanced_mapping(x_d, y_d, ridge);
}

Matrix apply_map(const Matrix& m, const Matrix& w) {
  if (m.cols() != w.rows()) {
    throw Error("apply_map: embedding dim " + std::to_string(m.cols()) + " vs map " +
                std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
  }
  Matrix out(m.rows(), w.cols());
  const Index n_blocks = (m.rows() + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (Index b = 0; b < n_blocks; ++b) {
    const Index r0 = b * kRowBlock;
    const Index rows = std::min(kRowBlock, m.rows() - r0);
    out.middleRows(r0, rows).noalias() = m.middleRows(r0, rows) * w;
  }
  return out;
}

VocabEmbedding apply_map(const VocabEmbedding& emb, const Matrix& w) {
  return emb.with_matrix(apply_map(emb.matrix(), w));
}

}  // namespace bli
