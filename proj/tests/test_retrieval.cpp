#include <doctest.h>

#include "bli/reference.hpp"
#include "bli/retrieval.hpp"
#include "oracles.hpp"

using namespace bli;

namespace {

std::vector<std::vector<Index>> rows_of(const TopK& t) {
  std::vector<std::vector<Index>> out;
  for (Index q = 0; q < t.n_queries; ++q) out.emplace_back(t.row(q).begin(), t.row(q).end());
  return out;
}

}  // namespace

TEST_SUITE("retrieval") {

TEST_CASE("nn_topk basics") {
  std::mt19937_64 rng(1);
  SUBCASE("a target row retrieves itself first") {
    const Matrix t = oracle::random_unit_rows(40, 5, rng);
    const auto top = nn_topk(t.row(17), t, 3);
    CHECK(top.row(0)[0] == 17);
    CHECK(top.row_scores(0)[0] == doctest::Approx(1.0));
  }
  SUBCASE("orthonormal basis") {
    const Matrix basis = Matrix::Identity(4, 4);
    const auto top = nn_topk(basis.row(2), basis, 4);
    CHECK(top.row(0)[0] == 2);
    CHECK(top.row_scores(0)[1] == 0.0);
    // remaining zero-score ties come back in index order
    CHECK(std::vector<Index>(top.row(0).begin(), top.row(0).end()) == std::vector<Index>{2, 0, 1, 3});
  }
  SUBCASE("k=0 and k beyond the vocabulary are errors") {
    const Matrix t = oracle::random_unit_rows(5, 3, rng);
    CHECK_THROWS_AS(nn_topk(t, t, 0), Error);
    CHECK_THROWS_AS(nn_topk(t, t, 6), Error);
  }
}

TEST_CASE("nn_topk equals the exhaustive sort oracle") {
  std::mt19937_64 rng(2);
  const Matrix q = oracle::random_matrix(100, 12, rng);
  const Matrix t = oracle::random_matrix(1000, 12, rng);
  // small blocks so that several query chunks and target blocks are involved
  const auto top = nn_topk(q, t, 10, Measure::Cosine, {7, 93});
  CHECK(rows_of(top) == oracle::exhaustive_cosine_topk(q, t, 10));
  CHECK(rows_of(nn_topk(q, t, 10)) == rows_of(top));
}

TEST_CASE("dot measure skips normalization") {
  const Matrix t = (Matrix(2, 2) << 1, 0, 0.6, 0.8).finished();
  const Matrix q = (Matrix(1, 2) << 0, 10).finished();
  const auto cos_top = nn_topk(q, t * 1.0, 1, Measure::Cosine);
  Matrix scaled = t;
  scaled.row(0) *= 100.0;
  const Matrix q2 = (Matrix(1, 2) << 1, 1).finished();
  CHECK(nn_topk(q2, scaled, 1, Measure::Dot).row(0)[0] == 0);
  CHECK(nn_topk(q2, scaled, 1, Measure::Cosine).row(0)[0] == 1);
  CHECK(cos_top.row(0)[0] == 1);
}

TEST_CASE("parallel kernels equal the serial reference") {
  std::mt19937_64 rng(3);
  const Matrix q = oracle::random_matrix(150, 9, rng);
  const Matrix t = oracle::random_matrix(400, 9, rng);
  for (Measure m : {Measure::Cosine, Measure::Dot}) {
    set_thread_count(3);
    const auto fast = nn_topk(q, t, 8, m, {16, 64});
    set_thread_count(0);
    const auto slow = reference::nn_topk(q, t, 8, m);
    CHECK(fast.indices == slow.indices);
  }
  const auto stats = compute_csls_stats(q, t, 10);
  const auto ref_stats = reference::compute_csls_stats(q, t, 10);
  CHECK((stats.r_values - ref_stats.r_values).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(csls_topk(q, t, stats, 5).indices == reference::csls_topk(q, t, ref_stats, 5).indices);
}

TEST_CASE("CSLS statistics") {
  std::mt19937_64 rng(4);
  SUBCASE("k=1 with the target duplicated in the source space gives r = 1") {
    const Matrix src = oracle::random_unit_rows(10, 4, rng);
    const auto stats = compute_csls_stats(src, src.topRows(3), 1);
    for (Index i = 0; i < 3; ++i) CHECK(stats.r_values(i) == doctest::Approx(1.0));
  }
  SUBCASE("orthogonal toy space gives r = 0") {
    const Matrix src = Matrix::Identity(6, 6).topRows(3);
    const Matrix tgt = Matrix::Identity(6, 6).bottomRows(3);
    const auto stats = compute_csls_stats(src, tgt, 2);
    CHECK(stats.r_values.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("matches the brute-force mean of k nearest cosines") {
    const Matrix src = oracle::random_matrix(50, 8, rng);
    const Matrix tgt = oracle::random_matrix(50, 8, rng);
    const auto stats = compute_csls_stats(src, tgt, 3);
    const auto expected = oracle::knn_mean_cos(src, tgt, 3);
    for (Index y = 0; y < 50; ++y) {
      CHECK(std::abs(stats.r_values(y) - static_cast<double>(expected[static_cast<std::size_t>(y)])) <= 1e-12);
    }
  }
  SUBCASE("k must be below the source vocabulary") {
    const Matrix src = oracle::random_matrix(5, 3, rng);
    CHECK_THROWS_AS(compute_csls_stats(src, src, 5), Error);
  }
}

TEST_CASE("csls_topk") {
  std::mt19937_64 rng(5);
  SUBCASE("uniform hubness reproduces the NN ranking") {
    const Matrix q = oracle::random_matrix(20, 6, rng);
    const Matrix t = oracle::random_matrix(60, 6, rng);
    CslsStats flat{Vector::Constant(60, 0.3), 10, Measure::Cosine};
    CHECK(csls_topk(q, t, flat, 60).indices == nn_topk(q, t, 60).indices);
  }
  SUBCASE("a hub is demoted below a non-hub with equal cosine") {
    const Matrix t = (Matrix(2, 2) << 1, 1, 1, -1).finished();
    const Matrix q = (Matrix(1, 2) << 1, 0).finished();
    CslsStats stats{(Vector(2) << 0.9, 0.1).finished(), 1, Measure::Cosine};
    CHECK(nn_topk(q, t, 1).row(0)[0] == 0);  // tie resolved by index
    CHECK(csls_topk(q, t, stats, 1).row(0)[0] == 1);
  }
  SUBCASE("equals the full formula including r_Y(x)") {
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix xs = oracle::random_matrix(50, 8, rng);
      const Matrix ys = oracle::random_matrix(50, 8, rng);
      const auto stats = compute_csls_stats(xs, ys, 10);
      CHECK(rows_of(csls_topk(xs, ys, stats, 50)) == oracle::full_csls_topk(xs, ys, 10, 50));
    }
  }
  SUBCASE("statistics must cover the targets") {
    const Matrix t = oracle::random_matrix(5, 3, rng);
    CslsStats wrong{Vector::Zero(4), 1, Measure::Cosine};
    CHECK_THROWS_AS(csls_topk(t, t, wrong, 1), Error);
  }
}

TEST_CASE("cosine is symmetric") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    const RowVector a = oracle::random_matrix(1, 7, rng), b = oracle::random_matrix(1, 7, rng);
    CHECK(std::abs(cosine(a, b) - cosine(b, a)) <= 1e-12);
  }
  CHECK_THROWS_AS(cosine(RowVector::Zero(3), RowVector::Ones(3)), Error);
}

}  // TEST_SUITE
