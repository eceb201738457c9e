#include <doctest.h>

#include "bli/contrastive.hpp"
#include "bli/linear_mapping.hpp"
#include "bli/reference.hpp"
#include "bli/synthetic.hpp"
#include "oracles.hpp"

using namespace bli;

namespace {

struct Instance {
  Matrix x, y, wx, wy;
  BilingualDictionary dict;
  NegativePool pool;
};

// Up to 10 pairs, up to 5 negatives per side, dim up to 8.
Instance random_instance(std::mt19937_64& rng) {
  Instance in;
  const Index d = 2 + static_cast<Index>(rng() % 7);
  const Index vocab = 12 + static_cast<Index>(rng() % 10);
  const Index n_pairs = 1 + static_cast<Index>(rng() % 10);
  const Index n_neg = static_cast<Index>(rng() % 6);
  in.x = oracle::random_unit_rows(vocab, d, rng);
  in.y = oracle::random_unit_rows(vocab, d, rng);
  in.wx = Matrix::Identity(d, d) + 0.3 * oracle::random_matrix(d, d, rng);
  in.wy = Matrix::Identity(d, d) + 0.3 * oracle::random_matrix(d, d, rng);
  while (static_cast<Index>(in.dict.size()) < n_pairs) {
    in.dict.add(static_cast<Index>(rng() % vocab), static_cast<Index>(rng() % vocab));
  }
  in.pool = mine_hard_negatives(in.dict, in.x * in.wx, in.y * in.wy, n_neg);
  return in;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

}  // namespace

TEST_SUITE("contrastive") {

TEST_CASE("mine_hard_negatives tie-break and empty pools") {
  const Matrix eye = Matrix::Identity(3, 3);
  BilingualDictionary d;
  d.add(0, 0);
  const auto pool = mine_hard_negatives(d, eye, eye, 1);
  CHECK(pool.neg_x[0] == std::vector<Index>{1});
  CHECK(pool.neg_y[0] == std::vector<Index>{1});
  const auto empty = mine_hard_negatives(d, eye, eye, 0);
  CHECK(empty.neg_x[0].empty());
  CHECK(empty.neg_y[0].empty());
  CHECK_THROWS_AS(mine_hard_negatives(d, eye, eye, 3), Error);
}

TEST_CASE("mine_hard_negatives equals exhaustive sort-and-take") {
  std::mt19937_64 rng(31);
  const Matrix xm = oracle::random_matrix(20, 6, rng);
  const Matrix ym = oracle::random_matrix(20, 6, rng);
  BilingualDictionary d;
  for (Index i = 0; i < 8; ++i) d.add(i, (i * 7) % 20);
  d.add(0, 5);  // shared source word
  const auto pool = mine_hard_negatives(d, xm, ym, 5, {3, 4});
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::vector<long double> sx, sy;
    for (Index j = 0; j < 20; ++j) {
      sx.push_back(j == d[i].src ? -10 : oracle::cosine_ld(ym, d[i].tgt, xm, j));
      sy.push_back(j == d[i].tgt ? -10 : oracle::cosine_ld(xm, d[i].src, ym, j));
    }
    CHECK(pool.neg_x[i] == oracle::sort_take(sx, 5));
    CHECK(pool.neg_y[i] == oracle::sort_take(sy, 5));
    // true counterpart excluded, sizes exact
    CHECK(std::count(pool.neg_x[i].begin(), pool.neg_x[i].end(), d[i].src) == 0);
    CHECK(std::count(pool.neg_y[i].begin(), pool.neg_y[i].end(), d[i].tgt) == 0);
  }
  const auto ref = reference::mine_hard_negatives(d, xm, ym, 5);
  CHECK(pool.neg_x == ref.neg_x);
  CHECK(pool.neg_y == ref.neg_y);
}

TEST_CASE("InfoNCE loss fixed values") {
  SUBCASE("single pair without negatives has zero loss") {
    BilingualDictionary d;
    d.add(0, 0);
    NegativePool pool{0, {{}}, {{}}};
    const Matrix x = (Matrix(1, 2) << 0.3, 0.4).finished();
    CHECK(infonce_loss(d, pool, x, x, Matrix::Identity(2, 2), Matrix::Identity(2, 2), 1.0) == 0.0);
  }
  SUBCASE("one negative as similar as the positive gives ln 2") {
    BilingualDictionary d;
    d.add(0, 0);
    NegativePool pool{1, {{}}, {{1}}};
    const Matrix x = (Matrix(1, 2) << 1, 0).finished();
    const Matrix y = (Matrix(2, 2) << 0.6, 0.8, 0.6, -0.8).finished();
    const double loss = infonce_loss(d, pool, x, y, Matrix::Identity(2, 2), Matrix::Identity(2, 2), 1.0);
    CHECK(loss == doctest::Approx(0.693147180559945).epsilon(1e-14));
  }
  SUBCASE("hand-built two-pair instance (values from a 40-digit evaluation)") {
    const Matrix x = (Matrix(3, 2) << 1, 0, 0.6, 0.8, 0, 1).finished();
    const Matrix y = (Matrix(3, 2) << 0.8, 0.6, 0, 1, 1, 0).finished();
    BilingualDictionary d;
    d.add(0, 0);
    d.add(1, 1);
    NegativePool pool{1, {{2}, {0}}, {{1}, {2}}};
    const Matrix eye = Matrix::Identity(2, 2);
    CHECK(infonce_loss(d, pool, x, y, eye, eye, 1.0) == doctest::Approx(0.81892471585185062555).epsilon(1e-13));
    CHECK(infonce_loss(d, pool, x, y, eye, eye, 0.1) == doctest::Approx(0.12722344190140593146).epsilon(1e-12));
  }
}

TEST_CASE("InfoNCE loss matches the extended-precision naive formula") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    Instance in = random_instance(rng);
    const double loss = infonce_loss(in.dict, in.pool, in.x, in.y, in.wx, in.wy, 1.0);
    const long double expected = oracle::naive_infonce(in.dict, in.pool, in.x, in.y, in.wx, in.wy, 1.0L);
    CHECK(std::abs(loss - static_cast<double>(expected)) <= 1e-10);
    CHECK(loss >= 0.0);
  }
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(43);
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    Instance in = random_instance(rng);
    const double tau = trial % 3 == 0 ? 0.5 : 1.0;
    const auto [gx, gy] = infonce_grad(in.dict, in.pool, in.x, in.y, in.wx, in.wy, tau);
    const Matrix ex = oracle::random_matrix(gx.rows(), gx.cols(), rng);
    const Matrix ey = oracle::random_matrix(gy.rows(), gy.cols(), rng);
    auto f = [&](const Matrix& wx, const Matrix& wy) {
      return infonce_loss(in.dict, in.pool, in.x, in.y, wx, wy, tau);
    };
    const double fd = oracle::central_difference(f, in.wx, in.wy, ex, ey, 1e-5);
    const double analytic = (gx.cwiseProduct(ex)).sum() + (gy.cwiseProduct(ey)).sum();
    worst = std::max(worst, rel_err(analytic, fd));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("gradient equals the serial reference and is thread-count independent") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    Instance in = random_instance(rng);
    set_thread_count(1);
    const auto one = infonce_loss_grad(in.dict, in.pool, in.x, in.y, in.wx, in.wy, 1.0);
    set_thread_count(4);
    const auto four = infonce_loss_grad(in.dict, in.pool, in.x, in.y, in.wx, in.wy, 1.0);
    set_thread_count(0);
    const auto ref = reference::infonce_loss_grad(in.dict, in.pool, in.x, in.y, in.wx, in.wy, 1.0);
    CHECK(one.grad_x == four.grad_x);
    CHECK(one.grad_y == four.grad_y);
    CHECK(one.loss == four.loss);
    CHECK((one.grad_x - ref.grad_x).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((one.grad_y - ref.grad_y).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(one.loss - ref.loss) <= 1e-12);
  }
}

TEST_CASE("loss saturates and the gradient vanishes on a separated instance") {
  // positive cos = 1, negatives cos = -1
  const Matrix x = (Matrix(2, 2) << 1, 0, -1, 0).finished();
  const Matrix y = x;
  BilingualDictionary d;
  d.add(0, 0);
  NegativePool pool{1, {{1}}, {{1}}};
  const Matrix eye = Matrix::Identity(2, 2);
  double prev_norm = INFINITY;
  for (double tau : {1.0, 0.3, 0.1, 0.03}) {
    const auto lg = infonce_loss_grad(d, pool, x, y, eye, eye, tau);
    const double norm = lg.grad_x.norm() + lg.grad_y.norm();
    CHECK(norm <= prev_norm);
    prev_norm = norm;
    if (tau == 0.03) {
      CHECK(lg.loss < 1e-25);
      CHECK(norm < 1e-20);
    }
  }
}

TEST_CASE("a raw row's scale does not change the loss or its cosine gradient") {
  std::mt19937_64 rng(53);
  Instance in = random_instance(rng);
  const Index row = in.dict[0].src;
  Matrix x2 = in.x;
  x2.row(row) *= 2.0;
  const auto a = infonce_loss_grad(in.dict, in.pool, in.x, in.y, in.wx, in.wy, 1.0);
  const auto b = infonce_loss_grad(in.dict, in.pool, x2, in.y, in.wx, in.wy, 1.0);
  CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
  // ∂L/∂u scales by 1/2 while xᵀ scales by 2: the W gradient is unchanged.
  CHECK((a.grad_x - b.grad_x).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((a.grad_y - b.grad_y).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("InfoNCE input errors") {
  BilingualDictionary d;
  d.add(0, 0);
  NegativePool pool{0, {{}}, {{}}};
  const Matrix x = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(infonce_loss(d, pool, x, x, Matrix::Zero(2, 2), x, 1.0), Error);
  CHECK_THROWS_AS(infonce_loss(d, pool, x, x, x, x, 0.0), Error);
  NegativePool misaligned{0, {}, {}};
  CHECK_THROWS_AS(infonce_loss(d, misaligned, x, x, x, x, 1.0), Error);
}

TEST_CASE("contrastive_finetune") {
  SyntheticSpec spec;
  spec.vocab_size = 300;
  spec.dim = 16;
  spec.noise_sigma = 0.05;
  spec.seed_pairs = 60;
  spec.test_pairs = 100;
  const auto inst = gen_synthetic_pair(spec);
  const auto am = advanced_mapping(inst.seed, inst.src, inst.tgt);

  SUBCASE("zero epochs returns the input maps") {
    TrainConfig cfg;
    cfg.n_cl = 0;
    const auto r = contrastive_finetune(inst.seed, inst.src, inst.tgt, am, cfg);
    CHECK(r.maps.w_x == am.w_x);
    CHECK(r.maps.w_y == am.w_y);
    CHECK(r.losses.empty());
  }
  SUBCASE("loss decreases over the run and the run is deterministic") {
    TrainConfig cfg;
    cfg.n_cl = 15;
    cfg.n_neg = 10;
    cfg.lr = 2.0;
    cfg.gamma = 1.0;
    std::vector<double> lrs;
    const auto r = contrastive_finetune(inst.seed, inst.src, inst.tgt, am, cfg,
                                        [&](const EpochReport& e) { lrs.push_back(e.lr); });
    REQUIRE(r.losses.size() == 15);
    CHECK(r.losses.back() < r.losses.front());
    for (double lr : lrs) CHECK(lr == 2.0);
    CHECK(r.final_lr == 2.0);
    set_thread_count(3);
    const auto again = contrastive_finetune(inst.seed, inst.src, inst.tgt, am, cfg);
    set_thread_count(0);
    CHECK(again.maps.w_x == r.maps.w_x);
    CHECK(again.maps.w_y == r.maps.w_y);
  }
  SUBCASE("learning rate decays geometrically per epoch") {
    TrainConfig cfg;
    cfg.n_cl = 4;
    cfg.n_neg = 5;
    cfg.lr = 1.5;
    cfg.gamma = 0.5;
    std::vector<double> lrs;
    const auto r = contrastive_finetune(inst.seed, inst.src, inst.tgt, am, cfg,
                                        [&](const EpochReport& e) { lrs.push_back(e.lr); });
    CHECK(lrs == std::vector<double>{1.5, 0.75, 0.375, 0.1875});
    CHECK(r.final_lr == 0.09375);
  }
  SUBCASE("refresh interval controls re-mining") {
    TrainConfig cfg;
    cfg.n_cl = 5;
    cfg.n_neg = 5;
    cfg.refresh_interval = 2;
    std::vector<bool> remined;
    contrastive_finetune(inst.seed, inst.src, inst.tgt, am, cfg,
                         [&](const EpochReport& e) { remined.push_back(e.remined); });
    CHECK(remined == std::vector<bool>{true, false, true, false, true});
  }
  SUBCASE("divergence aborts with the epoch") {
    TrainConfig cfg;
    cfg.n_cl = 3;
    cfg.n_neg = 5;
    cfg.lr = 1e308;
    try {
      contrastive_finetune(inst.seed, inst.src, inst.tgt, am, cfg);
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.epoch() >= 1);
    } catch (const Error&) {
      // a zeroed or non-finite mapped vector can surface first
    }
  }
  SUBCASE("invalid configuration") {
    TrainConfig cfg;
    cfg.gamma = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.gamma = 0.9;
    cfg.tau = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
  }
}

}  // TEST_SUITE
