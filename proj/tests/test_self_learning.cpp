#include <doctest.h>

#include "bli/linear_mapping.hpp"
#include "bli/self_learning.hpp"
#include "bli/synthetic.hpp"
#include "oracles.hpp"

#include <set>

using namespace bli;

namespace {

// Augmentation written from the definition: full CSLS argmax per word in
// both directions, global sort, top n_aug each, union, then the seed filter.
std::set<std::pair<Index, Index>> augment_oracle(const BilingualDictionary& d0, const Matrix& xm,
                                                 const Matrix& ym, Index n_freq, Index n_aug,
                                                 Index k) {
  const Matrix xf = xm.topRows(n_freq), yf = ym.topRows(n_freq);
  const auto r_x = oracle::knn_mean_cos(xf, yf, k);
  const auto r_y = oracle::knn_mean_cos(yf, xf, k);
  auto csls = [&](Index s, Index t) {
    return 2 * oracle::cosine_ld(xf, s, yf, t) - r_x[static_cast<std::size_t>(t)] -
           r_y[static_cast<std::size_t>(s)];
  };
  struct Cand {
    long double score;
    Index s, t;
  };
  std::vector<Cand> fwd, bwd;
  for (Index s = 0; s < n_freq; ++s) {
    Index best = 0;
    for (Index t = 1; t < n_freq; ++t)
      if (csls(s, t) > csls(s, best)) best = t;
    fwd.push_back({csls(s, best), s, best});
  }
  for (Index t = 0; t < n_freq; ++t) {
    Index best = 0;
    for (Index s = 1; s < n_freq; ++s)
      if (csls(s, t) > csls(best, t)) best = s;
    bwd.push_back({csls(best, t), best, t});
  }
  auto by_score = [](const Cand& a, const Cand& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::pair(a.s, a.t) < std::pair(b.s, b.t);
  };
  std::sort(fwd.begin(), fwd.end(), by_score);
  std::sort(bwd.begin(), bwd.end(), by_score);
  std::set<std::pair<Index, Index>> out;
  for (const auto* list : {&fwd, &bwd}) {
    for (Index i = 0; i < n_aug; ++i) {
      const auto& c = (*list)[static_cast<std::size_t>(i)];
      bool drop = d0.contains(c.s, c.t);
      for (const auto& p : d0.pairs()) {
        if ((p.src == c.s && p.tgt != c.t) || (p.tgt == c.t && p.src != c.s)) drop = true;
      }
      if (!drop) out.insert({c.s, c.t});
    }
  }
  return out;
}

std::set<std::pair<Index, Index>> as_set(const BilingualDictionary& d) {
  std::set<std::pair<Index, Index>> s;
  for (const auto& p : d.pairs()) s.insert({p.src, p.tgt});
  return s;
}

SyntheticInstance small_instance(double sigma, Index vocab = 200, Index dim = 12) {
  SyntheticSpec spec;
  spec.vocab_size = vocab;
  spec.dim = dim;
  spec.noise_sigma = sigma;
  spec.seed_pairs = 40;
  spec.test_pairs = 60;
  return gen_synthetic_pair(spec);
}

C1Config tiny_config() {
  C1Config cfg;
  cfg.n_iter = 2;
  cfg.n_freq = 150;
  cfg.n_aug = 50;
  cfg.train.n_cl = 5;
  cfg.train.n_neg = 8;
  return cfg;
}

}  // namespace

TEST_SUITE("self_learning") {

TEST_CASE("augment with n_aug = 0 adds nothing") {
  std::mt19937_64 rng(1);
  const Matrix x = oracle::random_unit_rows(20, 4, rng);
  BilingualDictionary d0;
  d0.add(0, 0);
  CHECK(augment_dictionary(d0, x, x, 20, 0).empty());
}

TEST_CASE("identical spaces induce the diagonal") {
  std::mt19937_64 rng(2);
  const Matrix x = oracle::random_unit_rows(30, 6, rng);
  BilingualDictionary d0;
  d0.add(0, 0);
  const auto cand = induce_candidates(x, x, 30, 5);
  for (const auto& c : cand.forward) CHECK(c.pair.src == c.pair.tgt);
  for (const auto& c : cand.backward) CHECK(c.pair.src == c.pair.tgt);
  const auto added = augment_dictionary(d0, x, x, 30, 30, 5);
  CHECK(added.size() == 29);
  CHECK_FALSE(added.contains(0, 0));
}

TEST_CASE("augment equals the definition oracle, including contradictions") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 8; ++trial) {
    const Matrix xm = oracle::random_unit_rows(40, 5, rng);
    const Matrix ym = oracle::random_unit_rows(40, 5, rng);
    const Index n_freq = 30, n_aug = 4 + trial;
    // seed pairs that collide with candidates on one side only
    const auto cand = induce_candidates(xm, ym, n_freq, 10);
    BilingualDictionary d0;
    d0.add(cand.forward[0].pair.src, (cand.forward[0].pair.tgt + 1) % 40);
    d0.add((cand.backward[0].pair.src + 1) % 40, cand.backward[0].pair.tgt);
    d0.add(cand.forward[1].pair.src, cand.forward[1].pair.tgt);
    d0.add(35, 38);
    const auto added = augment_dictionary(d0, xm, ym, n_freq, n_aug, 10);
    CHECK(as_set(added) == augment_oracle(d0, xm, ym, n_freq, n_aug, 10));
    CHECK(added.size() <= static_cast<std::size_t>(2 * n_aug));
    for (const auto& p : added.pairs()) {
      CHECK(p.src < n_freq);
      CHECK(p.tgt < n_freq);
      CHECK_FALSE(d0.contains(p.src, p.tgt));
    }
    for (auto o : added.origins()) CHECK(o != PairOrigin::Seed);
  }
}

TEST_CASE("candidates are sorted and carry the full CSLS score") {
  std::mt19937_64 rng(4);
  const Matrix xm = oracle::random_unit_rows(25, 4, rng);
  const Matrix ym = oracle::random_unit_rows(25, 4, rng);
  const auto cand = induce_candidates(xm, ym, 25, 10);
  const auto r_x = oracle::knn_mean_cos(xm, ym, 10);
  const auto r_y = oracle::knn_mean_cos(ym, xm, 10);
  for (std::size_t i = 0; i < cand.forward.size(); ++i) {
    const auto& c = cand.forward[i];
    const long double expected = 2 * oracle::cosine_ld(xm, c.pair.src, ym, c.pair.tgt) -
                                 r_x[static_cast<std::size_t>(c.pair.tgt)] -
                                 r_y[static_cast<std::size_t>(c.pair.src)];
    CHECK(std::abs(c.score - static_cast<double>(expected)) <= 1e-12);
    if (i > 0) CHECK(cand.forward[i - 1].score >= c.score);
  }
}

TEST_CASE("n_aug above n_freq is clamped with a warning; n_freq above the vocabulary throws") {
  std::mt19937_64 rng(5);
  const Matrix x = oracle::random_unit_rows(20, 4, rng);
  BilingualDictionary d0;
  d0.add(0, 0);
  std::string warned;
  set_log_sink([&](std::string_view m) { warned += std::string(m); });
  const auto added = augment_dictionary(d0, x, x, 10, 50, 3);
  set_log_sink({});
  CHECK(warned.find("clamped") != std::string::npos);
  CHECK(added.size() == 9);
  CHECK_THROWS_AS(augment_dictionary(d0, x, x, 21, 5, 3), Error);
}

TEST_CASE("run_c1 with no epochs and no augmentation is Advanced Mapping") {
  const auto inst = small_instance(0.05);
  C1Config cfg = tiny_config();
  cfg.n_iter = 1;
  cfg.n_aug = 0;
  cfg.train.n_cl = 0;
  const auto res = run_c1(inst.src, inst.tgt, inst.seed, cfg);
  const auto am = advanced_mapping(inst.seed, inst.src, inst.tgt);
  CHECK((res.maps.w_x - am.w_x).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((res.maps.w_y - am.w_y).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(res.dictionary == inst.seed);
}

TEST_CASE("without augmentation extra iterations change nothing") {
  const auto inst = small_instance(0.05);
  C1Config cfg = tiny_config();
  cfg.n_aug = 0;
  cfg.n_iter = 1;
  const auto one = run_c1(inst.src, inst.tgt, inst.seed, cfg);
  cfg.n_iter = 3;
  const auto three = run_c1(inst.src, inst.tgt, inst.seed, cfg);
  CHECK(one.maps.w_x == three.maps.w_x);
  CHECK(one.maps.w_y == three.maps.w_y);
}

TEST_CASE("iteration reports and the supervised switch") {
  const auto inst = small_instance(0.05);
  for (bool supervised : {true, false}) {
    CAPTURE(supervised);
    C1Config cfg = tiny_config();
    cfg.supervised = supervised;
    std::vector<std::size_t> d_cl_sizes, d_i_sizes;
    std::vector<int> iters;
    BilingualDictionary d1;
    const auto res = run_c1(inst.src, inst.tgt, inst.seed, cfg, [&](const IterationReport& r) {
      iters.push_back(r.iteration);
      d_cl_sizes.push_back(r.d_cl->size());
      d_i_sizes.push_back(r.d_i->size());
      CHECK(r.d_i->size() == inst.seed.size() + r.d_add);
      CHECK(std::isfinite(r.loss));
      for (const auto& p : inst.seed.pairs()) CHECK(r.d_i->contains(p.src, p.tgt));
      if (r.iteration == 1) d1 = *r.d_i;
    });
    CHECK(iters == std::vector<int>{1, 2});
    CHECK(d_cl_sizes[0] == inst.seed.size());
    if (supervised) {
      CHECK(d_cl_sizes[1] == inst.seed.size());
    } else {
      CHECK(d_cl_sizes[1] == d1.size());
      CHECK(d1.size() > inst.seed.size());
    }
    CHECK(res.dictionary.size() == d_i_sizes.back());
  }
}

TEST_CASE("run_c1 input checks") {
  const auto inst = small_instance(0.05);
  const auto raw = inst.src.with_matrix(inst.src.matrix() * 2.0);
  CHECK_THROWS_AS(run_c1(raw, inst.tgt, inst.seed, tiny_config()), Error);
  CHECK_THROWS_AS(run_c1(inst.src, inst.tgt, BilingualDictionary{}, tiny_config()), Error);
}

TEST_CASE("presets") {
  const auto a = C1Config::preset_5k();
  CHECK(a.n_iter == 2);
  CHECK(a.n_freq == 60000);
  CHECK(a.n_aug == 10000);
  CHECK(a.supervised);
  CHECK(a.train.n_cl == 200);
  CHECK(a.train.n_neg == 150);
  CHECK(a.train.lr == 1.5);
  CHECK(a.train.gamma == 0.99);
  CHECK(a.train.tau == 1.0);
  const auto b = C1Config::preset_1k();
  CHECK(b.n_iter == 3);
  CHECK(b.n_freq == 20000);
  CHECK(b.n_aug == 6000);
  CHECK_FALSE(b.supervised);
  CHECK(b.train.n_cl == 50);
  CHECK(b.train.n_neg == 60);
  CHECK(b.train.lr == 2.0);
  CHECK(b.train.gamma == 1.0);
  CHECK(b.csls_k == 10);
}

}  // TEST_SUITE
