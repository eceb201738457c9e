#include "bli/self_learning.hpp"

#include "bli/linear_mapping.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace bli {
namespace {

bool ranked_before(const ScoredPair& a, const ScoredPair& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.pair.src != b.pair.src) return a.pair.src < b.pair.src;
  return a.pair.tgt < b.pair.tgt;
}

void check_unit_rows(const VocabEmbedding& emb, const char* side) {
  for (Index i = 0; i < emb.size(); ++i) {
    if (std::abs(emb.row(i).norm() - 1.0) > 1e-6) {
      throw Error(std::string("run_c1: ") + side + " embeddings must be l2-normalized (word '" +
                  emb.word(i) + "')");
    }
  }
}

}  // namespace

C1Config C1Config::preset_5k() {
  C1Config c;
  c.n_iter = 2;
  c.n_freq = 60000;
  c.n_aug = 10000;
  c.supervised = true;
  c.train.n_cl = 200;
  c.train.n_neg = 150;
  c.train.lr = 1.5;
  c.train.gamma = 0.99;
  c.train.tau = 1.0;
  return c;
}

C1Config C1Config::preset_1k() {
  C1Config c;
  c.n_iter = 3;
  c.n_freq = 20000;
  c.n_aug = 6000;
  c.supervised = false;
  c.train.n_cl = 50;
  c.train.n_neg = 60;
  c.train.lr = 2.0;
  c.train.gamma = 1.0;
  c.train.tau = 1.0;
  return c;
}

void C1Config::validate() const {
  if (n_iter < 1) throw Error("n_iter must be >= 1");
  if (n_freq < 1) throw Error("n_freq must be >= 1");
  if (n_aug < 0) throw Error("n_aug must be >= 0");
  if (csls_k < 1) throw Error("csls_k must be >= 1");
  train.validate();
}

InductionCandidates induce_candidates(const Matrix& x_mapped, const Matrix& y_mapped,
                                      Index n_freq, Index csls_k) {
  if (n_freq > x_mapped.rows() || n_freq > y_mapped.rows()) {
    throw Error("n_freq=" + std::to_string(n_freq) + " exceeds a vocabulary size (" +
                std::to_string(x_mapped.rows()) + ", " + std::to_string(y_mapped.rows()) + ")");
  }
  if (n_freq < 2) throw Error("n_freq must be >= 2 for CSLS induction");
  const Index k = std::min(csls_k, n_freq - 1);
  const auto xf = x_mapped.topRows(n_freq);
  const auto yf = y_mapped.topRows(n_freq);
  const CslsStats r_x = compute_csls_stats(xf, yf, k);  // r_X(y) per target
  const CslsStats r_y = compute_csls_stats(yf, xf, k);  // r_Y(x) per source

  InductionCandidates out;
  const TopK fwd = csls_topk(xf, yf, r_x, 1);
  const TopK bwd = csls_topk(yf, xf, r_y, 1);
  out.forward.reserve(static_cast<std::size_t>(n_freq));
  out.backward.reserve(static_cast<std::size_t>(n_freq));
  for (Index s = 0; s < n_freq; ++s) {
    const Index t = fwd.row(s)[0];
    out.forward.push_back({{s, t}, fwd.row_scores(s)[0] - r_y.r_values(s)});
  }
  for (Index t = 0; t < n_freq; ++t) {
    const Index s = bwd.row(t)[0];
    out.backward.push_back({{s, t}, bwd.row_scores(t)[0] - r_x.r_values(t)});
  }
  std::sort(out.forward.begin(), out.forward.end(), ranked_before);
  std::sort(out.backward.begin(), out.backward.end(), ranked_before);
  return out;
}

BilingualDictionary augment_dictionary(const BilingualDictionary& d0, const Matrix& x_mapped,
                                       const Matrix& y_mapped, Index n_freq, Index n_aug,
                                       Index csls_k) {
  if (n_aug < 0) throw Error("n_aug must be >= 0");
  BilingualDictionary added;
  if (n_aug == 0) return added;
  if (n_aug > n_freq) {
    log_warning("n_aug=" + std::to_string(n_aug) + " exceeds n_freq=" + std::to_string(n_freq) +
                ", clamped");
    n_aug = n_freq;
  }
  const auto cand = induce_candidates(x_mapped, y_mapped, n_freq, csls_k);

  std::unordered_map<Index, std::vector<Index>> seed_targets, seed_sources;
  for (const auto& p : d0.pairs()) {
    seed_targets[p.src].push_back(p.tgt);
    seed_sources[p.tgt].push_back(p.src);
  }
  auto contradicts = [&](const WordPair& p) {
    if (auto it = seed_targets.find(p.src); it != seed_targets.end()) {
      for (Index t : it->second)
        if (t != p.tgt) return true;
    }
    if (auto it = seed_sources.find(p.tgt); it != seed_sources.end()) {
      for (Index s : it->second)
        if (s != p.src) return true;
    }
    return false;
  };

  BilingualDictionary proposed;
  for (Index i = 0; i < n_aug; ++i) {
    const auto& p = cand.forward[static_cast<std::size_t>(i)].pair;
    proposed.add(p.src, p.tgt, PairOrigin::ForwardAugmented);
  }
  for (Index i = 0; i < n_aug; ++i) {
    const auto& p = cand.backward[static_cast<std::size_t>(i)].pair;
    proposed.add(p.src, p.tgt, PairOrigin::BackwardAugmented);
  }
  for (std::size_t i = 0; i < proposed.size(); ++i) {
    const auto& p = proposed[i];
    if (d0.contains(p.src, p.tgt) || contradicts(p)) continue;
    added.add(p.src, p.tgt, proposed.origins()[i]);
  }
  return added;
}

C1Result run_c1(const VocabEmbedding& x, const VocabEmbedding& y, const BilingualDictionary& d0,
                const C1Config& cfg, const IterationObserver& observer,
                const EpochObserver& epoch_observer) {
  cfg.validate();
  if (d0.empty()) throw Error("run_c1: empty seed dictionary");
  if (x.dim() != y.dim()) throw Error("run_c1: source and target dimensions differ");
  d0.check_bounds(x.size(), y.size());
  check_unit_rows(x, "source");
  check_unit_rows(y, "target");

  C1Result result;
  BilingualDictionary previous = d0;
  for (int iter = 1; iter <= cfg.n_iter; ++iter) {
    LinearMapPair maps = advanced_mapping(previous, x, y);
    const BilingualDictionary& d_cl = cfg.supervised ? d0 : previous;
    maps = contrastive_finetune(d_cl, x, y, maps, cfg.train, epoch_observer).maps;

    const Matrix xm = apply_map(x.matrix(), maps.w_x);
    const Matrix ym = apply_map(y.matrix(), maps.w_y);
    double loss = NAN;
    if (cfg.train.n_neg < x.size() && cfg.train.n_neg < y.size()) {
      const auto pool = mine_hard_negatives(d_cl, xm, ym, cfg.train.n_neg);
      loss = infonce_loss(d_cl, pool, x.matrix(), y.matrix(), maps.w_x, maps.w_y, cfg.train.tau);
    }
    const auto d_add = augment_dictionary(d0, xm, ym, cfg.n_freq, cfg.n_aug, cfg.csls_k);
    BilingualDictionary current = d0.merged_with(d_add);
    if (observer) observer({iter, loss, d_add.size(), &d_cl, &current});
    result.maps = std::move(maps);
    previous = std::move(current);
  }
  result.dictionary = std::move(previous);
  return result;
}

}  // namespace bli
