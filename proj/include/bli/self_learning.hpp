#pragma once

#include "bli/contrastive.hpp"
#include "bli/embedding.hpp"
#include "bli/retrieval.hpp"

#include <functional>

namespace bli {

struct C1Config {
  int n_iter = 2;
  Index n_freq = 60000;   // augmentation candidates come from the n_freq most frequent words
  Index n_aug = 10000;    // pairs taken per induction direction
  bool supervised = true; // contrastive dictionary: D_0 (true) or D_{i-1} (false)
  Index csls_k = kCslsNeighbors;
  TrainConfig train;

  /// 5k-pair (supervised) hyperparameters.
  static C1Config preset_5k();
  /// 1k-pair (semi-supervised) hyperparameters.
  static C1Config preset_1k();

  void validate() const;
};

/// One direction's candidate: the CSLS-best counterpart of a query word.
struct ScoredPair {
  WordPair pair;
  double score;  // full CSLS: 2m − r_X(y) − r_Y(x)
};

/// Forward (source→target) and backward (target→source) CSLS-best pairs
/// among the n_freq most frequent words of each side, each list sorted by
/// descending score (ties: lower source, then lower target index).
struct InductionCandidates {
  std::vector<ScoredPair> forward;
  std::vector<ScoredPair> backward;
};

InductionCandidates induce_candidates(const Matrix& x_mapped, const Matrix& y_mapped,
                                      Index n_freq, Index csls_k = kCslsNeighbors);

/// Takes the top n_aug pairs of each direction, unions them without
/// duplicates, then drops pairs already in d0 and pairs that contradict d0:
/// the source word is paired with a different target in d0, or the target
/// word with a different source. Origins record the direction that proposed
/// the pair (forward wins when both did).
BilingualDictionary augment_dictionary(const BilingualDictionary& d0, const Matrix& x_mapped,
                                       const Matrix& y_mapped, Index n_freq, Index n_aug,
                                       Index csls_k = kCslsNeighbors);

struct IterationReport {
  int iteration = 0;  // 1-based
  double loss = 0.0;  // InfoNCE loss of the maps leaving this iteration, on d_cl
  std::size_t d_add = 0;
  const BilingualDictionary* d_cl = nullptr;
  const BilingualDictionary* d_i = nullptr;
};

struct C1Result {
  LinearMapPair maps;
  BilingualDictionary dictionary;  // final D_i = D_0 ∪ D_add
};

using IterationObserver = std::function<void(const IterationReport&)>;

/// Self-learning loop: Advanced Mapping on D_{i-1}, contrastive fine-tuning
/// on D_CL, then augmentation D_i = D_0 ∪ D_add. x and y must be
/// l2-normalized.
C1Result run_c1(const VocabEmbedding& x, const VocabEmbedding& y, const BilingualDictionary& d0,
                const C1Config& cfg, const IterationObserver& observer = {},
                const EpochObserver& epoch_observer = {});

}  // namespace bli
