#pragma once

#include "bli/embedding.hpp"

#include <cstdint>
#include <filesystem>

namespace bli {

/// Rotated-copy bilingual instance with known ground truth.
struct SyntheticSpec {
  Index vocab_size = 2000;
  Index dim = 64;
  double noise_sigma = 0.01;
  Index seed_pairs = 200;
  Index test_pairs = 500;
  std::uint64_t rng_seed = 20220522;
  /// Permute the target vocabulary so that translations do not share an
  /// index with their source word.
  bool shuffle_target = false;

  void validate() const;
};

struct SyntheticInstance {
  VocabEmbedding src;
  VocabEmbedding tgt;
  BilingualDictionary seed;
  BilingualDictionary test;
  Matrix rotation;                 // the orthogonal R with tgt ≈ src·R
  std::vector<Index> translation;  // source index -> target index
};

/// Source rows ~ N(0, I) then l2-normalized; R from the QR decomposition of a
/// Gaussian matrix; target rows = src·R + N(0, σ²) then l2-normalized. Word i
/// translates to word i (up to the optional shuffle). seed = first
/// seed_pairs translations, test = the next test_pairs. Deterministic in
/// rng_seed.
SyntheticInstance gen_synthetic_pair(const SyntheticSpec& spec);

/// Writes src.vec, tgt.vec (text format), seed.tsv and test.tsv into dir.
void write_synthetic(const SyntheticInstance& inst, const std::filesystem::path& dir);

/// Haar-distributed random orthogonal n×n matrix from the given generator seed.
Matrix random_orthogonal(Index n, std::uint64_t seed);

}  // namespace bli
