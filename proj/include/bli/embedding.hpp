#pragma once

#include "bli/common.hpp"

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bli {

/// An ordered vocabulary paired with one embedding row per word.
///
/// Words are unique; row i of matrix() is the vector of words()[i]. File order
/// is frequency order, so a lower index means a more frequent word.
class VocabEmbedding {
 public:
  VocabEmbedding() = default;
  /// Throws bli::Error if words repeat or the row count differs from |words|.
  VocabEmbedding(std::vector<std::string> words, Matrix matrix);

  Index size() const { return static_cast<Index>(words_.size()); }
  Index dim() const { return matrix_.cols(); }
  bool empty() const { return words_.empty(); }

  const std::vector<std::string>& words() const { return words_; }
  const std::string& word(Index i) const { return words_[static_cast<std::size_t>(i)]; }
  const Matrix& matrix() const { return matrix_; }
  auto row(Index i) const { return matrix_.row(i); }

  std::optional<Index> find(const std::string& word) const;

  /// Same vocabulary, new matrix (row count must match).
  VocabEmbedding with_matrix(Matrix matrix) const;
  /// First n words (n clamped to size()).
  VocabEmbedding head(Index n) const;

 private:
  std::vector<std::string> words_;
  Matrix matrix_;
  std::unordered_map<std::string, Index> index_;
};

enum class PairOrigin { Seed, ForwardAugmented, BackwardAugmented };

struct WordPair {
  Index src;
  Index tgt;
  bool operator==(const WordPair&) const = default;
  auto operator<=>(const WordPair&) const = default;
};

/// Ordered relation between source and target vocabulary indices.
///
/// A source word may map to several targets and vice versa; exact duplicate
/// pairs are never stored.
class BilingualDictionary {
 public:
  BilingualDictionary() = default;

  /// Returns false (and stores nothing) if the pair is already present.
  bool add(Index src, Index tgt, PairOrigin origin = PairOrigin::Seed);
  bool contains(Index src, Index tgt) const;

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const std::vector<WordPair>& pairs() const { return pairs_; }
  const std::vector<PairOrigin>& origins() const { return origins_; }
  const WordPair& operator[](std::size_t i) const { return pairs_[i]; }

  /// Distinct source indices in first-appearance order.
  std::vector<Index> distinct_sources() const;

  /// Throws if any index falls outside [0, src_size) / [0, tgt_size).
  void check_bounds(Index src_size, Index tgt_size) const;

  /// this ∪ other, keeping this dictionary's pairs first.
  BilingualDictionary merged_with(const BilingualDictionary& other) const;

  bool operator==(const BilingualDictionary& o) const {
    return pairs_ == o.pairs_ && origins_ == o.origins_;
  }

 private:
  static std::uint64_t key(Index src, Index tgt) {
    return (static_cast<std::uint64_t>(src) << 32) ^ static_cast<std::uint64_t>(tgt);
  }

  std::vector<WordPair> pairs_;
  std::vector<PairOrigin> origins_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> lookup_;
};

/// Cross-lingual maps W_x (source) and W_y (target), both d×d.
struct LinearMapPair {
  Matrix w_x;
  Matrix w_y;

  static LinearMapPair identity(Index dim) {
    return {Matrix::Identity(dim, dim), Matrix::Identity(dim, dim)};
  }
};

/// Stacks the rows named by `indices`.
Matrix gather_rows(const Matrix& m, const std::vector<Index>& indices);

/// Source and target rows aligned with the dictionary pairs, in order.
std::pair<Matrix, Matrix> dictionary_rows(const BilingualDictionary& dict, const Matrix& x,
                                          const Matrix& y);

}  // namespace bli
