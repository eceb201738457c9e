#include "bli/embedding.hpp"

#include <string>
#include <unordered_set>

namespace bli {

VocabEmbedding::VocabEmbedding(std::vector<std::string> words, Matrix matrix)
    : words_(std::move(words)), matrix_(std::move(matrix)) {
  if (static_cast<Index>(words_.size()) != matrix_.rows()) {
    throw Error("vocabulary has " + std::to_string(words_.size()) + " words but matrix has " +
                std::to_string(matrix_.rows()) + " rows");
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<Index>(i)).second) {
      throw Error("duplicate word in vocabulary: " + words_[i]);
    }
  }
}

std::optional<Index> VocabEmbedding::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VocabEmbedding VocabEmbedding::with_matrix(Matrix matrix) const {
  if (matrix.rows() != size()) throw Error("with_matrix: row count mismatch");
  VocabEmbedding out;
  out.words_ = words_;
  out.index_ = index_;
  out.matrix_ = std::move(matrix);
  return out;
}

VocabEmbedding VocabEmbedding::head(Index n) const {
  n = std::min(n, size());
  return VocabEmbedding(std::vector<std::string>(words_.begin(), words_.begin() + n),
                        matrix_.topRows(n));
}

bool BilingualDictionary::add(Index src, Index tgt, PairOrigin origin) {
  if (contains(src, tgt)) return false;
  lookup_[key(src, tgt)].push_back(pairs_.size());
  pairs_.push_back({src, tgt});
  origins_.push_back(origin);
  return true;
}

bool BilingualDictionary::contains(Index src, Index tgt) const {
  auto it = lookup_.find(key(src, tgt));
  if (it == lookup_.end()) return false;
  for (std::size_t i : it->second) {
    if (pairs_[i].src == src && pairs_[i].tgt == tgt) return true;
  }
  return false;
}

std::vector<Index> BilingualDictionary::distinct_sources() const {
  std::vector<Index> out;
  std::unordered_set<Index> seen;
  for (const auto& p : pairs_) {
    if (seen.insert(p.src).second) out.push_back(p.src);
  }
  return out;
}

void BilingualDictionary::check_bounds(Index src_size, Index tgt_size) const {
  for (const auto& p : pairs_) {
    if (p.src < 0 || p.src >= src_size || p.tgt < 0 || p.tgt >= tgt_size) {
      throw Error("dictionary pair (" + std::to_string(p.src) + ", " + std::to_string(p.tgt) +
                  ") out of vocabulary range");
    }
  }
}

BilingualDictionary BilingualDictionary::merged_with(const BilingualDictionary& other) const {
  BilingualDictionary out = *this;
  for (std::size_t i = 0; i < other.size(); ++i) {
    out.add(other.pairs_[i].src, other.pairs_[i].tgt, other.origins_[i]);
  }
  return out;
}

Matrix gather_rows(const Matrix& m, const std::vector<Index>& indices) {
  Matrix out(static_cast<Index>(indices.size()), m.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) out.row(static_cast<Index>(i)) = m.row(indices[i]);
  return out;
}

std::pair<Matrix, Matrix> dictionary_rows(const BilingualDictionary& dict, const Matrix& x,
                                          const Matrix& y) {
  dict.check_bounds(x.rows(), y.rows());
  std::vector<Index> src, tgt;
  src.reserve(dict.size());
  tgt.reserve(dict.size());
  for (const auto& p : dict.pairs()) {
    src.push_back(p.src);
    tgt.push_back(p.tgt);
  }
  return {gather_rows(x, src), gather_rows(y, tgt)};
}

}  // namespace bli
