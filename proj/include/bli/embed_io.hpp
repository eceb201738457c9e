#pragma once

#include "bli/embedding.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace bli {

struct TextLoadReport {
  Index duplicates_skipped = 0;
  Index malformed_rows = 0;
  bool header_found = false;
};

/// Reads a fastText-style text file: optional "<count> <dim>" header, then
/// one "word v1 ... vd" line per word, most frequent first. Keeps the first
/// max_vocab valid rows. Repeated words keep their first occurrence; rows
/// with an unparsable number are skipped with a warning carrying the line
/// number. A dimension mismatch or an all-zero vector is fatal (ParseError).
VocabEmbedding load_embeddings_text(const std::filesystem::path& path, Index max_vocab,
                                    TextLoadReport* report = nullptr);

void write_embeddings_text(const VocabEmbedding& emb, const std::filesystem::path& path,
                           bool with_header = true);

/// Rows divided by their Euclidean norm (no mean-centering). Throws on a
/// zero row, naming the word.
VocabEmbedding l2_normalize(const VocabEmbedding& emb);
void l2_normalize_rows(Matrix& m);

// BLIV exchange format, little-endian:
//   "BLIV" | u32 version=1 | u32 vocab_count | u32 dim
//   vocab_count × (u32 byte_length, UTF-8 bytes)
//   vocab_count × dim float32, row-major
inline constexpr std::uint32_t kBlivVersion = 1;

void write_binary(const VocabEmbedding& emb, const std::filesystem::path& path);
VocabEmbedding read_binary(const std::filesystem::path& path);
std::vector<char> encode_binary(const VocabEmbedding& emb);
VocabEmbedding decode_binary(const std::vector<char>& bytes);

/// True if the file starts with the BLIV magic.
bool is_binary_embedding_file(const std::filesystem::path& path);
/// Dispatches on the magic bytes and keeps the first max_vocab words.
VocabEmbedding load_embeddings(const std::filesystem::path& path, Index max_vocab);

/// A square matrix wrapped as a BLIV file; rows are labelled "0".."d-1".
void write_matrix_binary(const Matrix& m, const std::filesystem::path& path);
Matrix read_matrix_binary(const std::filesystem::path& path);

struct DictionaryLoad {
  BilingualDictionary dictionary;
  std::size_t lines = 0;
  std::size_t oov_pairs = 0;
  std::size_t duplicates = 0;
  std::size_t malformed = 0;
};

/// "src<TAB>tgt" per line (a single space is accepted as separator too).
/// Out-of-vocabulary pairs are counted and dropped; throws if nothing
/// survives.
DictionaryLoad load_dictionary_tsv(const std::filesystem::path& path, const VocabEmbedding& src,
                                   const VocabEmbedding& tgt);

void write_dictionary_tsv(const BilingualDictionary& dict, const VocabEmbedding& src,
                          const VocabEmbedding& tgt, const std::filesystem::path& path);

/// One word per line.
void write_word_list(const VocabEmbedding& emb, const std::filesystem::path& path);

}  // namespace bli
