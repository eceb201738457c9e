#include "bli/embed_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string_view>
#include <unordered_set>

namespace bli {
namespace {

static_assert(std::endian::native == std::endian::little,
              "BLIV encoding assumes a little-endian host");

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view tok, double& out) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool is_integer(std::string_view tok) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path,
                       std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void put_u32(std::vector<char>& buf, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  buf.insert(buf.end(), b, b + 4);
}

class Reader {
 public:
  explicit Reader(const std::vector<char>& bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (pos_ + n > bytes_.size()) {
      throw ParseError("BLIV payload truncated at byte offset " + std::to_string(pos_) +
                       " while reading " + what);
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }
  std::string str(std::size_t n) {
    need(n, "word bytes");
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t size() const { return bytes_.size(); }

 private:
  const std::vector<char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

VocabEmbedding load_embeddings_text(const std::filesystem::path& path, Index max_vocab,
                                    TextLoadReport* report) {
  if (max_vocab <= 0) throw Error("max_vocab must be positive");
  auto in = open_in(path);
  TextLoadReport rep;
  std::vector<std::string> words;
  std::vector<double> values;
  std::unordered_set<std::string> seen;
  Index dim = -1;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> row;

  while (static_cast<Index>(words.size()) < max_vocab && std::getline(in, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (line_no == 1 && toks.size() == 2 && is_integer(toks[0]) && is_integer(toks[1])) {
      rep.header_found = true;
      continue;
    }
    const Index row_dim = static_cast<Index>(toks.size()) - 1;
    if (dim < 0) {
      if (row_dim <= 0) throw ParseError(path.string() + ":" + std::to_string(line_no) + ": no vector values");
      dim = row_dim;
    } else if (row_dim != dim) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(dim) + " values, found " + std::to_string(row_dim));
    }
    row.assign(static_cast<std::size_t>(dim), 0.0);
    bool ok = true;
    double norm2 = 0.0;
    for (Index j = 0; j < dim; ++j) {
      if (!parse_double(toks[static_cast<std::size_t>(j + 1)], row[static_cast<std::size_t>(j)])) {
        log_warning(path.string() + ":" + std::to_string(line_no) + ": malformed number '" +
                    std::string(toks[static_cast<std::size_t>(j + 1)]) + "', row skipped");
        ++rep.malformed_rows;
        ok = false;
        break;
      }
      norm2 += row[static_cast<std::size_t>(j)] * row[static_cast<std::size_t>(j)];
    }
    if (!ok) continue;
    std::string word(toks[0]);
    if (!seen.insert(word).second) {
      ++rep.duplicates_skipped;
      continue;
    }
    if (norm2 == 0.0) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": zero vector for '" + word +
                       "' cannot be normalized");
    }
    words.push_back(std::move(word));
    values.insert(values.end(), row.begin(), row.end());
  }
  if (dim < 0) dim = 0;
  Matrix m = Eigen::Map<Matrix>(values.data(), static_cast<Index>(words.size()), dim);
  if (report) *report = rep;
  return VocabEmbedding(std::move(words), std::move(m));
}

void write_embeddings_text(const VocabEmbedding& emb, const std::filesystem::path& path,
                           bool with_header) {
  auto out = open_out(path);
  if (with_header) out << emb.size() << ' ' << emb.dim() << '\n';
  out << std::setprecision(17);
  for (Index i = 0; i < emb.size(); ++i) {
    out << emb.word(i);
    for (Index j = 0; j < emb.dim(); ++j) out << ' ' << emb.matrix()(i, j);
    out << '\n';
  }
}

void l2_normalize_rows(Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n == 0.0) throw Error("zero-norm row " + std::to_string(i));
    m.row(i) /= n;
  }
}

VocabEmbedding l2_normalize(const VocabEmbedding& emb) {
  Matrix m = emb.matrix();
  for (Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n == 0.0 || !std::isfinite(n)) {
      throw Error("cannot l2-normalize zero vector of word '" + emb.word(i) + "'");
    }
    m.row(i) /= n;
  }
  return emb.with_matrix(std::move(m));
}

std::vector<char> encode_binary(const VocabEmbedding& emb) {
  std::vector<char> buf{'B', 'L', 'I', 'V'};
  put_u32(buf, kBlivVersion);
  put_u32(buf, static_cast<std::uint32_t>(emb.size()));
  put_u32(buf, static_cast<std::uint32_t>(emb.size() == 0 ? 0 : emb.dim()));
  for (const auto& w : emb.words()) {
    put_u32(buf, static_cast<std::uint32_t>(w.size()));
    buf.insert(buf.end(), w.begin(), w.end());
  }
  for (Index i = 0; i < emb.size(); ++i) {
    for (Index j = 0; j < emb.dim(); ++j) {
      put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(emb.matrix()(i, j))));
    }
  }
  return buf;
}

VocabEmbedding decode_binary(const std::vector<char>& bytes) {
  Reader r(bytes);
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), "BLIV", 4) != 0) throw ParseError("bad BLIV magic");
  (void)r.str(4);
  const auto version = r.u32("version");
  if (version != kBlivVersion) throw ParseError("unsupported BLIV version " + std::to_string(version));
  const auto count = r.u32("vocab_count");
  const auto dim = r.u32("dim");
  std::vector<std::string> words;
  words.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = r.u32("word length");
    words.push_back(r.str(len));
  }
  const std::size_t n_values = static_cast<std::size_t>(count) * dim;
  r.need(n_values * 4, "matrix values");
  Matrix m(count, dim);
  const char* p = bytes.data() + r.pos();
  for (std::size_t k = 0; k < n_values; ++k) {
    std::uint32_t u;
    std::memcpy(&u, p + 4 * k, 4);
    m.data()[k] = static_cast<double>(std::bit_cast<float>(u));
  }
  if (r.pos() + n_values * 4 != r.size()) {
    throw ParseError("BLIV file has " + std::to_string(r.size() - r.pos() - n_values * 4) +
                     " trailing bytes");
  }
  return VocabEmbedding(std::move(words), std::move(m));
}

void write_binary(const VocabEmbedding& emb, const std::filesystem::path& path) {
  const auto buf = encode_binary(emb);
  auto out = open_out(path, std::ios::binary);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("write failed: " + path.string());
}

VocabEmbedding read_binary(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_binary(bytes);
}

bool is_binary_embedding_file(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::memcmp(magic, "BLIV", 4) == 0;
}

VocabEmbedding load_embeddings(const std::filesystem::path& path, Index max_vocab) {
  if (is_binary_embedding_file(path)) {
    auto emb = read_binary(path);
    return emb.size() > max_vocab ? emb.head(max_vocab) : emb;
  }
  return load_embeddings_text(path, max_vocab);
}

void write_matrix_binary(const Matrix& m, const std::filesystem::path& path) {
  std::vector<std::string> labels;
  for (Index i = 0; i < m.rows(); ++i) labels.push_back(std::to_string(i));
  write_binary(VocabEmbedding(std::move(labels), m), path);
}

Matrix read_matrix_binary(const std::filesystem::path& path) { return read_binary(path).matrix(); }

DictionaryLoad load_dictionary_tsv(const std::filesystem::path& path, const VocabEmbedding& src,
                                   const VocabEmbedding& tgt) {
  auto in = open_in(path);
  DictionaryLoad out;
  std::string line;
  while (std::getline(in, line)) {
    ++out.lines;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto toks = split_ws(line);
    if (toks.size() != 2) {
      log_warning(path.string() + ":" + std::to_string(out.lines) + ": malformed dictionary line skipped");
      ++out.malformed;
      continue;
    }
    auto s = src.find(std::string(toks[0]));
    auto t = tgt.find(std::string(toks[1]));
    if (!s || !t) {
      ++out.oov_pairs;
      continue;
    }
    if (!out.dictionary.add(*s, *t, PairOrigin::Seed)) ++out.duplicates;
  }
  if (out.dictionary.empty()) {
    throw Error("dictionary " + path.string() + " has no in-vocabulary pairs (" +
                std::to_string(out.oov_pairs) + " OOV)");
  }
  if (out.oov_pairs > 0) {
    log_info(path.string() + ": dropped " + std::to_string(out.oov_pairs) + " out-of-vocabulary pairs");
  }
  return out;
}

void write_dictionary_tsv(const BilingualDictionary& dict, const VocabEmbedding& src,
                          const VocabEmbedding& tgt, const std::filesystem::path& path) {
  dict.check_bounds(src.size(), tgt.size());
  auto out = open_out(path);
  for (const auto& p : dict.pairs()) out << src.word(p.src) << '\t' << tgt.word(p.tgt) << '\n';
}

void write_word_list(const VocabEmbedding& emb, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& w : emb.words()) out << w << '\n';
}

}  // namespace bli
