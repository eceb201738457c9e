#include "bli/synthetic.hpp"

#include "bli/embed_io.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

namespace bli {
namespace {

Matrix gaussian(Index rows, Index cols, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, sigma);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

Matrix orthogonal_from(std::mt19937_64& rng, Index n) {
  const Matrix g = gaussian(n, n, 1.0, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix column signs so Q is Haar distributed.
  for (Index j = 0; j < n; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (vocab_size < 1 || dim < 1) throw Error("synthetic: vocab_size and dim must be positive");
  if (noise_sigma < 0.0) throw Error("synthetic: noise_sigma must be >= 0");
  if (seed_pairs < 0 || test_pairs < 0) throw Error("synthetic: pair counts must be >= 0");
  if (seed_pairs + test_pairs > vocab_size) {
    throw Error("synthetic: seed_pairs + test_pairs exceeds vocab_size");
  }
}

Matrix random_orthogonal(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return orthogonal_from(rng, n);
}

SyntheticInstance gen_synthetic_pair(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.rng_seed);
  Matrix src = gaussian(spec.vocab_size, spec.dim, 1.0, rng);
  l2_normalize_rows(src);
  SyntheticInstance inst;
  inst.rotation = orthogonal_from(rng, spec.dim);
  Matrix tgt = src * inst.rotation;
  if (spec.noise_sigma > 0.0) tgt += gaussian(spec.vocab_size, spec.dim, spec.noise_sigma, rng);
  l2_normalize_rows(tgt);

  inst.translation.resize(static_cast<std::size_t>(spec.vocab_size));
  std::iota(inst.translation.begin(), inst.translation.end(), Index{0});
  if (spec.shuffle_target) std::shuffle(inst.translation.begin(), inst.translation.end(), rng);

  std::vector<std::string> src_words, tgt_words(static_cast<std::size_t>(spec.vocab_size));
  Matrix tgt_perm(spec.vocab_size, spec.dim);
  for (Index i = 0; i < spec.vocab_size; ++i) {
    src_words.push_back("s" + std::to_string(i));
    const Index t = inst.translation[static_cast<std::size_t>(i)];
    tgt_words[static_cast<std::size_t>(t)] = "t" + std::to_string(i);
    tgt_perm.row(t) = tgt.row(i);
  }
  inst.src = VocabEmbedding(std::move(src_words), std::move(src));
  inst.tgt = VocabEmbedding(std::move(tgt_words), std::move(tgt_perm));
  for (Index i = 0; i < spec.seed_pairs; ++i) inst.seed.add(i, inst.translation[static_cast<std::size_t>(i)]);
  for (Index i = spec.seed_pairs; i < spec.seed_pairs + spec.test_pairs; ++i) {
    inst.test.add(i, inst.translation[static_cast<std::size_t>(i)]);
  }
  return inst;
}

void write_synthetic(const SyntheticInstance& inst, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_embeddings_text(inst.src, dir / "src.vec");
  write_embeddings_text(inst.tgt, dir / "tgt.vec");
  write_dictionary_tsv(inst.seed, inst.src, inst.tgt, dir / "seed.tsv");
  write_dictionary_tsv(inst.test, inst.src, inst.tgt, dir / "test.tsv");
}

}  // namespace bli
