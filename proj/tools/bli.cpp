// bli: command-line front end for mapping, fusion, evaluation and data export.

#include "bli/contrastive.hpp"
#include "bli/embed_io.hpp"
#include "bli/evaluation.hpp"
#include "bli/fusion.hpp"
#include "bli/linear_mapping.hpp"
#include "bli/self_learning.hpp"
#include "bli/synthetic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

namespace fs = std::filesystem;
using namespace bli;

namespace {

constexpr Index kDefaultMaxVocab = 200000;

struct TrainArgs {
  std::string src, tgt, seed, test, out_dir, mode = "5k";
  Index max_vocab = kDefaultMaxVocab;
  std::optional<int> n_iter, n_cl, refresh;
  std::optional<Index> n_neg, n_freq, n_aug;
  std::optional<double> lr, gamma, tau;
  std::optional<bool> supervised;
  bool verbose = false;
};

struct FuseArgs {
  std::string c1_src, c1_tgt, c2_src, c2_tgt, seed, out_dir;
  double lambda = kDefaultLambda;
  Index max_vocab = kDefaultMaxVocab;
};

struct EvalArgs {
  std::string src, tgt, test, out, json, scoring = "csls";
  Index csls_k = kCslsNeighbors;
  Index depth = 100;
  Index max_vocab = kDefaultMaxVocab;
};

struct ExportArgs {
  std::string src, tgt, seed, out;
  Index top_n = 4000;
  Index n_neg = 28;
  Index n_freq = 20000;
  Index max_vocab = kDefaultMaxVocab;
};

struct SynthArgs {
  SyntheticSpec spec;
  std::string out_dir;
};

struct VocabArgs {
  std::string emb, out;
  Index max_vocab = kDefaultMaxVocab;
};

Index clamp_n_freq(Index n_freq, const VocabEmbedding& x, const VocabEmbedding& y) {
  const Index limit = std::min(x.size(), y.size());
  if (n_freq > limit) {
    log_warning("n_freq=" + std::to_string(n_freq) + " exceeds the vocabulary size, using " +
                std::to_string(limit));
    return limit;
  }
  return n_freq;
}

void report_dictionary_load(const std::string& path, const DictionaryLoad& d) {
  log_info(path + ": " + std::to_string(d.dictionary.size()) + " pairs (" +
           std::to_string(d.oov_pairs) + " oov, " + std::to_string(d.duplicates) +
           " duplicate, " + std::to_string(d.malformed) + " malformed lines)");
}

void write_eval(const EvalReport& rep, const VocabEmbedding& src, const VocabEmbedding& tgt,
                const fs::path& txt, const std::string& json) {
  std::ofstream out(txt);
  if (!out) throw Error("cannot write " + txt.string());
  out << format_report(rep);
  if (!json.empty()) write_report_json(rep, src, tgt, json);
}

C1Config build_config(const TrainArgs& a) {
  C1Config cfg = a.mode == "1k" ? C1Config::preset_1k() : C1Config::preset_5k();
  if (a.n_iter) cfg.n_iter = *a.n_iter;
  if (a.n_cl) cfg.train.n_cl = *a.n_cl;
  if (a.refresh) cfg.train.refresh_interval = *a.refresh;
  if (a.n_neg) cfg.train.n_neg = *a.n_neg;
  if (a.n_freq) cfg.n_freq = *a.n_freq;
  if (a.n_aug) cfg.n_aug = *a.n_aug;
  if (a.lr) cfg.train.lr = *a.lr;
  if (a.gamma) cfg.train.gamma = *a.gamma;
  if (a.tau) cfg.train.tau = *a.tau;
  if (a.supervised) cfg.supervised = *a.supervised;
  return cfg;
}

int cmd_train_c1(const TrainArgs& a) {
  const auto x = l2_normalize(load_embeddings(a.src, a.max_vocab));
  const auto y = l2_normalize(load_embeddings(a.tgt, a.max_vocab));
  const auto seed = load_dictionary_tsv(a.seed, x, y);
  report_dictionary_load(a.seed, seed);

  C1Config cfg = build_config(a);
  cfg.n_freq = clamp_n_freq(cfg.n_freq, x, y);
  log_info("config: n_iter=" + std::to_string(cfg.n_iter) + " n_cl=" + std::to_string(cfg.train.n_cl) +
           " n_neg=" + std::to_string(cfg.train.n_neg) + " n_freq=" + std::to_string(cfg.n_freq) +
           " n_aug=" + std::to_string(cfg.n_aug) + " lr=" + std::to_string(cfg.train.lr) +
           " gamma=" + std::to_string(cfg.train.gamma) + " tau=" + std::to_string(cfg.train.tau) +
           " supervised=" + (cfg.supervised ? "1" : "0"));

  EpochObserver on_epoch;
  if (a.verbose) {
    on_epoch = [](const EpochReport& e) {
      std::fprintf(stderr, "  epoch=%d loss=%.6f lr=%.6g\n", e.epoch, e.loss, e.lr);
    };
  }
  const auto res = run_c1(
      x, y, seed.dictionary, cfg,
      [](const IterationReport& r) {
        std::fprintf(stderr, "iter=%d loss=%.6f d_add=%zu\n", r.iteration, r.loss, r.d_add);
      },
      on_epoch);

  const fs::path out(a.out_dir);
  fs::create_directories(out);
  write_matrix_binary(res.maps.w_x, out / "w_x.bliv");
  write_matrix_binary(res.maps.w_y, out / "w_y.bliv");
  const auto xm = apply_map(x, res.maps.w_x);
  const auto ym = apply_map(y, res.maps.w_y);
  write_binary(xm, out / "src_mapped.bliv");
  write_binary(ym, out / "tgt_mapped.bliv");
  write_dictionary_tsv(res.dictionary, x, y, out / "dictionary.tsv");

  if (!a.test.empty()) {
    const auto test = load_dictionary_tsv(a.test, x, y);
    report_dictionary_load(a.test, test);
    RankingOptions opts;
    opts.depth = 100;
    const auto rep = evaluate(test.dictionary,
                              rank_test_queries(test.dictionary, xm.matrix(), ym.matrix(), opts));
    write_eval(rep, x, y, out / "eval.txt", (out / "eval.json").string());
    std::fprintf(stderr, "%s", format_report(rep).c_str());
  }
  return 0;
}

int cmd_fuse(const FuseArgs& a) {
  const auto c1x = load_embeddings(a.c1_src, a.max_vocab);
  const auto c1y = load_embeddings(a.c1_tgt, a.max_vocab);
  const auto c2x = load_embeddings(a.c2_src, a.max_vocab);
  const auto c2y = load_embeddings(a.c2_tgt, a.max_vocab);
  const auto seed = load_dictionary_tsv(a.seed, c1x, c1y);
  report_dictionary_load(a.seed, seed);
  FusionMap fmap;
  const auto [fx, fy] = fuse_spaces(c1x, c1y, c2x, c2y, seed.dictionary, a.lambda, &fmap);
  const fs::path out(a.out_dir);
  fs::create_directories(out);
  write_binary(fx, out / "fused_src.bliv");
  write_binary(fy, out / "fused_tgt.bliv");
  write_matrix_binary(fmap.w, out / "fusion_w.bliv");
  return 0;
}

int cmd_evaluate(const EvalArgs& a) {
  const auto src = load_embeddings(a.src, a.max_vocab);
  const auto tgt = load_embeddings(a.tgt, a.max_vocab);
  const auto test = load_dictionary_tsv(a.test, src, tgt);
  report_dictionary_load(a.test, test);
  RankingOptions opts;
  opts.scoring = a.scoring == "nn" ? Scoring::Nn : Scoring::Csls;
  opts.csls_k = a.csls_k;
  opts.depth = a.depth;
  const auto rep =
      evaluate(test.dictionary, rank_test_queries(test.dictionary, src.matrix(), tgt.matrix(), opts));
  if (a.out.empty()) {
    std::cout << format_report(rep);
    if (!a.json.empty()) write_report_json(rep, src, tgt, a.json);
  } else {
    write_eval(rep, src, tgt, a.out, a.json);
  }
  return 0;
}

std::string join_words(const VocabEmbedding& emb, const std::vector<Index>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ' ';
    s += emb.word(ids[i]);
  }
  return s;
}

int cmd_export_candidates(const ExportArgs& a) {
  const auto xm = l2_normalize(load_embeddings(a.src, a.max_vocab));
  const auto ym = l2_normalize(load_embeddings(a.tgt, a.max_vocab));
  const auto seed = load_dictionary_tsv(a.seed, xm, ym);
  report_dictionary_load(a.seed, seed);
  const Index n_freq = clamp_n_freq(a.n_freq, xm, ym);

  const auto cand = induce_candidates(xm.matrix(), ym.matrix(), n_freq);
  std::vector<ScoredPair> merged = cand.forward;
  merged.insert(merged.end(), cand.backward.begin(), cand.backward.end());
  std::stable_sort(merged.begin(), merged.end(), [](const ScoredPair& l, const ScoredPair& r) {
    if (l.score != r.score) return l.score > r.score;
    return l.pair < r.pair;
  });

  BilingualDictionary rows = seed.dictionary;
  std::vector<double> scores(rows.size(), NAN);
  Index taken = 0;
  for (const auto& c : merged) {
    if (taken >= a.top_n) break;
    if (seed.dictionary.contains(c.pair.src, c.pair.tgt)) continue;
    if (rows.add(c.pair.src, c.pair.tgt, PairOrigin::ForwardAugmented)) {
      scores.push_back(c.score);
      ++taken;
    }
  }
  if (taken < a.top_n) {
    log_warning("only " + std::to_string(taken) + " candidates available (requested " +
                std::to_string(a.top_n) + ")");
  }
  const auto pool = mine_hard_negatives(rows, xm.matrix(), ym.matrix(), a.n_neg);

  std::ofstream out(a.out);
  if (!out) throw Error("cannot write " + a.out);
  out << "src\ttgt\torigin\tscore\tneg_src\tneg_tgt\n";
  char buf[32];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool is_seed = rows.origins()[i] == PairOrigin::Seed;
    std::snprintf(buf, sizeof buf, "%.9g", scores[i]);
    out << xm.word(rows[i].src) << '\t' << ym.word(rows[i].tgt) << '\t'
        << (is_seed ? "seed" : "candidate") << '\t' << (is_seed ? "" : buf) << '\t'
        << join_words(xm, pool.neg_x[i]) << '\t' << join_words(ym, pool.neg_y[i]) << '\n';
  }
  log_info("wrote " + std::to_string(seed.dictionary.size()) + " seed and " +
           std::to_string(taken) + " candidate rows to " + a.out);
  return 0;
}

int cmd_gen_synthetic(const SynthArgs& a) {
  const auto inst = gen_synthetic_pair(a.spec);
  write_synthetic(inst, a.out_dir);
  return 0;
}

int cmd_vocab(const VocabArgs& a) {
  write_word_list(load_embeddings(a.emb, a.max_vocab), a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bilingual lexicon induction: mapping, fusion, evaluation"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: $BLI_THREADS or all cores)");

  TrainArgs tr;
  auto* train = app.add_subcommand("train-c1", "fit the mapping with contrastive self-learning");
  train->add_option("--src-emb", tr.src, "source embeddings (text or BLIV)")->required()->check(CLI::ExistingFile);
  train->add_option("--tgt-emb", tr.tgt, "target embeddings (text or BLIV)")->required()->check(CLI::ExistingFile);
  train->add_option("--seed-dict", tr.seed, "seed dictionary TSV")->required()->check(CLI::ExistingFile);
  train->add_option("--test-dict", tr.test, "held-out dictionary to evaluate on")->check(CLI::ExistingFile);
  train->add_option("--out-dir", tr.out_dir, "output directory")->required();
  train->add_option("--mode", tr.mode, "hyperparameter preset")->check(CLI::IsMember({"5k", "1k"}));
  train->add_option("--max-vocab", tr.max_vocab, "words kept per language")->check(CLI::PositiveNumber);
  train->add_option("--n-iter", tr.n_iter);
  train->add_option("--n-cl", tr.n_cl);
  train->add_option("--n-neg", tr.n_neg);
  train->add_option("--n-freq", tr.n_freq);
  train->add_option("--n-aug", tr.n_aug);
  train->add_option("--lr", tr.lr);
  train->add_option("--gamma", tr.gamma);
  train->add_option("--tau", tr.tau);
  train->add_option("--refresh-interval", tr.refresh);
  train->add_option("--supervised", tr.supervised, "contrastive dictionary is the seed (1) or the previous D_i (0)");
  train->add_flag("--verbose", tr.verbose, "log every epoch");

  FuseArgs fu;
  auto* fuse = app.add_subcommand("fuse", "combine the mapped spaces with a second embedding space");
  fuse->add_option("--c1-src", fu.c1_src)->required()->check(CLI::ExistingFile);
  fuse->add_option("--c1-tgt", fu.c1_tgt)->required()->check(CLI::ExistingFile);
  fuse->add_option("--c2-src", fu.c2_src)->required()->check(CLI::ExistingFile);
  fuse->add_option("--c2-tgt", fu.c2_tgt)->required()->check(CLI::ExistingFile);
  fuse->add_option("--seed-dict", fu.seed)->required()->check(CLI::ExistingFile);
  fuse->add_option("--lambda", fu.lambda)->check(CLI::Range(0.0, 1.0));
  fuse->add_option("--max-vocab", fu.max_vocab)->check(CLI::PositiveNumber);
  fuse->add_option("--out-dir", fu.out_dir)->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("evaluate", "P@1 and MRR of a shared space on a test dictionary");
  eval->add_option("--src", ev.src)->required()->check(CLI::ExistingFile);
  eval->add_option("--tgt", ev.tgt)->required()->check(CLI::ExistingFile);
  eval->add_option("--test-dict", ev.test)->required()->check(CLI::ExistingFile);
  eval->add_option("--scoring", ev.scoring)->check(CLI::IsMember({"csls", "nn"}));
  eval->add_option("--csls-k", ev.csls_k)->check(CLI::PositiveNumber);
  eval->add_option("--depth", ev.depth, "ranking depth for MRR")->check(CLI::PositiveNumber);
  eval->add_option("--max-vocab", ev.max_vocab)->check(CLI::PositiveNumber);
  eval->add_option("--out", ev.out, "report file (default: stdout)");
  eval->add_option("--json", ev.json, "per-query JSON report");

  ExportArgs ex;
  auto* exp = app.add_subcommand("export-candidates", "positives and hard negatives for LM fine-tuning");
  exp->add_option("--src", ex.src, "mapped source space")->required()->check(CLI::ExistingFile);
  exp->add_option("--tgt", ex.tgt, "mapped target space")->required()->check(CLI::ExistingFile);
  exp->add_option("--seed-dict", ex.seed)->required()->check(CLI::ExistingFile);
  exp->add_option("--top-n", ex.top_n)->check(CLI::NonNegativeNumber);
  exp->add_option("--n-neg", ex.n_neg)->check(CLI::NonNegativeNumber);
  exp->add_option("--n-freq", ex.n_freq)->check(CLI::PositiveNumber);
  exp->add_option("--max-vocab", ex.max_vocab)->check(CLI::PositiveNumber);
  exp->add_option("--out", ex.out)->required();

  SynthArgs sy;
  auto* synth = app.add_subcommand("gen-synthetic", "write a rotated-copy instance with known translations");
  synth->add_option("--vocab-size", sy.spec.vocab_size)->check(CLI::PositiveNumber);
  synth->add_option("--dim", sy.spec.dim)->check(CLI::PositiveNumber);
  synth->add_option("--noise", sy.spec.noise_sigma)->check(CLI::NonNegativeNumber);
  synth->add_option("--seed-pairs", sy.spec.seed_pairs);
  synth->add_option("--test-pairs", sy.spec.test_pairs);
  synth->add_option("--rng-seed", sy.spec.rng_seed);
  synth->add_flag("--shuffle-target", sy.spec.shuffle_target);
  synth->add_option("--out-dir", sy.out_dir)->required();

  VocabArgs vo;
  auto* vocab = app.add_subcommand("vocab", "write the word list of an embedding file");
  vocab->add_option("--emb", vo.emb)->required()->check(CLI::ExistingFile);
  vocab->add_option("--max-vocab", vo.max_vocab)->check(CLI::PositiveNumber);
  vocab->add_option("--out", vo.out)->required();

  CLI11_PARSE(app, argc, argv);
  set_thread_count(threads);

  try {
    if (train->parsed()) return cmd_train_c1(tr);
    if (fuse->parsed()) return cmd_fuse(fu);
    if (eval->parsed()) return cmd_evaluate(ev);
    if (exp->parsed()) return cmd_export_candidates(ex);
    if (synth->parsed()) return cmd_gen_synthetic(sy);
    if (vocab->parsed()) return cmd_vocab(vo);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
