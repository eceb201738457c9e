#pragma once

#include "bli/embedding.hpp"
#include "bli/retrieval.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bli {

/// Ranked target indices per source word.
using Rankings = std::map<Index, std::vector<Index>>;

struct QueryResult {
  Index source = 0;
  Index predicted = 0;
  std::vector<Index> gold;
  std::optional<Index> gold_rank;  // 1-based, within depth
};

struct EvalReport {
  double p_at_1 = 0.0;
  double mrr = 0.0;
  Index n_queries = 0;
  std::vector<QueryResult> per_query;
};

/// P@1 and MRR over the distinct source words of `test`. Every target listed
/// for a source word counts as gold. depth truncates the rankings for MRR
/// (0 = use the full ranking).
EvalReport evaluate(const BilingualDictionary& test, const Rankings& rankings, Index depth = 0);

enum class Scoring { Nn, Csls };

struct RankingOptions {
  Scoring scoring = Scoring::Csls;
  Measure measure = Measure::Cosine;
  Index csls_k = kCslsNeighbors;
  Index depth = 1;
};

/// Retrieves rankings over the whole target vocabulary for every distinct
/// source word of `test`. Both spaces must already live in a shared space.
Rankings rank_test_queries(const BilingualDictionary& test, const Matrix& src_space,
                           const Matrix& tgt_space, const RankingOptions& opts);

/// key=value lines: p_at_1, mrr, n_queries.
std::string format_report(const EvalReport& report);
/// JSON with the summary plus per-query detail (words resolved through the
/// vocabularies).
void write_report_json(const EvalReport& report, const VocabEmbedding& src,
                       const VocabEmbedding& tgt, const std::filesystem::path& path);

}  // namespace bli
