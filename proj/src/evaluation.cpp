#include "bli/evaluation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

namespace bli {

EvalReport evaluate(const BilingualDictionary& test, const Rankings& rankings, Index depth) {
  if (test.empty()) throw Error("evaluate: empty test dictionary");
  std::map<Index, std::vector<Index>> gold;
  for (const auto& p : test.pairs()) gold[p.src].push_back(p.tgt);

  EvalReport report;
  double hits = 0.0, rr = 0.0;
  for (Index src : test.distinct_sources()) {
    auto it = rankings.find(src);
    if (it == rankings.end() || it->second.empty()) {
      throw Error("evaluate: no ranking for source word " + std::to_string(src));
    }
    const auto& ranked = it->second;
    const auto& golds = gold[src];
    QueryResult q{src, ranked.front(), golds, std::nullopt};
    const std::size_t limit =
        depth > 0 ? std::min(ranked.size(), static_cast<std::size_t>(depth)) : ranked.size();
    for (std::size_t r = 0; r < limit; ++r) {
      if (std::find(golds.begin(), golds.end(), ranked[r]) != golds.end()) {
        q.gold_rank = static_cast<Index>(r + 1);
        break;
      }
    }
    if (q.gold_rank == 1) hits += 1.0;
    if (q.gold_rank) rr += 1.0 / static_cast<double>(*q.gold_rank);
    report.per_query.push_back(std::move(q));
  }
  report.n_queries = static_cast<Index>(report.per_query.size());
  report.p_at_1 = hits / static_cast<double>(report.n_queries);
  report.mrr = rr / static_cast<double>(report.n_queries);
  return report;
}

Rankings rank_test_queries(const BilingualDictionary& test, const Matrix& src_space,
                           const Matrix& tgt_space, const RankingOptions& opts) {
  test.check_bounds(src_space.rows(), tgt_space.rows());
  const auto sources = test.distinct_sources();
  const Matrix queries = gather_rows(src_space, sources);
  const Index depth = std::min(std::max<Index>(1, opts.depth), tgt_space.rows());
  TopK top;
  if (opts.scoring == Scoring::Csls) {
    const auto stats = compute_csls_stats(src_space, tgt_space, opts.csls_k, opts.measure);
    top = csls_topk(queries, tgt_space, stats, depth);
  } else {
    top = nn_topk(queries, tgt_space, depth, opts.measure);
  }
  Rankings out;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    auto row = top.row(static_cast<Index>(i));
    out[sources[i]] = std::vector<Index>(row.begin(), row.end());
  }
  return out;
}

std::string format_report(const EvalReport& report) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "p_at_1=%.6f\nmrr=%.6f\nn_queries=%lld\n", report.p_at_1,
                report.mrr, static_cast<long long>(report.n_queries));
  return buf;
}

void write_report_json(const EvalReport& report, const VocabEmbedding& src,
                       const VocabEmbedding& tgt, const std::filesystem::path& path) {
  nlohmann::json j;
  j["p_at_1"] = report.p_at_1;
  j["mrr"] = report.mrr;
  j["n_queries"] = report.n_queries;
  auto& rows = j["per_query"] = nlohmann::json::array();
  for (const auto& q : report.per_query) {
    nlohmann::json g = nlohmann::json::array();
    for (Index t : q.gold) g.push_back(tgt.word(t));
    rows.push_back({{"source", src.word(q.source)},
                    {"predicted", tgt.word(q.predicted)},
                    {"gold", g},
                    {"gold_rank", q.gold_rank ? nlohmann::json(*q.gold_rank) : nlohmann::json()}});
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace bli
