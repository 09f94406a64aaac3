#include "xlel/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <json.hpp>
#include <set>
#include <sstream>

#include "xlel/errors.hpp"

namespace xlel::eval {

using ojson = nlohmann::ordered_json;

namespace {

constexpr double kEps = 1e-12;

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

double fraction(std::size_t hits, std::size_t n) {
  return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
}

struct Tally {
  std::size_t n = 0;
  std::size_t top1 = 0;
  std::map<std::size_t, std::size_t> hits;
};

void add(Tally& t, std::optional<std::size_t> rank, std::span<const std::size_t> ks) {
  ++t.n;
  if (rank && *rank == 1) ++t.top1;
  for (std::size_t k : ks) {
    auto& h = t.hits[k];
    if (rank && *rank <= k) ++h;
  }
}

std::map<std::size_t, double> recalls(const Tally& t) {
  std::map<std::size_t, double> out;
  for (const auto& [k, h] : t.hits) out[k] = fraction(h, t.n);
  return out;
}

ojson recall_json(const std::map<std::size_t, double>& r) {
  ojson j = ojson::object();
  for (const auto& [k, v] : r) j[std::to_string(k)] = v;
  return j;
}

std::set<std::string> run_ids(const RunFile& run) {
  std::set<std::string> ids;
  for (const auto& r : run.results) ids.insert(r.mention_id);
  return ids;
}

}  // namespace

std::string_view to_string(Task t) { return t == Task::crosslingual ? "crosslingual" : "multilingual"; }

Task parse_task(std::string_view text) {
  if (text == "multilingual") return Task::multilingual;
  if (text == "crosslingual") return Task::crosslingual;
  throw_config("unknown task '" + std::string(text) + "' (expected multilingual|crosslingual)");
}

RunIndex::RunIndex(std::span<const RetrievalResult> results) {
  for (const auto& r : results) {
    if (!by_id_.emplace(r.mention_id, &r).second) throw_data("duplicate mention_id '" + r.mention_id + "' in run");
  }
}

const RetrievalResult* RunIndex::find(std::string_view mention_id) const {
  const auto it = by_id_.find(std::string(mention_id));
  return it == by_id_.end() ? nullptr : it->second;
}

std::optional<std::size_t> gold_rank(const RetrievalResult* result, Qid gold) {
  if (result == nullptr) return std::nullopt;
  for (std::size_t i = 0; i < result->ranked.size(); ++i) {
    if (result->ranked[i].qid == gold) return i + 1;
  }
  return std::nullopt;
}

std::map<std::size_t, double> recall_at_k(const RunIndex& run, std::span<const corpus::Mention> gold,
                                          std::span<const std::size_t> ks, std::size_t* missing) {
  Tally t;
  std::size_t absent = 0;
  for (const auto& m : gold) {
    const RetrievalResult* r = run.find(m.id);
    if (r == nullptr) ++absent;
    add(t, gold_rank(r, m.gold), ks);
  }
  if (missing != nullptr) *missing = absent;
  return recalls(t);
}

double accuracy(const RunIndex& run, std::span<const corpus::Mention> gold) {
  std::size_t hits = 0;
  for (const auto& m : gold) {
    const auto rank = gold_rank(run.find(m.id), m.gold);
    if (rank && *rank == 1) ++hits;
  }
  return fraction(hits, gold.size());
}

Breakdown breakdown(const RunIndex& run, std::span<const corpus::Mention> gold, std::span<const std::size_t> ks) {
  std::map<std::string, Tally> by_lang;
  std::map<corpus::Bucket, Tally> by_bucket;
  for (const auto& m : gold) {
    const auto rank = gold_rank(run.find(m.id), m.gold);
    add(by_lang[m.language], rank, ks);
    add(by_bucket[m.bucket], rank, ks);
  }
  Breakdown b;
  for (const auto& [lang, t] : by_lang) b.per_language.push_back(LanguageRow{lang, t.n, fraction(t.top1, t.n), recalls(t)});
  std::stable_sort(b.per_language.begin(), b.per_language.end(),
                   [](const LanguageRow& x, const LanguageRow& y) { return x.n < y.n; });
  for (corpus::Bucket bucket : corpus::kAllBuckets) {
    const auto it = by_bucket.find(bucket);
    if (it == by_bucket.end()) continue;
    b.per_bucket.push_back(BucketRow{bucket, it->second.n, fraction(it->second.top1, it->second.n)});
  }
  return b;
}

EvalReport evaluate(const RunFile& run, std::span<const corpus::Mention> gold, std::span<const std::size_t> ks,
                    std::string run_id, Task task) {
  std::vector<std::size_t> sorted_ks(ks.begin(), ks.end());
  std::sort(sorted_ks.begin(), sorted_ks.end());
  sorted_ks.erase(std::unique(sorted_ks.begin(), sorted_ks.end()), sorted_ks.end());
  if (sorted_ks.empty() || sorted_ks.front() == 0) throw_config("recall cutoffs must be positive");

  const RunIndex index(run.results);
  EvalReport report;
  report.run_id = std::move(run_id);
  report.task = task;
  report.n_mentions = gold.size();
  report.recall_at = recall_at_k(index, gold, sorted_ks, &report.missing);
  report.accuracy = accuracy(index, gold);
  report.schema_warnings = run.warnings.size();
  for (const auto& r : run.results) report.candidate_depth = std::max(report.candidate_depth, r.k);
  report.breakdown = breakdown(index, gold, sorted_ks);
  return report;
}

std::vector<std::string> check_invariants(const EvalReport& report) {
  std::vector<std::string> problems;
  double prev = -1.0;
  for (const auto& [k, r] : report.recall_at) {
    if (r < 0.0 || r > 1.0) problems.push_back("Recall@" + std::to_string(k) + " outside [0, 1]");
    if (r + kEps < prev) problems.push_back("Recall@" + std::to_string(k) + " below a smaller cutoff");
    if (report.accuracy > r + kEps) problems.push_back("accuracy exceeds Recall@" + std::to_string(k));
    prev = r;
  }
  if (const auto it = report.recall_at.find(1); it != report.recall_at.end()) {
    if (std::abs(it->second - report.accuracy) > kEps) problems.push_back("accuracy differs from Recall@1");
  }
  std::size_t total = 0;
  for (const auto& row : report.breakdown.per_language) total += row.n;
  if (total != report.n_mentions) problems.push_back("per-language counts do not sum to n_mentions");
  for (std::size_t i = 1; i < report.breakdown.per_language.size(); ++i) {
    if (report.breakdown.per_language[i - 1].n > report.breakdown.per_language[i].n) {
      problems.push_back("per-language rows not in ascending mention order");
      break;
    }
  }
  return problems;
}

std::vector<std::string> check_rerank(const RunFile& retrieval, const RunFile& reranked,
                                      std::span<const corpus::Mention> gold) {
  std::vector<std::string> problems;
  const RunIndex base(retrieval.results);
  const RunIndex rr(reranked.results);
  std::size_t depth = 0;
  for (const auto& r : retrieval.results) depth = std::max(depth, r.k);
  for (const auto& r : reranked.results) {
    const RetrievalResult* b = base.find(r.mention_id);
    if (b == nullptr) {
      problems.push_back(r.mention_id + ": reranked mention absent from retrieval run");
      continue;
    }
    std::set<Qid> allowed;
    for (const auto& c : b->ranked) allowed.insert(c.qid);
    for (const auto& c : r.ranked) {
      if (allowed.count(c.qid) == 0) {
        problems.push_back(r.mention_id + ": candidate " + c.qid.str() + " not in retrieval list");
        break;
      }
    }
  }
  if (depth > 0) {
    const std::size_t ks[] = {depth};
    const double bound = recall_at_k(base, gold, ks).at(depth);
    if (accuracy(rr, gold) > bound + kEps) problems.push_back("reranked accuracy exceeds retrieval Recall@depth");
  }
  return problems;
}

std::string to_json(const EvalReport& report) {
  ojson j;
  j["run_id"] = report.run_id;
  j["task"] = to_string(report.task);
  j["n_mentions"] = report.n_mentions;
  j["missing"] = report.missing;
  j["schema_warnings"] = report.schema_warnings;
  j["candidate_depth"] = report.candidate_depth;
  j["accuracy"] = report.accuracy;
  j["recall_at"] = recall_json(report.recall_at);
  ojson langs = ojson::array();
  for (const auto& row : report.breakdown.per_language) {
    langs.push_back({{"language", row.language}, {"n", row.n}, {"accuracy", row.accuracy},
                     {"recall_at", recall_json(row.recall_at)}});
  }
  j["per_language"] = std::move(langs);
  ojson buckets = ojson::array();
  for (const auto& row : report.breakdown.per_bucket) {
    buckets.push_back({{"bucket", corpus::to_string(row.bucket)}, {"n", row.n}, {"accuracy", row.accuracy}});
  }
  j["per_bucket"] = std::move(buckets);
  return j.dump(2) + "\n";
}

std::string per_language_tsv(const EvalReport& report) {
  std::ostringstream out;
  out << "language\tn\taccuracy";
  for (const auto& [k, r] : report.recall_at) out << "\trecall@" << k;
  out << '\n';
  for (const auto& row : report.breakdown.per_language) {
    out << row.language << '\t' << row.n << '\t' << fixed(row.accuracy);
    for (const auto& [k, r] : report.recall_at) {
      const auto it = row.recall_at.find(k);
      out << '\t' << fixed(it == row.recall_at.end() ? 0.0 : it->second);
    }
    out << '\n';
  }
  return out.str();
}

std::string per_bucket_tsv(const EvalReport& report) {
  std::ostringstream out;
  out << "bucket\tn\taccuracy\n";
  for (const auto& row : report.breakdown.per_bucket) {
    out << corpus::to_string(row.bucket) << '\t' << row.n << '\t' << fixed(row.accuracy) << '\n';
  }
  return out.str();
}

RunDelta compare_runs(const RunFile& base, const RunFile& other, std::span<const corpus::Mention> gold,
                      std::string subset) {
  if (run_ids(base) != run_ids(other)) throw_data("runs cover different mention sets; cannot compare");
  const RunIndex a(base.results);
  const RunIndex b(other.results);
  RunDelta d;
  d.subset = std::move(subset);
  d.n = gold.size();
  d.accuracy_base = accuracy(a, gold);
  d.accuracy_other = accuracy(b, gold);
  d.delta_points = (d.accuracy_other - d.accuracy_base) * 100.0;
  return d;
}

std::string to_json(const RunDelta& delta) {
  ojson j;
  j["subset"] = delta.subset;
  j["n"] = delta.n;
  j["accuracy_base"] = delta.accuracy_base;
  j["accuracy_other"] = delta.accuracy_other;
  j["delta_points"] = delta.delta_points;
  return j.dump(2) + "\n";
}

}  // namespace xlel::eval
