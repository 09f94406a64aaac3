#pragma once

// Scoring of prediction runs: Recall@k, unnormalized accuracy and breakdowns.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xlel/corpus.hpp"
#include "xlel/run_file.hpp"

namespace xlel::eval {

enum class Task { multilingual, crosslingual };
std::string_view to_string(Task t);
Task parse_task(std::string_view text);

inline constexpr std::size_t kDefaultKs[] = {1, 4, 8, 16};

/// Run results keyed by mention id.
class RunIndex {
 public:
  explicit RunIndex(std::span<const RetrievalResult> results);
  const RetrievalResult* find(std::string_view mention_id) const;
  std::size_t size() const { return by_id_.size(); }

 private:
  std::unordered_map<std::string, const RetrievalResult*> by_id_;
};

/// 1-based rank of `gold` in the result, or nullopt when absent/missing.
std::optional<std::size_t> gold_rank(const RetrievalResult* result, Qid gold);

/// Fraction of gold mentions whose gold qid is within the top k, per k.
/// Mentions absent from the run count as misses and are tallied in `missing`.
std::map<std::size_t, double> recall_at_k(const RunIndex& run, std::span<const corpus::Mention> gold,
                                          std::span<const std::size_t> ks,
                                          std::size_t* missing = nullptr);

/// Unnormalized accuracy: rank-1 equals gold, over all gold mentions.
double accuracy(const RunIndex& run, std::span<const corpus::Mention> gold);

struct LanguageRow {
  std::string language;
  std::size_t n = 0;
  double accuracy = 0.0;
  std::map<std::size_t, double> recall_at;
};

struct BucketRow {
  corpus::Bucket bucket = corpus::Bucket::low_overlap;
  std::size_t n = 0;
  double accuracy = 0.0;
};

struct Breakdown {
  std::vector<LanguageRow> per_language;  // ascending mention count, then code
  std::vector<BucketRow> per_bucket;      // bucket order, empty buckets omitted
};

Breakdown breakdown(const RunIndex& run, std::span<const corpus::Mention> gold,
                    std::span<const std::size_t> ks);

struct EvalReport {
  std::string run_id;
  Task task = Task::multilingual;
  std::map<std::size_t, double> recall_at;
  double accuracy = 0.0;
  std::size_t n_mentions = 0;
  std::size_t missing = 0;
  std::size_t schema_warnings = 0;
  std::size_t candidate_depth = 0;  // largest k recorded in the run
  Breakdown breakdown;
};

EvalReport evaluate(const RunFile& run, std::span<const corpus::Mention> gold,
                    std::span<const std::size_t> ks, std::string run_id, Task task);

/// Recall non-decreasing in k, accuracy <= every Recall@k, per-language
/// counts summing to n_mentions. Returns the violated conditions.
std::vector<std::string> check_invariants(const EvalReport& report);

/// A reranked run may only permute each mention's retrieved candidates, so
/// its accuracy is bounded by the retrieval run's Recall@depth. Returns the
/// violated conditions.
std::vector<std::string> check_rerank(const RunFile& retrieval, const RunFile& reranked,
                                      std::span<const corpus::Mention> gold);

std::string to_json(const EvalReport& report);
std::string per_language_tsv(const EvalReport& report);
std::string per_bucket_tsv(const EvalReport& report);

struct RunDelta {
  std::string subset;
  std::size_t n = 0;
  double accuracy_base = 0.0;
  double accuracy_other = 0.0;
  double delta_points = 0.0;  // (other - base) * 100
};

/// Accuracy of two runs over the same mentions (e.g. without and with
/// Wikinews meta). Throws DataError when the runs cover different mention sets.
RunDelta compare_runs(const RunFile& base, const RunFile& other, std::span<const corpus::Mention> gold,
                      std::string subset);

std::string to_json(const RunDelta& delta);

}  // namespace xlel::eval
