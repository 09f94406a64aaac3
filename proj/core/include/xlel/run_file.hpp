#pragma once

// run.jsonl: one ranked candidate list per mention. Written by the BM25
// retriever and by external rerankers, read by the evaluator.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xlel/qid.hpp"

namespace xlel {

struct ScoredCandidate {
  Qid qid;
  double score = 0.0;
};

struct RetrievalResult {
  std::string mention_id;
  std::vector<ScoredCandidate> ranked;  // non-increasing score, distinct qids
  std::size_t k = 0;
};

std::string to_json_line(const RetrievalResult& r);

struct RunFile {
  std::vector<RetrievalResult> results;
  /// Schema deviations that were tolerated (unknown keys, unsorted scores,
  /// over-long lists, ...). Fatal problems throw instead.
  std::vector<std::string> warnings;
};

/// Throws DataError on unparseable lines, missing required keys, or a
/// duplicate mention id.
RunFile parse_run(std::string_view content, std::string_view source = "run");
RunFile read_run(const std::filesystem::path& path);
void write_run(const std::filesystem::path& path, std::span<const RetrievalResult> results);

}  // namespace xlel
