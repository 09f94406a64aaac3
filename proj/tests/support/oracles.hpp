#pragma once

// Reference implementations used by the unit and acceptance tests. Each one
// recomputes a library result from first principles, without sharing code
// with the implementation under test.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "xlel/bm25.hpp"
#include "xlel/corpus.hpp"
#include "xlel/kbx.hpp"
#include "xlel/qid.hpp"
#include "xlel/splits.hpp"

namespace xlel::testing {

// ---------------------------------------------------------------------------
// Wikidata items

struct SynthItem {
  std::uint64_t qid = 0;
  std::map<std::string, std::vector<std::uint64_t>> item_claims;  // property -> item values
  std::set<std::string> other_claims;                             // properties with non-item values
  std::map<std::string, std::string> sitelinks;                   // language -> title
};

/// Standard dump JSON for an item.
std::string item_line(const SynthItem& item);

/// Random items drawn so that every rule branch is exercised.
std::vector<SynthItem> random_items(std::size_t n, std::mt19937_64& rng, const std::vector<kbx::ExclusionRule>& rules);

/// Candidate rule applied literally, then the leaf filter.
std::set<std::uint64_t> oracle_events(const std::vector<SynthItem>& items, const std::vector<kbx::ExclusionRule>& rules,
                                      const std::set<std::string>& languages);

// ---------------------------------------------------------------------------
// Graphs

/// Connected components by breadth-first search; each sorted, list sorted by first member.
std::vector<std::vector<Qid>> bfs_components(const std::vector<Qid>& nodes, const std::set<QidPair>& edges);

/// Follows each redirect until it reaches an article or a cycle member.
std::map<std::string, std::string> iterate_redirects(const std::map<std::string, std::string>& raw);

// ---------------------------------------------------------------------------
// BM25

struct OracleHit {
  std::size_t doc = 0;
  double score = 0.0;
};

/// Scores every document straight from the formulas, then sorts by score
/// descending and doc index ascending.
std::vector<OracleHit> oracle_rank(const std::vector<std::vector<std::string>>& docs,
                                   const std::vector<std::string>& query, bm25::Variant variant,
                                   const bm25::Params& params);

double oracle_idf_plus(std::size_t n_docs, std::size_t df);

/// Empty when the ranking equals the oracle's top-k: scores agree within
/// `rel_tol`, and documents agree except inside groups of tied scores, which
/// must still be in ascending doc order. Otherwise a description of the mismatch.
std::string compare_rankings(const std::vector<OracleHit>& oracle, const std::vector<bm25::RankedDoc>& got,
                             double rel_tol);

// ---------------------------------------------------------------------------
// Splits

/// Replays assign_splits: shuffle with the shared RNG, then greedy deficit.
std::map<Qid, splits::Split> replay_assignment(std::vector<splits::EventSequence> sequences,
                                              const splits::Fractions& fractions, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Corpus

/// A mention with contexts padded to the requested code-point length.
corpus::Mention make_mention(std::string language, std::string page, std::size_t offset, std::string surface, Qid gold,
                             std::size_t context_length = 200);

/// Reference segmentation for letter/digit runs and single ideographs.
std::vector<std::string> reference_segmentation(const std::string& text);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Copies the input files of the miniature fixture (not its outputs).
void copy_fixture_inputs(const std::filesystem::path& from, const std::filesystem::path& to);

/// Relative paths of golden files that are missing from `out` or differ.
std::vector<std::string> golden_mismatches(const std::filesystem::path& golden, const std::filesystem::path& out);

/// Every regular file under `dir` except the root manifest, by relative path.
std::map<std::string, std::string> tree_contents(const std::filesystem::path& dir);

}  // namespace xlel::testing
