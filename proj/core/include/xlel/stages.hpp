#pragma once

// One function per pipeline stage. Each reads and writes files only, so the
// CLI subcommands and the orchestrator share the same code path.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xlel/bm25.hpp"
#include "xlel/corpus.hpp"
#include "xlel/evalkit.hpp"
#include "xlel/kbx.hpp"
#include "xlel/splits.hpp"
#include "xlel/wikitext.hpp"

namespace xlel::stages {

namespace fs = std::filesystem;

/// Counters written to the stage's manifest.json. For every entry in
/// `reconcile`, `kept + dropped == scanned` must hold.
struct StageReport {
  std::string stage;
  std::map<std::string, std::int64_t> counters;
  std::map<std::string, std::string> info;
  std::vector<std::string> outputs;

  struct Reconciliation {
    std::string name;
    std::int64_t scanned = 0;
    std::int64_t kept = 0;
    std::int64_t dropped = 0;
  };
  std::vector<Reconciliation> reconcile;

  bool reconciled() const;
};

std::string to_json(const StageReport& r);
/// Reads back a stage manifest.json (used for cache hits).
StageReport stage_report_from_json(std::string_view json);

struct KbxOptions {
  fs::path wikidata;
  std::optional<fs::path> rules;
  std::optional<fs::path> languages;
  std::optional<fs::path> pages;  // ingest output root: <pages>/<lang>/pages.jsonl
  fs::path out;
  unsigned jobs = 1;
};
StageReport run_kbx(const KbxOptions& o);

struct IngestOptions {
  fs::path dump;
  std::string language;
  wikitext::WikiKind kind = wikitext::WikiKind::wikipedia;
  std::optional<fs::path> date_patterns;
  fs::path out;
  unsigned jobs = 1;
};
StageReport run_ingest(const IngestOptions& o);

struct CorpusOptions {
  fs::path pages;   // directory of per-language ingest outputs
  fs::path events;  // kbx output directory
  fs::path out;
  bool wikinews = false;
  std::optional<fs::path> wikipedia_corpus;  // event set for --wikinews
  std::optional<fs::path> wikipedia_pages;   // Wikipedia redirects for --wikinews
  std::optional<fs::path> date_patterns;
  corpus::Thresholds thresholds;
  std::map<std::string, std::vector<std::string>> temporal_patterns;
};
StageReport run_corpus(const CorpusOptions& o);

struct SplitOptions {
  fs::path events;                    // kbx output directory
  std::optional<fs::path> corpus;     // restricts to surviving events
  std::optional<fs::path> wikinews;   // Wikinews corpus directory
  std::uint64_t seed = 13;
  splits::Fractions fractions;
  fs::path out;
};
StageReport run_split(const SplitOptions& o);

struct IndexOptions {
  fs::path events;                 // kbx output directory (descriptions.jsonl)
  std::optional<fs::path> corpus;  // restricts the pool to surviving events
  eval::Task task = eval::Task::multilingual;
  bm25::Variant variant = bm25::Variant::plus;
  bm25::Params params;
  std::optional<fs::path> vocab;
  fs::path out;
  unsigned jobs = 1;
};
/// Writes <out>/<lang>.bm25 per language (multilingual) or <out>/en.bm25.
/// `index` for retrieval is either such a directory or a single .bm25 file.
StageReport run_index(const IndexOptions& o);

struct RetrieveOptions {
  fs::path index;
  fs::path mentions;
  eval::Task task = eval::Task::multilingual;
  bm25::Variant variant = bm25::Variant::plus;
  std::optional<bm25::Params> params;
  std::size_t window = 16;
  std::size_t k = 8;
  bool meta = false;
  std::optional<fs::path> vocab;
  fs::path out;  // directory; receives run.jsonl
  unsigned jobs = 1;
};
StageReport run_retrieve(const RetrieveOptions& o);

struct EvalOptions {
  fs::path run;
  fs::path mentions;
  std::optional<fs::path> compare;
  std::optional<fs::path> splits;  // with `subset`, restricts gold mentions
  std::vector<splits::Split> subset;
  std::vector<std::size_t> ks{1, 4, 8, 16};
  eval::Task task = eval::Task::multilingual;
  std::string run_id;
  std::string subset_name = "all";
  fs::path out;
};
/// Writes report.json, per_language.tsv, per_bucket.tsv and, with `compare`,
/// delta.json. Throws DataError when the report breaks a metric invariant.
StageReport run_eval(const EvalOptions& o);

struct ExportOptions {
  fs::path corpus;
  fs::path splits;
  fs::path events;
  std::optional<fs::path> wikinews;  // split-stage directory with Wikinews sets
  fs::path out;
};
StageReport run_export(const ExportOptions& o);

/// Mentions whose gold is assigned to one of `wanted`.
std::vector<corpus::Mention> select_split(const std::vector<corpus::Mention>& mentions,
                                          const splits::SplitAssignment& assignment,
                                          const std::vector<splits::Split>& wanted);

}  // namespace xlel::stages
