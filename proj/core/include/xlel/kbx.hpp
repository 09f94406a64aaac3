#pragma once

// Event identification over a Wikidata entity dump.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xlel/qid.hpp"

namespace xlel::wikitext {
struct PageText;
}

namespace xlel::kbx {

/// Property IDs consulted by the event rules. Labels are localized on
/// Wikidata, IDs are stable, so everything is keyed by ID.
struct PropertyMap {
  std::string instance_of = "P31";
  std::string duration = "P2047";
  std::string point_in_time = "P585";
  std::string start_time = "P580";
  std::string end_time = "P582";
  std::string location = "P276";
  std::string coordinate_location = "P625";
  std::string part_of = "P361";
  std::string follows = "P155";
  std::string followed_by = "P156";
};

struct ExclusionRule {
  std::string property;
  std::optional<Qid> value;  // empty = wildcard `*`
  std::string label;

  bool wildcard() const { return !value.has_value(); }
  bool operator==(const ExclusionRule& o) const {
    return property == o.property && value == o.value;
  }
};

/// Properties used to prune non-events: instance-of classes such as empire,
/// film or village, plus wildcard properties whose mere presence marks a
/// non-event (capital, population, has-part, subclass-of, ...).
std::vector<ExclusionRule> default_exclusion_rules();

/// TSV with columns `property  value  [label]`; `#` starts a comment line.
/// Throws ConfigError on an unparseable property or value.
std::vector<ExclusionRule> parse_exclusion_rules(std::string_view tsv);
std::vector<ExclusionRule> load_exclusion_rules(const std::filesystem::path& path);
std::string format_exclusion_rules(std::span<const ExclusionRule> rules);

using LanguageSet = std::set<std::string, std::less<>>;

/// The 44 Wikipedia language codes of the dataset.
LanguageSet default_languages();
/// Codes separated by whitespace, commas or newlines; `#` comments allowed.
LanguageSet parse_languages(std::string_view text);
LanguageSet load_languages(const std::filesystem::path& path);

/// One Wikidata item reduced to what the rules need.
struct ItemRecord {
  Qid qid;
  /// property -> one entry per statement; the entry is the item object when
  /// the value is an entity, empty otherwise. `novalue` statements are dropped.
  std::map<std::string, std::vector<std::optional<Qid>>, std::less<>> claims;
  std::map<std::string, std::string, std::less<>> wiki_sitelinks;  // language -> title
  std::map<std::string, std::string, std::less<>> news_sitelinks;  // language -> title

  bool has(std::string_view property) const { return claims.find(property) != claims.end(); }
};

enum class RecordStatus { item, not_item, blank, malformed };

struct ParsedRecord {
  RecordStatus status = RecordStatus::blank;
  ItemRecord item;
  std::string error;
};

/// Parses one dump line. Accepts the array layout of the official dumps
/// (`[`, `]`, trailing commas) as well as plain JSON lines.
ParsedRecord parse_item_record(std::string_view line);

struct WikidataEvent {
  Qid qid;
  std::set<std::string> temporal_evidence;
  std::set<std::string> spatial_evidence;
  std::map<std::string, std::string> sitelinks;       // language -> Wikipedia title
  std::map<std::string, std::string> news_sitelinks;  // language -> Wikinews title
  std::optional<std::string> sequence_id;
};

enum class Verdict { kept, no_temporal, no_spatial, excluded, no_sitelink };
std::string_view to_string(Verdict v);

class CandidateFilter {
 public:
  CandidateFilter(std::vector<ExclusionRule> rules, LanguageSet languages, PropertyMap props = {});

  /// Temporal: duration, point-in-time, or start-time together with end-time.
  bool has_temporal(const ItemRecord& item) const;
  /// Spatial: location or coordinate-location.
  bool has_spatial(const ItemRecord& item) const;
  bool excluded(const ItemRecord& item) const;

  Verdict classify(const ItemRecord& item) const;
  /// Builds the event (sitelinks restricted to the allowlist); requires kept.
  WikidataEvent make_event(const ItemRecord& item) const;

  const PropertyMap& properties() const { return props_; }
  const LanguageSet& languages() const { return languages_; }
  const std::vector<ExclusionRule>& rules() const { return rules_; }

 private:
  std::vector<ExclusionRule> rules_;
  LanguageSet languages_;
  PropertyMap props_;
};

/// Item-valued hierarchy and sequence claims of a kept candidate.
struct RelationClaims {
  Qid qid;
  std::vector<Qid> part_of;
  std::vector<Qid> follows;
  std::vector<Qid> followed_by;
};

/// kept + no_temporal + no_spatial + excluded + no_sitelink == items.
struct ScanCounters {
  std::size_t lines = 0;
  std::size_t items = 0;
  std::size_t kept = 0;
  std::size_t no_temporal = 0;
  std::size_t no_spatial = 0;
  std::size_t excluded = 0;
  std::size_t no_sitelink = 0;
  std::size_t malformed = 0;
  std::size_t not_item = 0;
};

struct CandidateScan {
  std::vector<WikidataEvent> events;      // input order
  std::vector<RelationClaims> relations;  // parallel to events
  ScanCounters counters;
};

/// Single pass: classify items, keep candidates and their relation claims.
/// Malformed records are counted and skipped.
class CandidateScanner {
 public:
  explicit CandidateScanner(const CandidateFilter& filter) : filter_(filter) {}

  void consume(std::string_view line);
  /// Parses a batch on `jobs` threads; results are appended in batch order.
  void consume_batch(std::span<const std::string> lines, unsigned jobs);
  CandidateScan finish() &&;

 private:
  void accept(ParsedRecord&& rec);

  const CandidateFilter& filter_;
  CandidateScan scan_;
};

CandidateScan identify_candidate_events(const std::filesystem::path& dump,
                                        const CandidateFilter& filter, unsigned jobs = 1);
CandidateScan identify_candidate_events(std::span<const std::string> lines,
                                        const CandidateFilter& filter);

/// (child, parent) part-of edges with both endpoints in `candidates`.
std::set<std::pair<Qid, Qid>> extract_part_of_edges(std::span<const RelationClaims> relations,
                                                    const std::set<Qid>& candidates);

/// Drops every event that is the parent of some edge. Order is preserved.
std::vector<WikidataEvent> filter_leaf_events(std::vector<WikidataEvent> events,
                                              const std::set<std::pair<Qid, Qid>>& part_of_edges);

struct SequenceEdges {
  std::set<QidPair> edges;
  std::size_t self_loops = 0;
};

/// Undirected follows / followed-by edges between candidates.
SequenceEdges extract_sequence_edges(std::span<const RelationClaims> relations,
                                     const std::set<Qid>& candidates);

struct EventDescription {
  Qid qid;
  std::string language;
  std::string title;
  std::string description;
};

struct DescriptionCounters {
  std::size_t sitelinks = 0;
  std::size_t emitted = 0;
  std::size_t missing_page = 0;
  std::size_t empty_paragraph = 0;
};

using PageLookup =
    std::function<const wikitext::PageText*(std::string_view language, std::string_view title)>;

/// One description per (event, sitelink language) whose page has a
/// non-empty first paragraph. Events in input order, languages sorted.
std::vector<EventDescription> compile_descriptions(std::span<const WikidataEvent> events,
                                                   const PageLookup& pages,
                                                   DescriptionCounters& counters);

std::string to_json_line(const WikidataEvent& e);
WikidataEvent event_from_json(std::string_view line);
std::vector<WikidataEvent> read_events(const std::filesystem::path& path);

std::string to_json_line(const EventDescription& d);
EventDescription description_from_json(std::string_view line);
std::vector<EventDescription> read_descriptions(const std::filesystem::path& path);

std::string format_sequence_edges(const std::set<QidPair>& edges);
std::set<QidPair> read_sequence_edges(const std::filesystem::path& path);

}  // namespace xlel::kbx
