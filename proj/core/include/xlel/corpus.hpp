#pragma once

// Mention harvesting from rendered pages, postprocessing filters, overlap
// buckets and corpus statistics.

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xlel/kbx.hpp"
#include "xlel/qid.hpp"
#include "xlel/wikitext.hpp"

namespace xlel::corpus {

enum class Bucket { high_overlap, multiple_categories, ambiguous_substring, low_overlap };
inline constexpr std::array<Bucket, 4> kAllBuckets = {Bucket::high_overlap, Bucket::multiple_categories,
                                                      Bucket::ambiguous_substring, Bucket::low_overlap};
std::string_view to_string(Bucket b);
Bucket parse_bucket(std::string_view text);

struct Mention {
  std::string id;  // language:page:byte-offset
  std::string language;
  std::string source_title;
  std::size_t offset = 0;
  std::string surface;
  std::string left_context;
  std::string right_context;
  Qid gold;
  Bucket bucket = Bucket::low_overlap;
  std::optional<std::string> meta_title;
  std::optional<std::string> meta_date;

  /// Code points of left context + surface + right context.
  std::size_t context_length() const;
  std::string full_context() const;
};

/// Orders by (language, source page, offset): the stable mention-id order.
bool mention_id_less(const Mention& a, const Mention& b);

struct Thresholds {
  std::size_t min_mentions = 30;
  double title_match_max = 0.5;
  std::size_t context_min = 100;
  std::size_t context_max = 2000;

  /// Throws ConfigError when a threshold is non-positive or min >= max.
  void validate() const;
};

/// Title and description lookups over the event dictionary.
class EventCatalog {
 public:
  EventCatalog(std::span<const kbx::WikidataEvent> events,
               std::span<const kbx::EventDescription> descriptions);

  std::optional<Qid> qid_for_title(std::string_view language, std::string_view title) const;
  std::optional<Qid> qid_for_news_title(std::string_view language, std::string_view title) const;
  /// Same-language Wikipedia title of the event.
  const std::string* title(Qid qid, std::string_view language) const;
  const kbx::EventDescription* description(Qid qid, std::string_view language) const;
  bool contains(Qid qid) const { return events_.count(qid) > 0; }
  std::size_t size() const { return events_.size(); }
  const std::set<Qid>& events() const { return events_; }

 private:
  static std::string key(std::string_view language, std::string_view title);

  std::unordered_map<std::string, Qid> by_title_;
  std::unordered_map<std::string, Qid> by_news_title_;
  std::map<Qid, std::map<std::string, std::string, std::less<>>> titles_;
  std::map<std::pair<Qid, std::string>, kbx::EventDescription> descriptions_;
  std::set<Qid> events_;
};

/// Per-language link accounting. Every link whose target is an event page
/// ends up in exactly one of: mentions, self_links, or a dropped_* counter.
struct LanguageCounters {
  std::size_t links = 0;
  std::size_t to_events = 0;
  std::size_t unresolved = 0;  // links whose target is not an event page
  std::size_t self_links = 0;
  std::size_t dropped_temporal = 0;
  std::size_t dropped_context_length = 0;
  std::size_t dropped_event_filter = 0;
  std::size_t mentions = 0;

  LanguageCounters& operator+=(const LanguageCounters& o);
};

/// Extracts temporal tokens: 4-digit years in [1000, 2100] (any script's
/// digits) plus matches of configurable per-language date regexes.
class TemporalExtractor {
 public:
  void add_pattern(std::string language, const std::string& regex);
  std::set<std::string> extract(std::string_view language, std::string_view text) const;

 private:
  std::vector<std::pair<std::string, std::regex>> patterns_;
};

/// Keep unless the title+description has temporal tokens and none of them
/// appears in the mention's full context.
bool passes_temporal_filter(const Mention& m, std::string_view title, std::string_view description,
                            const TemporalExtractor& temporal);

/// First matching rule wins: equal, title extends surface (disambiguation
/// phrase or trailing tokens), surface is a substring of title, otherwise low.
Bucket categorize(std::string_view surface, std::string_view title);

/// Raw mentions of one page: links resolving to an event in the same language,
/// excluding links on the event's own page. No filters applied.
std::vector<Mention> harvest_mentions(const wikitext::PageText& page, const EventCatalog& catalog,
                                      const wikitext::RedirectMap* redirects,
                                      LanguageCounters& counters);

enum class EventDrop { single_language, title_match, too_few_mentions };
std::string_view to_string(EventDrop d);

struct EventFilterResult {
  std::set<Qid> kept;
  std::map<Qid, EventDrop> dropped;
};

/// Event-level pruning, applied once: single language, more than
/// title_match_max of mentions equal to their language's title, or fewer
/// than min_mentions mentions.
EventFilterResult filter_events(std::span<const Mention> mentions, const EventCatalog& catalog,
                                const Thresholds& thresholds);

struct CorpusBuild {
  std::vector<Mention> mentions;  // sorted by mention id
  EventFilterResult events;
  std::map<std::string, LanguageCounters> counters;
  std::size_t pages = 0;
};

/// Runs harvest, temporal filter, context-length filter and event filters
/// over a stream of Wikipedia pages.
class CorpusBuilder {
 public:
  CorpusBuilder(const EventCatalog& catalog, Thresholds thresholds, TemporalExtractor temporal);

  void add_page(const wikitext::PageText& page, const wikitext::RedirectMap* redirects);
  CorpusBuild finish() &&;

 private:
  const EventCatalog& catalog_;
  Thresholds thresholds_;
  TemporalExtractor temporal_;
  CorpusBuild build_;
};

/// Wikinews mentions: links to Wikipedia pages or to Wikinews category pages
/// of events in `event_set`. Only the context-length bounds apply.
/// `wikipedia_redirects` maps a Wikipedia language to its redirects.
std::vector<Mention> harvest_wikinews(
    const wikitext::PageText& page, const EventCatalog& catalog, const std::set<Qid>& event_set,
    const std::map<std::string, wikitext::RedirectMap, std::less<>>& wikipedia_redirects,
    const wikitext::DateParser& dates, const Thresholds& thresholds, LanguageCounters& counters);

struct LanguageStats {
  std::size_t events = 0;
  std::size_t mentions = 0;
};

struct CorpusStats {
  std::size_t events = 0;
  std::size_t mentions = 0;
  std::map<std::string, LanguageStats> per_language;
  std::array<std::size_t, 4> bucket_counts{};
  std::array<double, 4> bucket_percent{};
  double languages_per_event = 0.0;
};

CorpusStats compute_stats(std::span<const Mention> mentions);
std::string to_json(const CorpusStats& stats);

std::string to_json_line(const Mention& m);
Mention mention_from_json(std::string_view line);
std::vector<Mention> read_mentions(const std::filesystem::path& path);
void write_mentions(const std::filesystem::path& path, std::span<const Mention> mentions);

}  // namespace xlel::corpus
