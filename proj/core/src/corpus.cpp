#include "xlel/corpus.hpp"

#include <algorithm>
#include <cctype>

#include "xlel/errors.hpp"
#include "xlel/unicode.hpp"

namespace xlel::corpus {

namespace {

constexpr std::string_view kBucketNames[] = {"high_overlap", "multiple_categories", "ambiguous_substring",
                                             "low_overlap"};

std::string make_id(std::string_view language, std::string_view title, std::size_t offset) {
  std::string id;
  id.reserve(language.size() + title.size() + 24);
  id.append(language).push_back(':');
  id.append(title).push_back(':');
  id += std::to_string(offset);
  return id;
}

std::string flatten(std::string_view text) {
  std::string out(text);
  std::replace(out.begin(), out.end(), '\n', ' ');
  return out;
}

// Builds a mention for `link` with contexts cut from the enclosing paragraph.
std::optional<Mention> mention_at(const wikitext::PageText& page, const wikitext::HyperlinkSpan& link, Qid gold) {
  const auto para = wikitext::enclosing_paragraph(page, link.start);
  if (!para || link.end > para->second) return std::nullopt;
  Mention m;
  m.language = page.language;
  m.source_title = page.title;
  m.offset = link.start;
  m.id = make_id(page.language, page.title, link.start);
  m.surface = flatten(link.surface);
  m.left_context = flatten(std::string_view(page.body).substr(para->first, link.start - para->first));
  m.right_context = flatten(std::string_view(page.body).substr(link.end, para->second - link.end));
  m.gold = gold;
  return m;
}

bool within_bounds(const Mention& m, const Thresholds& t) {
  const std::size_t n = m.context_length();
  return n >= t.context_min && n <= t.context_max;
}

}  // namespace

std::string_view to_string(Bucket b) { return kBucketNames[static_cast<std::size_t>(b)]; }

Bucket parse_bucket(std::string_view text) {
  for (Bucket b : kAllBuckets) {
    if (to_string(b) == text) return b;
  }
  throw_data("unknown bucket '" + std::string(text) + "'");
}

std::size_t Mention::context_length() const {
  return unicode::codepoint_count(left_context) + unicode::codepoint_count(surface) +
         unicode::codepoint_count(right_context);
}

std::string Mention::full_context() const { return left_context + surface + right_context; }

bool mention_id_less(const Mention& a, const Mention& b) {
  return std::tie(a.language, a.source_title, a.offset) < std::tie(b.language, b.source_title, b.offset);
}

void Thresholds::validate() const {
  if (min_mentions == 0) throw_config("min_mentions must be positive");
  if (!(title_match_max > 0.0) || title_match_max > 1.0) throw_config("title_match_max must be in (0, 1]");
  if (context_min == 0) throw_config("context_min must be positive");
  if (context_min >= context_max) {
    throw_config("context_min (" + std::to_string(context_min) + ") must be below context_max (" +
                 std::to_string(context_max) + ")");
  }
}

// ---------------------------------------------------------------------------

std::string EventCatalog::key(std::string_view language, std::string_view title) {
  std::string k(language);
  k.push_back('\x1f');
  k += wikitext::normalize_title(title);
  return k;
}

EventCatalog::EventCatalog(std::span<const kbx::WikidataEvent> events,
                           std::span<const kbx::EventDescription> descriptions) {
  for (const auto& e : events) {
    events_.insert(e.qid);
    for (const auto& [lang, title] : e.sitelinks) {
      by_title_.emplace(key(lang, title), e.qid);
      titles_[e.qid][lang] = wikitext::normalize_title(title);
    }
    for (const auto& [lang, title] : e.news_sitelinks) by_news_title_.emplace(key(lang, title), e.qid);
  }
  for (const auto& d : descriptions) descriptions_[{d.qid, d.language}] = d;
}

std::optional<Qid> EventCatalog::qid_for_title(std::string_view language, std::string_view title) const {
  const auto it = by_title_.find(key(language, title));
  if (it == by_title_.end()) return std::nullopt;
  return it->second;
}

std::optional<Qid> EventCatalog::qid_for_news_title(std::string_view language, std::string_view title) const {
  const auto it = by_news_title_.find(key(language, title));
  if (it == by_news_title_.end()) return std::nullopt;
  return it->second;
}

const std::string* EventCatalog::title(Qid qid, std::string_view language) const {
  const auto it = titles_.find(qid);
  if (it == titles_.end()) return nullptr;
  const auto t = it->second.find(language);
  return t == it->second.end() ? nullptr : &t->second;
}

const kbx::EventDescription* EventCatalog::description(Qid qid, std::string_view language) const {
  const auto it = descriptions_.find({qid, std::string(language)});
  return it == descriptions_.end() ? nullptr : &it->second;
}

LanguageCounters& LanguageCounters::operator+=(const LanguageCounters& o) {
  links += o.links;
  to_events += o.to_events;
  unresolved += o.unresolved;
  self_links += o.self_links;
  dropped_temporal += o.dropped_temporal;
  dropped_context_length += o.dropped_context_length;
  dropped_event_filter += o.dropped_event_filter;
  mentions += o.mentions;
  return *this;
}

// ---------------------------------------------------------------------------

void TemporalExtractor::add_pattern(std::string language, const std::string& regex) {
  try {
    patterns_.emplace_back(std::move(language), std::regex(regex, std::regex::ECMAScript | std::regex::icase));
  } catch (const std::regex_error& ex) {
    throw_config("bad temporal pattern '" + regex + "': " + ex.what());
  }
}

std::set<std::string> TemporalExtractor::extract(std::string_view language, std::string_view text) const {
  std::set<std::string> tokens;
  const std::string digits = unicode::ascii_digits(text);
  std::size_t i = 0;
  while (i < digits.size()) {
    if (!std::isdigit(static_cast<unsigned char>(digits[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < digits.size() && std::isdigit(static_cast<unsigned char>(digits[j]))) ++j;
    if (j - i == 4) {
      const int year = std::stoi(digits.substr(i, 4));
      if (year >= 1000 && year <= 2100) tokens.insert(digits.substr(i, 4));
    }
    i = j;
  }
  for (const auto& [lang, re] : patterns_) {
    if (lang != "*" && lang != language) continue;
    for (auto it = std::sregex_iterator(digits.begin(), digits.end(), re); it != std::sregex_iterator(); ++it) {
      tokens.insert(unicode::normalize_for_match(it->str()));
    }
  }
  return tokens;
}

bool passes_temporal_filter(const Mention& m, std::string_view title, std::string_view description,
                            const TemporalExtractor& temporal) {
  std::string kb_text(title);
  kb_text.push_back('\n');
  kb_text.append(description);
  const auto kb_tokens = temporal.extract(m.language, kb_text);
  if (kb_tokens.empty()) return true;
  const auto context_tokens = temporal.extract(m.language, m.full_context());
  return std::any_of(kb_tokens.begin(), kb_tokens.end(),
                     [&](const std::string& t) { return context_tokens.count(t) > 0; });
}

Bucket categorize(std::string_view surface, std::string_view title) {
  const std::string s = unicode::normalize_for_match(surface);
  const std::string t = unicode::normalize_for_match(title);
  if (s == t) return Bucket::high_overlap;
  if (!s.empty() && t.size() > s.size() + 1 && t.starts_with(s) && t[s.size()] == ' ') {
    return Bucket::multiple_categories;
  }
  if (!s.empty() && t.find(s) != std::string::npos) return Bucket::ambiguous_substring;
  return Bucket::low_overlap;
}

std::vector<Mention> harvest_mentions(const wikitext::PageText& page, const EventCatalog& catalog,
                                      const wikitext::RedirectMap* redirects, LanguageCounters& counters) {
  std::vector<Mention> out;
  const auto own = catalog.qid_for_title(page.language, page.title);
  for (const auto& link : page.links) {
    if (link.to_wikipedia()) continue;
    ++counters.links;
    const std::string target =
        redirects != nullptr ? redirects->resolve(std::string_view(link.target_title)) : link.target_title;
    const auto qid = catalog.qid_for_title(page.language, target);
    if (!qid) {
      ++counters.unresolved;
      continue;
    }
    ++counters.to_events;
    if (own && *own == *qid) {
      ++counters.self_links;
      continue;
    }
    auto m = mention_at(page, link, *qid);
    if (!m) {
      ++counters.dropped_context_length;
      continue;
    }
    const std::string* title = catalog.title(*qid, page.language);
    m->bucket = categorize(m->surface, title != nullptr ? *title : target);
    out.push_back(std::move(*m));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(EventDrop d) {
  switch (d) {
    case EventDrop::single_language:
      return "single_language";
    case EventDrop::title_match:
      return "title_match";
    case EventDrop::too_few_mentions:
      return "too_few_mentions";
  }
  return "unknown";
}

EventFilterResult filter_events(std::span<const Mention> mentions, const EventCatalog& catalog,
                                const Thresholds& thresholds) {
  struct Tally {
    std::size_t total = 0;
    std::size_t title_equal = 0;
    std::set<std::string> languages;
  };
  std::map<Qid, Tally> tallies;
  for (const auto& m : mentions) {
    auto& t = tallies[m.gold];
    ++t.total;
    t.languages.insert(m.language);
    const std::string* title = catalog.title(m.gold, m.language);
    if (title != nullptr && unicode::normalize_for_match(m.surface) == unicode::normalize_for_match(*title)) {
      ++t.title_equal;
    }
  }
  EventFilterResult result;
  for (Qid qid : catalog.events()) {
    const auto it = tallies.find(qid);
    if (it == tallies.end()) {
      result.dropped[qid] = EventDrop::too_few_mentions;
      continue;
    }
    const Tally& t = it->second;
    if (t.languages.size() < 2) {
      result.dropped[qid] = EventDrop::single_language;
    } else if (static_cast<double>(t.title_equal) > thresholds.title_match_max * static_cast<double>(t.total)) {
      result.dropped[qid] = EventDrop::title_match;
    } else if (t.total < thresholds.min_mentions) {
      result.dropped[qid] = EventDrop::too_few_mentions;
    } else {
      result.kept.insert(qid);
    }
  }
  // Mentions of events unknown to the catalog cannot survive.
  for (const auto& [qid, t] : tallies) {
    if (!catalog.contains(qid)) result.dropped[qid] = EventDrop::too_few_mentions;
  }
  return result;
}

// ---------------------------------------------------------------------------

CorpusBuilder::CorpusBuilder(const EventCatalog& catalog, Thresholds thresholds, TemporalExtractor temporal)
    : catalog_(catalog), thresholds_(thresholds), temporal_(std::move(temporal)) {
  thresholds_.validate();
}

void CorpusBuilder::add_page(const wikitext::PageText& page, const wikitext::RedirectMap* redirects) {
  ++build_.pages;
  auto& counters = build_.counters[page.language];
  for (auto& m : harvest_mentions(page, catalog_, redirects, counters)) {
    const std::string* title = catalog_.title(m.gold, m.language);
    const kbx::EventDescription* desc = catalog_.description(m.gold, m.language);
    if (!passes_temporal_filter(m, title != nullptr ? *title : std::string_view{},
                                desc != nullptr ? std::string_view(desc->description) : std::string_view{},
                                temporal_)) {
      ++counters.dropped_temporal;
      continue;
    }
    if (!within_bounds(m, thresholds_)) {
      ++counters.dropped_context_length;
      continue;
    }
    build_.mentions.push_back(std::move(m));
  }
}

CorpusBuild CorpusBuilder::finish() && {
  build_.events = filter_events(build_.mentions, catalog_, thresholds_);
  std::vector<Mention> kept;
  kept.reserve(build_.mentions.size());
  for (auto& m : build_.mentions) {
    if (build_.events.kept.count(m.gold) == 0) {
      ++build_.counters[m.language].dropped_event_filter;
      continue;
    }
    ++build_.counters[m.language].mentions;
    kept.push_back(std::move(m));
  }
  std::stable_sort(kept.begin(), kept.end(), mention_id_less);
  build_.mentions = std::move(kept);
  return std::move(build_);
}

std::vector<Mention> harvest_wikinews(
    const wikitext::PageText& page, const EventCatalog& catalog, const std::set<Qid>& event_set,
    const std::map<std::string, wikitext::RedirectMap, std::less<>>& wikipedia_redirects,
    const wikitext::DateParser& dates, const Thresholds& thresholds, LanguageCounters& counters) {
  std::vector<Mention> out;
  const auto own = catalog.qid_for_news_title(page.language, page.title);
  const auto meta = wikitext::extract_wikinews_meta(page, dates);
  const std::optional<std::string> date = page.published ? page.published : meta.date;
  for (const auto& link : page.links) {
    ++counters.links;
    std::optional<Qid> qid;
    std::string title_lang = page.language;
    if (link.to_wikipedia()) {
      title_lang = link.wikipedia_language;
      std::string target = link.target_title;
      const auto r = wikipedia_redirects.find(title_lang);
      if (r != wikipedia_redirects.end()) target = r->second.resolve(std::string_view(target));
      qid = catalog.qid_for_title(title_lang, target);
    } else {
      qid = catalog.qid_for_news_title(page.language, link.target_title);
    }
    if (!qid || event_set.count(*qid) == 0) {
      ++counters.unresolved;
      continue;
    }
    ++counters.to_events;
    if (own && *own == *qid) {
      ++counters.self_links;
      continue;
    }
    auto m = mention_at(page, link, *qid);
    if (!m || !within_bounds(*m, thresholds)) {
      ++counters.dropped_context_length;
      continue;
    }
    const std::string* title = catalog.title(*qid, page.language);
    if (title == nullptr) title = catalog.title(*qid, title_lang);
    m->bucket = categorize(m->surface, title != nullptr ? *title : std::string_view(link.target_title));
    m->meta_title = meta.title;
    m->meta_date = date;
    ++counters.mentions;
    out.push_back(std::move(*m));
  }
  return out;
}

// ---------------------------------------------------------------------------

CorpusStats compute_stats(std::span<const Mention> mentions) {
  CorpusStats stats;
  std::map<Qid, std::set<std::string>> languages_of;
  std::map<std::string, std::set<Qid>> events_in;
  for (const auto& m : mentions) {
    ++stats.mentions;
    ++stats.per_language[m.language].mentions;
    ++stats.bucket_counts[static_cast<std::size_t>(m.bucket)];
    languages_of[m.gold].insert(m.language);
    events_in[m.language].insert(m.gold);
  }
  stats.events = languages_of.size();
  for (const auto& [lang, events] : events_in) stats.per_language[lang].events = events.size();
  if (stats.mentions > 0) {
    for (std::size_t b = 0; b < stats.bucket_counts.size(); ++b) {
      stats.bucket_percent[b] = 100.0 * static_cast<double>(stats.bucket_counts[b]) / static_cast<double>(stats.mentions);
    }
  }
  if (stats.events > 0) {
    std::size_t total = 0;
    for (const auto& [qid, langs] : languages_of) total += langs.size();
    stats.languages_per_event = static_cast<double>(total) / static_cast<double>(stats.events);
  }
  return stats;
}

}  // namespace xlel::corpus
