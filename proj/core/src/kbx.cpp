#include "xlel/kbx.hpp"

#include <algorithm>
#include <json.hpp>
#include <sstream>

#include "xlel/errors.hpp"
#include "xlel/io.hpp"
#include "xlel/parallel.hpp"
#include "xlel/wikitext.hpp"

namespace xlel::kbx {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

struct DefaultRule {
  const char* property;
  const char* value;
  const char* label;
};

// clang-format off
constexpr DefaultRule kDefaultRules[] = {
  {"P31", "Q48349", "empire"},
  {"P31", "Q11514315", "historical_period"},
  {"P31", "Q3024240", "historical_country"},
  {"P31", "Q11042", "culture"},
  {"P31", "Q28171280", "ancient_civilization"},
  {"P31", "Q1620908", "historical_region"},
  {"P31", "Q3502482", "cultural_region"},
  {"P31", "Q465299", "archaeological_culture"},
  {"P31", "Q568683", "age"},
  {"P31", "Q763288", "lander"},
  {"P31", "Q4830453", "business"},
  {"P31", "Q24862", "short_film"},
  {"P31", "Q1496967", "territorial_entity"},
  {"P31", "Q68", "computer"},
  {"P31", "Q486972", "human_settlement"},
  {"P31", "Q26529", "space_probe"},
  {"P31", "Q82794", "geographic_region"},
  {"P31", "Q43229", "organization"},
  {"P31", "Q15401633", "archaeological_period"},
  {"P31", "Q5398426", "television_series"},
  {"P31", "Q24869", "feature_film"},
  {"P31", "Q11424", "film"},
  {"P31", "Q718893", "theater"},
  {"P31", "Q1555508", "radio_program"},
  {"P31", "Q17343829", "unincorporated_community_in_the_United_States"},
  {"P31", "Q254832", "Internationale_Bauausstellung"},
  {"P31", "Q214609", "material"},
  {"P31", "Q625298", "peace_treaty"},
  {"P31", "Q131569", "treaty"},
  {"P31", "Q93288", "contract"},
  {"P31", "Q15416", "television_program"},
  {"P31", "Q1201097", "detachment"},
  {"P31", "Q16887380", "group"},
  {"P31", "Q57821", "fortification"},
  {"P31", "Q15383322", "cultural_prize"},
  {"P31", "Q515", "city"},
  {"P31", "Q537127", "road_bridge"},
  {"P31", "Q20097897", "sea_fort"},
  {"P31", "Q1785071", "fort"},
  {"P31", "Q23413", "castle"},
  {"P31", "Q1484988", "project"},
  {"P31", "Q149621", "district"},
  {"P31", "Q532", "village"},
  {"P31", "Q2630741", "community"},
  {"P31", "Q3957", "town"},
  {"P31", "Q111161", "synod"},
  {"P31", "Q1530022", "religious_organization"},
  {"P31", "Q51645", "ecumenical_council"},
  {"P31", "Q10551516", "church_council"},
  {"P31", "Q1076486", "sports_venue"},
  {"P31", "Q17350442", "venue"},
  {"P31", "Q13226383", "facility"},
  {"P31", "Q811979", "architectural_structure"},
  {"P31", "Q23764314", "sports_location"},
  {"P31", "Q15707521", "fictional_battle"},
  {"P36", "*", "capital"},
  {"P2067", "*", "mass"},
  {"P1082", "*", "population"},
  {"P1376", "*", "capital_of"},
  {"P137", "*", "operator"},
  {"P915", "*", "filming_location"},
  {"P162", "*", "producer"},
  {"P281", "*", "postal_code"},
  {"P176", "*", "manufacturer"},
  {"P2257", "*", "event_interval"},
  {"P527", "*", "has_part"},
  {"P279", "*", "subclass_of"},
};

constexpr const char* kDefaultLanguages[] = {
  "af", "ar", "be", "bg", "bn", "ca", "cs", "da", "de", "el", "en", "es", "fa", "fi", "fr",
  "he", "hi", "hu", "id", "it", "ja", "ko", "ml", "mr", "ms", "nl", "no", "pl", "pt", "ro",
  "ru", "si", "sk", "sl", "sr", "sv", "sw", "ta", "te", "th", "tr", "uk", "vi", "zh",
};
// clang-format on

std::string_view strip_record(std::string_view line) {
  line = trim(line);
  if (!line.empty() && line.back() == ',') line.remove_suffix(1);
  return trim(line);
}

std::optional<Qid> entity_value(const json& snak) {
  const auto dv = snak.find("datavalue");
  if (dv == snak.end() || !dv->is_object()) return std::nullopt;
  const auto value = dv->find("value");
  if (value == dv->end() || !value->is_object()) return std::nullopt;
  if (const auto id = value->find("id"); id != value->end() && id->is_string()) {
    return Qid::parse(id->get_ref<const std::string&>());
  }
  const auto type = value->find("entity-type");
  const auto num = value->find("numeric-id");
  if (type != value->end() && num != value->end() && *type == "item" && num->is_number_unsigned()) {
    return Qid(num->get<std::uint64_t>());
  }
  return std::nullopt;
}

// "enwiki" -> ("en", wiki); "dewikinews" -> ("de", news); other projects -> none.
enum class SiteKind { none, wiki, news };

std::pair<std::string, SiteKind> classify_site(std::string_view site) {
  auto lang_of = [](std::string_view prefix) {
    std::string code(prefix);
    std::replace(code.begin(), code.end(), '_', '-');
    return code;
  };
  constexpr std::string_view kNews = "wikinews";
  constexpr std::string_view kWiki = "wiki";
  if (site.size() > kNews.size() && site.ends_with(kNews)) {
    return {lang_of(site.substr(0, site.size() - kNews.size())), SiteKind::news};
  }
  if (site.size() > kWiki.size() && site.ends_with(kWiki)) {
    return {lang_of(site.substr(0, site.size() - kWiki.size())), SiteKind::wiki};
  }
  return {{}, SiteKind::none};
}

std::vector<Qid> item_values(const ItemRecord& item, std::string_view property) {
  std::vector<Qid> out;
  const auto it = item.claims.find(property);
  if (it == item.claims.end()) return out;
  for (const auto& v : it->second) {
    if (v) out.push_back(*v);
  }
  return out;
}

}  // namespace

std::vector<ExclusionRule> default_exclusion_rules() {
  std::vector<ExclusionRule> rules;
  for (const auto& r : kDefaultRules) {
    ExclusionRule rule{r.property, std::nullopt, r.label};
    if (std::string_view(r.value) != "*") rule.value = Qid::parse(r.value);
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<ExclusionRule> parse_exclusion_rules(std::string_view tsv) {
  std::vector<ExclusionRule> rules;
  std::size_t line_no = 0;
  for (std::string_view raw : split(tsv, '\n')) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = split(line, '\t');
    const std::string where = "exclusion rules line " + std::to_string(line_no);
    if (cols.size() < 2) throw_config(where + ": expected 'property<TAB>value'");
    const std::string_view property = trim(cols[0]);
    const std::string_view value = trim(cols[1]);
    if (property == "property") continue;  // header row
    if (!is_property_id(property)) {
      throw_config(where + ": unparseable property id '" + std::string(property) + "'");
    }
    ExclusionRule rule{std::string(property), std::nullopt,
                       cols.size() > 2 ? std::string(trim(cols[2])) : std::string()};
    if (value != "*") {
      rule.value = Qid::parse(value);
      if (!rule.value) throw_config(where + ": value must be a QID or '*', got '" + std::string(value) + "'");
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<ExclusionRule> load_exclusion_rules(const std::filesystem::path& path) {
  require_file(path, "exclusion rules");
  return parse_exclusion_rules(read_file(path));
}

std::string format_exclusion_rules(std::span<const ExclusionRule> rules) {
  std::string out = "property\tvalue\tlabel\n";
  for (const auto& r : rules) {
    out += r.property;
    out += '\t';
    out += r.value ? r.value->str() : std::string("*");
    out += '\t';
    out += r.label;
    out += '\n';
  }
  return out;
}

LanguageSet default_languages() {
  LanguageSet langs;
  for (const char* code : kDefaultLanguages) langs.emplace(code);
  return langs;
}

LanguageSet parse_languages(std::string_view text) {
  LanguageSet langs;
  std::string token;
  bool comment = false;
  auto flush = [&] {
    if (!token.empty()) langs.insert(token);
    token.clear();
  };
  for (char c : text) {
    if (c == '\n') {
      comment = false;
      flush();
    } else if (comment) {
      continue;
    } else if (c == '#') {
      comment = true;
      flush();
    } else if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  if (langs.empty()) throw_config("language allowlist is empty");
  return langs;
}

LanguageSet load_languages(const std::filesystem::path& path) {
  require_file(path, "language list");
  return parse_languages(read_file(path));
}

ParsedRecord parse_item_record(std::string_view line) {
  ParsedRecord rec;
  const std::string_view body = strip_record(line);
  if (body.empty() || body == "[" || body == "]") {
    rec.status = RecordStatus::blank;
    return rec;
  }
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    rec.status = RecordStatus::malformed;
    rec.error = "not a JSON object";
    return rec;
  }
  const auto id = doc.find("id");
  if (id == doc.end() || !id->is_string()) {
    rec.status = RecordStatus::malformed;
    rec.error = "missing id";
    return rec;
  }
  const auto& id_text = id->get_ref<const std::string&>();
  const auto type = doc.find("type");
  const bool typed_item = type != doc.end() && *type == "item";
  if ((type != doc.end() && !typed_item) || (!id_text.empty() && id_text.front() != 'Q')) {
    rec.status = RecordStatus::not_item;
    return rec;
  }
  const auto qid = Qid::parse(id_text);
  if (!qid) {
    rec.status = RecordStatus::malformed;
    rec.error = "invalid id '" + id_text + "'";
    return rec;
  }
  rec.item.qid = *qid;

  if (const auto claims = doc.find("claims"); claims != doc.end()) {
    if (!claims->is_object()) {
      rec.status = RecordStatus::malformed;
      rec.error = "claims is not an object";
      return rec;
    }
    for (const auto& [property, statements] : claims->items()) {
      if (!statements.is_array()) continue;
      std::vector<std::optional<Qid>> values;
      for (const auto& st : statements) {
        const auto snak = st.find("mainsnak");
        if (snak == st.end() || !snak->is_object()) continue;
        const auto snaktype = snak->find("snaktype");
        if (snaktype != snak->end() && *snaktype == "novalue") continue;
        values.push_back(entity_value(*snak));
      }
      if (!values.empty()) rec.item.claims.emplace(property, std::move(values));
    }
  }

  if (const auto links = doc.find("sitelinks"); links != doc.end() && links->is_object()) {
    for (const auto& [site, link] : links->items()) {
      std::string title;
      if (link.is_object()) {
        const auto t = link.find("title");
        if (t != link.end() && t->is_string()) title = t->get<std::string>();
      } else if (link.is_string()) {
        title = link.get<std::string>();
      }
      if (title.empty()) continue;
      auto [lang, kind] = classify_site(site);
      if (kind == SiteKind::wiki) rec.item.wiki_sitelinks.emplace(std::move(lang), std::move(title));
      if (kind == SiteKind::news) rec.item.news_sitelinks.emplace(std::move(lang), std::move(title));
    }
  }
  rec.status = RecordStatus::item;
  return rec;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kept: return "kept";
    case Verdict::no_temporal: return "no_temporal";
    case Verdict::no_spatial: return "no_spatial";
    case Verdict::excluded: return "excluded";
    case Verdict::no_sitelink: return "no_sitelink";
  }
  return "unknown";
}

CandidateFilter::CandidateFilter(std::vector<ExclusionRule> rules, LanguageSet languages, PropertyMap props)
    : rules_(std::move(rules)), languages_(std::move(languages)), props_(std::move(props)) {}

bool CandidateFilter::has_temporal(const ItemRecord& item) const {
  return item.has(props_.duration) || item.has(props_.point_in_time) ||
         (item.has(props_.start_time) && item.has(props_.end_time));
}

bool CandidateFilter::has_spatial(const ItemRecord& item) const {
  return item.has(props_.location) || item.has(props_.coordinate_location);
}

bool CandidateFilter::excluded(const ItemRecord& item) const {
  for (const auto& rule : rules_) {
    const auto it = item.claims.find(rule.property);
    if (it == item.claims.end()) continue;
    if (rule.wildcard()) return true;
    for (const auto& v : it->second) {
      if (v && *v == *rule.value) return true;
    }
  }
  return false;
}

Verdict CandidateFilter::classify(const ItemRecord& item) const {
  if (!has_temporal(item)) return Verdict::no_temporal;
  if (!has_spatial(item)) return Verdict::no_spatial;
  if (excluded(item)) return Verdict::excluded;
  for (const auto& [lang, title] : item.wiki_sitelinks) {
    if (languages_.count(lang)) return Verdict::kept;
  }
  return Verdict::no_sitelink;
}

WikidataEvent CandidateFilter::make_event(const ItemRecord& item) const {
  WikidataEvent e;
  e.qid = item.qid;
  for (const auto* p : {&props_.duration, &props_.point_in_time, &props_.start_time, &props_.end_time}) {
    if (item.has(*p)) e.temporal_evidence.insert(*p);
  }
  for (const auto* p : {&props_.location, &props_.coordinate_location}) {
    if (item.has(*p)) e.spatial_evidence.insert(*p);
  }
  for (const auto& [lang, title] : item.wiki_sitelinks) {
    if (languages_.count(lang)) e.sitelinks.emplace(lang, title);
  }
  for (const auto& [lang, title] : item.news_sitelinks) {
    if (languages_.count(lang)) e.news_sitelinks.emplace(lang, title);
  }
  return e;
}

void CandidateScanner::accept(ParsedRecord&& rec) {
  auto& c = scan_.counters;
  ++c.lines;
  switch (rec.status) {
    case RecordStatus::blank: return;
    case RecordStatus::malformed: ++c.malformed; return;
    case RecordStatus::not_item: ++c.not_item; return;
    case RecordStatus::item: break;
  }
  ++c.items;
  switch (filter_.classify(rec.item)) {
    case Verdict::no_temporal: ++c.no_temporal; return;
    case Verdict::no_spatial: ++c.no_spatial; return;
    case Verdict::excluded: ++c.excluded; return;
    case Verdict::no_sitelink: ++c.no_sitelink; return;
    case Verdict::kept: break;
  }
  ++c.kept;
  const auto& props = filter_.properties();
  scan_.events.push_back(filter_.make_event(rec.item));
  scan_.relations.push_back(RelationClaims{rec.item.qid, item_values(rec.item, props.part_of),
                                           item_values(rec.item, props.follows),
                                           item_values(rec.item, props.followed_by)});
}

void CandidateScanner::consume(std::string_view line) { accept(parse_item_record(line)); }

void CandidateScanner::consume_batch(std::span<const std::string> lines, unsigned jobs) {
  std::vector<ParsedRecord> parsed(lines.size());
  parallel_for(lines.size(), jobs, [&](std::size_t i) { parsed[i] = parse_item_record(lines[i]); });
  for (auto& rec : parsed) accept(std::move(rec));
}

CandidateScan CandidateScanner::finish() && { return std::move(scan_); }

CandidateScan identify_candidate_events(const std::filesystem::path& dump, const CandidateFilter& filter,
                                        unsigned jobs) {
  CandidateScanner scanner(filter);
  LineReader reader(dump);
  std::vector<std::string> batch;
  constexpr std::size_t kBatch = 4096;
  batch.reserve(kBatch);
  std::string line;
  while (reader.next(line)) {
    batch.push_back(std::move(line));
    if (batch.size() == kBatch) {
      scanner.consume_batch(batch, jobs);
      batch.clear();
    }
  }
  scanner.consume_batch(batch, jobs);
  return std::move(scanner).finish();
}

CandidateScan identify_candidate_events(std::span<const std::string> lines, const CandidateFilter& filter) {
  CandidateScanner scanner(filter);
  for (const auto& line : lines) scanner.consume(line);
  return std::move(scanner).finish();
}

std::set<std::pair<Qid, Qid>> extract_part_of_edges(std::span<const RelationClaims> relations,
                                                    const std::set<Qid>& candidates) {
  std::set<std::pair<Qid, Qid>> edges;
  for (const auto& r : relations) {
    if (!candidates.count(r.qid)) continue;
    for (Qid parent : r.part_of) {
      if (parent != r.qid && candidates.count(parent)) edges.emplace(r.qid, parent);
    }
  }
  return edges;
}

std::vector<WikidataEvent> filter_leaf_events(std::vector<WikidataEvent> events,
                                              const std::set<std::pair<Qid, Qid>>& part_of_edges) {
  std::set<Qid> parents;
  for (const auto& [child, parent] : part_of_edges) parents.insert(parent);
  std::erase_if(events, [&](const WikidataEvent& e) { return parents.count(e.qid) > 0; });
  return events;
}

SequenceEdges extract_sequence_edges(std::span<const RelationClaims> relations,
                                     const std::set<Qid>& candidates) {
  SequenceEdges out;
  auto add = [&](Qid a, Qid b) {
    if (!candidates.count(a) || !candidates.count(b)) return;
    if (a == b) {
      ++out.self_loops;
      return;
    }
    out.edges.insert(QidPair::canonical(a, b));
  };
  for (const auto& r : relations) {
    for (Qid prev : r.follows) add(r.qid, prev);
    for (Qid next : r.followed_by) add(r.qid, next);
  }
  return out;
}

std::vector<EventDescription> compile_descriptions(std::span<const WikidataEvent> events,
                                                   const PageLookup& pages, DescriptionCounters& counters) {
  std::vector<EventDescription> out;
  for (const auto& e : events) {
    for (const auto& [lang, title] : e.sitelinks) {
      ++counters.sitelinks;
      const wikitext::PageText* page = pages(lang, title);
      if (page == nullptr) {
        ++counters.missing_page;
        continue;
      }
      std::string paragraph = wikitext::first_paragraph(*page);
      if (paragraph.empty()) {
        ++counters.empty_paragraph;
        continue;
      }
      ++counters.emitted;
      out.push_back(EventDescription{e.qid, lang, page->title, std::move(paragraph)});
    }
  }
  return out;
}

std::string to_json_line(const WikidataEvent& e) {
  ojson j;
  j["qid"] = e.qid.str();
  j["temporal_evidence"] = e.temporal_evidence;
  j["spatial_evidence"] = e.spatial_evidence;
  j["sitelinks"] = e.sitelinks;
  if (!e.news_sitelinks.empty()) j["wikinews_sitelinks"] = e.news_sitelinks;
  if (e.sequence_id) j["sequence_id"] = *e.sequence_id;
  return j.dump();
}

WikidataEvent event_from_json(std::string_view line) {
  try {
    const json j = json::parse(line);
    WikidataEvent e;
    e.qid = Qid::parse_or_throw(j.at("qid").get<std::string>());
    e.temporal_evidence = j.at("temporal_evidence").get<std::set<std::string>>();
    e.spatial_evidence = j.at("spatial_evidence").get<std::set<std::string>>();
    e.sitelinks = j.at("sitelinks").get<std::map<std::string, std::string>>();
    if (j.contains("wikinews_sitelinks")) {
      e.news_sitelinks = j["wikinews_sitelinks"].get<std::map<std::string, std::string>>();
    }
    if (j.contains("sequence_id")) e.sequence_id = j["sequence_id"].get<std::string>();
    return e;
  } catch (const json::exception& ex) {
    throw_data(std::string("bad event record: ") + ex.what());
  }
}

std::vector<WikidataEvent> read_events(const std::filesystem::path& path) {
  require_file(path, "events file");
  std::vector<WikidataEvent> out;
  LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    if (!trim(line).empty()) out.push_back(event_from_json(line));
  }
  return out;
}

std::string to_json_line(const EventDescription& d) {
  ojson j;
  j["qid"] = d.qid.str();
  j["language"] = d.language;
  j["title"] = d.title;
  j["description"] = d.description;
  return j.dump();
}

EventDescription description_from_json(std::string_view line) {
  try {
    const json j = json::parse(line);
    return EventDescription{Qid::parse_or_throw(j.at("qid").get<std::string>()), j.at("language").get<std::string>(),
                            j.at("title").get<std::string>(), j.at("description").get<std::string>()};
  } catch (const json::exception& ex) {
    throw_data(std::string("bad description record: ") + ex.what());
  }
}

std::vector<EventDescription> read_descriptions(const std::filesystem::path& path) {
  require_file(path, "descriptions file");
  std::vector<EventDescription> out;
  LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    if (!trim(line).empty()) out.push_back(description_from_json(line));
  }
  return out;
}

std::string format_sequence_edges(const std::set<QidPair>& edges) {
  std::string out;
  for (const auto& e : edges) {
    out += e.first.str();
    out += '\t';
    out += e.second.str();
    out += '\n';
  }
  return out;
}

std::set<QidPair> read_sequence_edges(const std::filesystem::path& path) {
  require_file(path, "sequence edges");
  std::set<QidPair> edges;
  LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    if (trim(line).empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 2) throw_data("sequence edges: expected two columns at line " +
                                     std::to_string(reader.line_number()));
    edges.insert(QidPair::canonical(Qid::parse_or_throw(trim(cols[0])), Qid::parse_or_throw(trim(cols[1]))));
  }
  return edges;
}

}  // namespace xlel::kbx
