#include "xlel/stages.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "xlel/config.hpp"
#include "xlel/errors.hpp"
#include "xlel/hash.hpp"
#include "xlel/io.hpp"
#include "xlel/parallel.hpp"

namespace xlel::stages {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kManifest = "manifest.json";

// Streams lines to `path.tmp` and renames on commit.
class StreamWriter {
 public:
  explicit StreamWriter(fs::path path) : path_(std::move(path)), tmp_(path_.string() + ".tmp") {
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw_data("cannot write " + tmp_.string());
  }
  void line(std::string_view s) {
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    out_.put('\n');
  }
  void commit() {
    out_.close();
    if (!out_) throw_data("write failed: " + tmp_.string());
    fs::rename(tmp_, path_);
  }

 private:
  fs::path path_;
  fs::path tmp_;
  std::ofstream out_;
};

void add_output(StageReport& r, const fs::path& dir, const fs::path& file) {
  r.outputs.push_back(file.lexically_relative(dir).generic_string());
}

void write_text(StageReport& r, const fs::path& dir, const std::string& name, std::string_view content) {
  write_file_atomic(dir / name, content);
  add_output(r, dir, dir / name);
}

void finish(StageReport& r, const fs::path& dir) {
  std::sort(r.outputs.begin(), r.outputs.end());
  if (!r.reconciled()) {
    std::string what;
    for (const auto& c : r.reconcile) {
      if (c.kept + c.dropped != c.scanned) what += " " + c.name;
    }
    throw_data(r.stage + ": counters do not reconcile:" + what);
  }
  write_file_atomic(dir / kManifest, to_json(r));
}

void set(StageReport& r, const std::string& key, std::size_t v) { r.counters[key] = static_cast<std::int64_t>(v); }

void reconcile(StageReport& r, std::string name, std::size_t scanned, std::size_t kept, std::size_t dropped) {
  r.reconcile.push_back({std::move(name), static_cast<std::int64_t>(scanned), static_cast<std::int64_t>(kept),
                         static_cast<std::int64_t>(dropped)});
}

std::vector<std::string> language_dirs(const fs::path& root) {
  require_directory(root, "page directory");
  std::vector<std::string> langs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::is_regular_file(entry.path() / "pages.jsonl")) {
      langs.push_back(entry.path().filename().string());
    }
  }
  std::sort(langs.begin(), langs.end());
  return langs;
}

template <typename Fn>
void for_each_page(const fs::path& file, Fn&& fn) {
  LineReader reader(file);
  std::string line;
  while (reader.next(line)) {
    if (trim(line).empty()) continue;
    try {
      fn(wikitext::page_from_json(line));
    } catch (const DataError& ex) {
      throw_data(file.string() + ":" + std::to_string(reader.line_number()) + ": " + ex.what());
    }
  }
}

wikitext::DateParser date_parser(const std::optional<fs::path>& path) {
  return path ? wikitext::DateParser::load(*path) : wikitext::DateParser::defaults();
}

corpus::TemporalExtractor temporal_extractor(const std::map<std::string, std::vector<std::string>>& patterns) {
  corpus::TemporalExtractor t;
  for (const auto& [lang, list] : patterns) {
    for (const auto& re : list) t.add_pattern(lang, re);
  }
  return t;
}

std::set<Qid> read_kept_events(const fs::path& corpus_dir) {
  const fs::path file = corpus_dir / "event_filter.tsv";
  require_file(file, "event filter table");
  std::set<Qid> kept;
  for (const auto& line : read_lines(file)) {
    const auto cols = split(line, '\t');
    if (cols.size() < 2 || cols[0] == "qid") continue;
    if (cols[1] == "kept") kept.insert(Qid::parse_or_throw(cols[0]));
  }
  return kept;
}

bm25::Tokenizer make_tokenizer(const std::optional<fs::path>& vocab) {
  return vocab ? bm25::Tokenizer::with_wordpiece_file(*vocab) : bm25::Tokenizer();
}

std::string mentions_text(std::span<const corpus::Mention> mentions) {
  std::string out;
  for (const auto& m : mentions) {
    out += corpus::to_json_line(m);
    out.push_back('\n');
  }
  return out;
}

std::vector<splits::EventSequence> sequences_of(std::span<const kbx::WikidataEvent> events) {
  std::map<std::string, std::vector<Qid>> groups;
  for (const auto& e : events) groups[e.sequence_id.value_or(e.qid.str())].push_back(e.qid);
  std::vector<splits::EventSequence> out;
  for (auto& [id, members] : groups) {
    std::sort(members.begin(), members.end());
    out.push_back(splits::EventSequence{members.front().str(), std::move(members)});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.members.front() < b.members.front(); });
  return out;
}

}  // namespace

bool StageReport::reconciled() const {
  return std::all_of(reconcile.begin(), reconcile.end(),
                     [](const Reconciliation& c) { return c.kept + c.dropped == c.scanned; });
}

std::string to_json(const StageReport& r) {
  ojson j;
  j["stage"] = r.stage;
  j["tool_version"] = tool_version();
  j["counters"] = r.counters;
  j["info"] = r.info;
  ojson rec = ojson::array();
  for (const auto& c : r.reconcile) {
    rec.push_back({{"name", c.name}, {"scanned", c.scanned}, {"kept", c.kept}, {"dropped", c.dropped}});
  }
  j["reconcile"] = std::move(rec);
  j["outputs"] = r.outputs;
  return j.dump(2) + "\n";
}

StageReport stage_report_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    StageReport r;
    r.stage = j.at("stage").get<std::string>();
    r.counters = j.at("counters").get<std::map<std::string, std::int64_t>>();
    r.info = j.at("info").get<std::map<std::string, std::string>>();
    r.outputs = j.at("outputs").get<std::vector<std::string>>();
    for (const auto& c : j.at("reconcile")) {
      r.reconcile.push_back({c.at("name").get<std::string>(), c.at("scanned").get<std::int64_t>(),
                             c.at("kept").get<std::int64_t>(), c.at("dropped").get<std::int64_t>()});
    }
    return r;
  } catch (const json::exception& ex) {
    throw_data(std::string("bad stage manifest: ") + ex.what());
  }
}

// ---------------------------------------------------------------------------

StageReport run_kbx(const KbxOptions& o) {
  require_file(o.wikidata, "Wikidata dump");
  fs::create_directories(o.out);
  StageReport r;
  r.stage = "kbx";

  auto rules = o.rules ? kbx::load_exclusion_rules(*o.rules) : kbx::default_exclusion_rules();
  auto languages = o.languages ? kbx::load_languages(*o.languages) : kbx::default_languages();
  const kbx::CandidateFilter filter(std::move(rules), std::move(languages));
  auto scan = kbx::identify_candidate_events(o.wikidata, filter, o.jobs);
  const auto& c = scan.counters;

  std::set<Qid> candidates;
  for (const auto& e : scan.events) candidates.insert(e.qid);
  const auto part_of = kbx::extract_part_of_edges(scan.relations, candidates);
  const std::size_t n_candidates = scan.events.size();
  auto events = kbx::filter_leaf_events(std::move(scan.events), part_of);

  std::set<Qid> leaves;
  std::vector<Qid> leaf_list;
  for (const auto& e : events) {
    leaves.insert(e.qid);
    leaf_list.push_back(e.qid);
  }
  const auto seq_edges = kbx::extract_sequence_edges(scan.relations, leaves);
  const auto sequences = splits::build_sequences(leaf_list, seq_edges.edges);
  std::map<Qid, std::string> sequence_of;
  for (const auto& s : sequences) {
    for (Qid q : s.members) sequence_of[q] = s.sequence_id;
  }
  for (auto& e : events) e.sequence_id = sequence_of.at(e.qid);

  StreamWriter ev(o.out / "events.jsonl");
  for (const auto& e : events) ev.line(kbx::to_json_line(e));
  ev.commit();
  add_output(r, o.out, o.out / "events.jsonl");
  write_text(r, o.out, "sequence_edges.tsv", kbx::format_sequence_edges(seq_edges.edges));
  write_text(r, o.out, "exclusion_rules.tsv", kbx::format_exclusion_rules(filter.rules()));

  set(r, "lines", c.lines);
  set(r, "items", c.items);
  set(r, "candidates", c.kept);
  set(r, "dropped_no_temporal", c.no_temporal);
  set(r, "dropped_no_spatial", c.no_spatial);
  set(r, "dropped_excluded", c.excluded);
  set(r, "dropped_no_sitelink", c.no_sitelink);
  set(r, "malformed", c.malformed);
  set(r, "not_item", c.not_item);
  set(r, "part_of_edges", part_of.size());
  set(r, "dropped_non_leaf", n_candidates - events.size());
  set(r, "events", events.size());
  set(r, "sequence_edges", seq_edges.edges.size());
  set(r, "sequence_self_loops", seq_edges.self_loops);
  set(r, "sequences", sequences.size());
  reconcile(r, "items", c.items, c.kept, c.no_temporal + c.no_spatial + c.excluded + c.no_sitelink);
  reconcile(r, "leaf_filter", n_candidates, events.size(), n_candidates - events.size());
  r.info["languages"] = std::to_string(filter.languages().size());
  r.info["exclusion_rules"] = std::to_string(filter.rules().size());

  if (o.pages) {
    // Keep only the pages some event links to.
    std::set<std::pair<std::string, std::string>> wanted;
    for (const auto& e : events) {
      for (const auto& [lang, title] : e.sitelinks) wanted.emplace(lang, wikitext::normalize_title(title));
    }
    std::map<std::pair<std::string, std::string>, wikitext::PageText> pages;
    for (const auto& lang : language_dirs(*o.pages)) {
      for_each_page(*o.pages / lang / "pages.jsonl", [&](wikitext::PageText&& p) {
        auto key = std::make_pair(lang, p.title);
        if (wanted.count(key) > 0) pages.emplace(std::move(key), std::move(p));
      });
    }
    kbx::DescriptionCounters dc;
    const auto descriptions = kbx::compile_descriptions(
        events,
        [&](std::string_view lang, std::string_view title) -> const wikitext::PageText* {
          const auto it = pages.find({std::string(lang), wikitext::normalize_title(title)});
          return it == pages.end() ? nullptr : &it->second;
        },
        dc);
    StreamWriter dw(o.out / "descriptions.jsonl");
    for (const auto& d : descriptions) dw.line(kbx::to_json_line(d));
    dw.commit();
    add_output(r, o.out, o.out / "descriptions.jsonl");
    set(r, "sitelinks", dc.sitelinks);
    set(r, "descriptions", dc.emitted);
    set(r, "description_missing_page", dc.missing_page);
    set(r, "description_empty_paragraph", dc.empty_paragraph);
    reconcile(r, "descriptions", dc.sitelinks, dc.emitted, dc.missing_page + dc.empty_paragraph);
  }
  finish(r, o.out);
  return r;
}

StageReport run_ingest(const IngestOptions& o) {
  require_file(o.dump, "dump");
  if (o.language.empty()) throw_config("ingest: language is required");
  fs::create_directories(o.out);
  StageReport r;
  r.stage = "ingest";
  r.info["language"] = o.language;
  r.info["kind"] = std::string(wikitext::to_string(o.kind));

  wikitext::IngestCounters redirect_counters;
  const wikitext::RedirectMap redirects = wikitext::build_redirect_map(o.dump, &redirect_counters);
  write_text(r, o.out, "redirects.tsv", wikitext::format_redirects(redirects));

  const auto dates = date_parser(o.date_patterns);
  wikitext::RenderOptions opts;
  opts.language = o.language;
  opts.kind = o.kind;
  opts.redirects = &redirects;
  wikitext::IngestCounters counters;
  std::size_t written = 0;
  std::size_t dated = 0;
  StreamWriter pw(o.out / "pages.jsonl");
  wikitext::parse_dump(
      o.dump, opts, &dates,
      [&](wikitext::PageText&& page) {
        ++written;
        if (page.published) ++dated;
        pw.line(wikitext::to_json_line(page));
      },
      counters, o.jobs);
  pw.commit();
  add_output(r, o.out, o.out / "pages.jsonl");

  set(r, "pages_seen", counters.pages_seen);
  set(r, "articles", counters.articles);
  set(r, "pages_written", written);
  set(r, "dropped_redirect", counters.redirects);
  set(r, "dropped_other_namespace", counters.other_namespace);
  set(r, "dropped_malformed", counters.malformed);
  set(r, "redirects", redirects.size());
  set(r, "redirect_cycle_members", redirect_counters.redirect_cycle_members);
  if (o.kind == wikitext::WikiKind::wikinews) set(r, "pages_with_date", dated);
  reconcile(r, "pages", counters.pages_seen, written, counters.redirects + counters.other_namespace + counters.malformed);
  finish(r, o.out);
  return r;
}

StageReport run_corpus(const CorpusOptions& o) {
  o.thresholds.validate();
  require_directory(o.events, "event directory");
  fs::create_directories(o.out);
  StageReport r;
  r.stage = o.wikinews ? "corpus_wikinews" : "corpus";

  const auto events = kbx::read_events(o.events / "events.jsonl");
  const fs::path desc_file = o.events / "descriptions.jsonl";
  const auto descriptions = fs::exists(desc_file) ? kbx::read_descriptions(desc_file) : std::vector<kbx::EventDescription>{};
  const corpus::EventCatalog catalog(events, descriptions);
  std::map<std::string, corpus::LanguageCounters> counters;
  std::vector<corpus::Mention> mentions;

  if (!o.wikinews) {
    corpus::CorpusBuilder builder(catalog, o.thresholds, temporal_extractor(o.temporal_patterns));
    for (const auto& lang : language_dirs(o.pages)) {
      const auto redirects = wikitext::read_redirects(o.pages / lang / "redirects.tsv");
      for_each_page(o.pages / lang / "pages.jsonl", [&](wikitext::PageText&& p) { builder.add_page(p, &redirects); });
    }
    auto build = std::move(builder).finish();
    counters = std::move(build.counters);
    mentions = std::move(build.mentions);
    std::ostringstream table;
    table << "qid\tstatus\n";
    for (Qid q : catalog.events()) {
      const auto d = build.events.dropped.find(q);
      table << q.str() << '\t' << (d == build.events.dropped.end() ? std::string("kept") : std::string(corpus::to_string(d->second)))
            << '\n';
    }
    write_text(r, o.out, "event_filter.tsv", table.str());
    std::map<corpus::EventDrop, std::size_t> reasons;
    for (const auto& [q, d] : build.events.dropped) ++reasons[d];
    for (const auto& [d, n] : reasons) set(r, "events_dropped_" + std::string(corpus::to_string(d)), n);
    set(r, "events_scanned", catalog.size());
    set(r, "events_kept", build.events.kept.size());
    set(r, "pages", build.pages);
    reconcile(r, "events", catalog.size(), build.events.kept.size(), build.events.dropped.size());

    // Post-filter guarantees.
    std::map<Qid, std::pair<std::size_t, std::set<std::string>>> per_event;
    for (const auto& m : mentions) {
      auto& e = per_event[m.gold];
      ++e.first;
      e.second.insert(m.language);
      const auto len = m.context_length();
      if (len < o.thresholds.context_min || len > o.thresholds.context_max) throw_data("corpus: context bound violated by " + m.id);
    }
    for (const auto& [q, e] : per_event) {
      if (e.first < o.thresholds.min_mentions || e.second.size() < 2) throw_data("corpus: surviving event " + q.str() + " violates event filters");
    }
  } else {
    if (!o.wikipedia_corpus) throw_config("corpus --wikinews needs the Wikipedia corpus directory");
    const auto event_set = read_kept_events(*o.wikipedia_corpus);
    std::map<std::string, wikitext::RedirectMap, std::less<>> wp_redirects;
    if (o.wikipedia_pages) {
      for (const auto& lang : language_dirs(*o.wikipedia_pages)) {
        wp_redirects[lang] = wikitext::read_redirects(*o.wikipedia_pages / lang / "redirects.tsv");
      }
    }
    const auto dates = date_parser(o.date_patterns);
    std::size_t pages = 0;
    for (const auto& lang : language_dirs(o.pages)) {
      auto& lc = counters[lang];
      for_each_page(o.pages / lang / "pages.jsonl", [&](wikitext::PageText&& p) {
        ++pages;
        for (auto& m : corpus::harvest_wikinews(p, catalog, event_set, wp_redirects, dates, o.thresholds, lc)) {
          mentions.push_back(std::move(m));
        }
      });
    }
    std::stable_sort(mentions.begin(), mentions.end(), corpus::mention_id_less);
    set(r, "pages", pages);
    set(r, "event_set", event_set.size());
  }

  corpus::write_mentions(o.out / "mentions.jsonl", mentions);
  add_output(r, o.out, o.out / "mentions.jsonl");
  write_text(r, o.out, "stats.json", corpus::to_json(corpus::compute_stats(mentions)));

  corpus::LanguageCounters total;
  for (const auto& [lang, c] : counters) {
    total += c;
    const std::string p = lang + ".";
    set(r, p + "links", c.links);
    set(r, p + "links_to_events", c.to_events);
    set(r, p + "mentions", c.mentions);
    set(r, p + "self_links", c.self_links);
    set(r, p + "dropped_temporal", c.dropped_temporal);
    set(r, p + "dropped_context_length", c.dropped_context_length);
    set(r, p + "dropped_event_filter", c.dropped_event_filter);
    reconcile(r, "links_to_events." + lang, c.to_events, c.mentions,
              c.self_links + c.dropped_temporal + c.dropped_context_length + c.dropped_event_filter);
    reconcile(r, "links." + lang, c.links, c.to_events, c.unresolved);
  }
  set(r, "links", total.links);
  set(r, "mentions", total.mentions);
  set(r, "dropped_temporal", total.dropped_temporal);
  set(r, "dropped_context_length", total.dropped_context_length);
  set(r, "dropped_event_filter", total.dropped_event_filter);
  set(r, "self_links", total.self_links);
  r.info["thresholds"] = "min_mentions=" + std::to_string(o.thresholds.min_mentions) +
                         " title_match_max=" + std::to_string(o.thresholds.title_match_max) +
                         " context=[" + std::to_string(o.thresholds.context_min) + "," +
                         std::to_string(o.thresholds.context_max) + "]";
  finish(r, o.out);
  return r;
}

StageReport run_split(const SplitOptions& o) {
  o.fractions.validate();
  fs::create_directories(o.out);
  StageReport r;
  r.stage = "split";
  const auto events = kbx::read_events(o.events / "events.jsonl");
  auto sequences = sequences_of(events);
  if (o.corpus) sequences = splits::restrict_sequences(sequences, read_kept_events(*o.corpus));
  const auto assignment = splits::assign_splits(sequences, o.fractions, o.seed);

  // Zero-shot guarantees: sequences are atomic, splits are disjoint.
  for (const auto& s : sequences) {
    const auto first = assignment.at(s.members.front());
    for (Qid q : s.members) {
      if (assignment.at(q) != first) throw_data("split: sequence " + s.sequence_id + " spans several splits");
    }
  }
  write_text(r, o.out, "splits.tsv", splits::format_splits(assignment));
  r.info["seed"] = std::to_string(o.seed);
  r.info["fractions"] = std::to_string(o.fractions.value[0]) + "," + std::to_string(o.fractions.value[1]) + "," +
                        std::to_string(o.fractions.value[2]);
  set(r, "events", assignment.split.size());
  set(r, "sequences", sequences.size());
  for (auto s : splits::kAllSplits) {
    const auto i = static_cast<std::size_t>(s);
    set(r, "events." + std::string(splits::to_string(s)), assignment.event_counts[i]);
    set(r, "sequences." + std::string(splits::to_string(s)), assignment.sequence_counts[i]);
  }

  if (o.corpus) {
    const auto mentions = corpus::read_mentions(*o.corpus / "mentions.jsonl");
    std::size_t kept = 0;
    for (auto s : splits::kAllSplits) {
      const auto part = select_split(mentions, assignment, {s});
      kept += part.size();
      const std::string name = "mentions." + std::string(splits::to_string(s)) + ".jsonl";
      write_text(r, o.out, name, mentions_text(part));
      set(r, "mentions." + std::string(splits::to_string(s)), part.size());
    }
    reconcile(r, "mentions", mentions.size(), kept, 0);
  }
  if (o.wikinews) {
    const auto mentions = corpus::read_mentions(*o.wikinews / "mentions.jsonl");
    const auto sets = splits::derive_wikinews_sets(mentions, assignment);
    write_text(r, o.out, "wikinews.cross_domain.jsonl", mentions_text(sets.cross_domain));
    write_text(r, o.out, "wikinews.zero_shot.jsonl", mentions_text(sets.zero_shot));
    set(r, "wikinews.cross_domain", sets.cross_domain.size());
    set(r, "wikinews.zero_shot", sets.zero_shot.size());
    reconcile(r, "wikinews", sets.cross_domain.size(), sets.zero_shot.size(), sets.cross_domain.size() - sets.zero_shot.size());
  }
  finish(r, o.out);
  return r;
}

StageReport run_index(const IndexOptions& o) {
  fs::create_directories(o.out);
  StageReport r;
  r.stage = "index";
  auto pool = kbx::read_descriptions(o.events / "descriptions.jsonl");
  if (o.corpus) {
    const auto kept = read_kept_events(*o.corpus);
    std::erase_if(pool, [&](const kbx::EventDescription& d) { return kept.count(d.qid) == 0; });
  }
  std::map<std::string, std::vector<kbx::EventDescription>> by_lang;
  for (auto& d : pool) {
    if (o.task == eval::Task::crosslingual && d.language != "en") continue;
    by_lang[d.language].push_back(std::move(d));
  }
  if (by_lang.empty()) throw_config("index: candidate pool is empty for task " + std::string(eval::to_string(o.task)));
  const auto tokenizer = make_tokenizer(o.vocab);
  std::size_t docs = 0;
  for (const auto& [lang, descs] : by_lang) {
    const auto index = bm25::Index::build(descs, o.variant, o.params, tokenizer, o.jobs);
    index.save(o.out / (lang + ".bm25"));
    add_output(r, o.out, o.out / (lang + ".bm25"));
    set(r, lang + ".docs", index.num_docs());
    set(r, lang + ".terms", index.num_terms());
    docs += index.num_docs();
  }
  set(r, "docs", docs);
  set(r, "pools", by_lang.size());
  r.info["task"] = std::string(eval::to_string(o.task));
  r.info["variant"] = std::string(bm25::to_string(o.variant));
  r.info["tokenizer"] = tokenizer.fingerprint();
  finish(r, o.out);
  return r;
}

StageReport run_retrieve(const RetrieveOptions& o) {
  if (o.k < 1) throw_config("retrieve: k must be at least 1");
  fs::create_directories(o.out);
  StageReport r;
  r.stage = "retrieve";
  const auto tokenizer = make_tokenizer(o.vocab);
  std::map<std::string, bm25::Index, std::less<>> indexes;
  std::optional<bm25::Index> single;
  if (fs::is_regular_file(o.index)) {
    single = bm25::Index::load(o.index, tokenizer, o.variant, o.params);
  } else {
    require_directory(o.index, "index");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(o.index)) {
      if (entry.path().extension() == ".bm25") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) indexes.emplace(f.stem().string(), bm25::Index::load(f, tokenizer, o.variant, o.params));
    if (indexes.empty()) throw_data("retrieve: no .bm25 files in " + o.index.string());
  }
  auto pick = [&](const corpus::Mention& m) -> const bm25::Index* {
    if (single) return &*single;
    const auto it = indexes.find(o.task == eval::Task::crosslingual ? std::string_view("en") : std::string_view(m.language));
    return it == indexes.end() ? nullptr : &it->second;
  };

  const auto mentions = corpus::read_mentions(o.mentions);
  std::vector<RetrievalResult> results(mentions.size());
  std::vector<char> no_index(mentions.size(), 0);
  parallel_for(mentions.size(), o.jobs, [&](std::size_t i) {
    const auto& m = mentions[i];
    const bm25::Index* index = pick(m);
    if (index == nullptr) {
      results[i] = RetrievalResult{m.id, {}, o.k};
      no_index[i] = 1;
      return;
    }
    const auto query = bm25::build_query(m, o.window, tokenizer, o.meta);
    results[i] = bm25::retrieve(*index, query, m.id, o.k);
  });
  write_run(o.out / "run.jsonl", results);
  add_output(r, o.out, o.out / "run.jsonl");
  const auto missing = static_cast<std::size_t>(std::count(no_index.begin(), no_index.end(), 1));
  set(r, "mentions", mentions.size());
  set(r, "retrieved", mentions.size() - missing);
  set(r, "no_index", missing);
  reconcile(r, "mentions", mentions.size(), mentions.size() - missing, missing);
  r.info["task"] = std::string(eval::to_string(o.task));
  r.info["variant"] = std::string(bm25::to_string(o.variant));
  r.info["window"] = std::to_string(o.window);
  r.info["window_semantics"] = "tokens per side";
  r.info["k"] = std::to_string(o.k);
  r.info["meta"] = o.meta ? "true" : "false";
  r.info["tokenizer"] = tokenizer.fingerprint();
  finish(r, o.out);
  return r;
}

StageReport run_eval(const EvalOptions& o) {
  fs::create_directories(o.out);
  StageReport r;
  r.stage = "eval";
  const RunFile run = read_run(o.run);
  auto gold = corpus::read_mentions(o.mentions);
  const std::size_t all = gold.size();
  if (o.splits && !o.subset.empty()) gold = select_split(gold, splits::read_splits(*o.splits), o.subset);
  const auto report = eval::evaluate(run, gold, o.ks, o.run_id.empty() ? o.run.stem().string() : o.run_id, o.task);
  const auto problems = eval::check_invariants(report);
  if (!problems.empty()) {
    std::string what;
    for (const auto& p : problems) what += "\n  " + p;
    throw_data("eval: report violates metric invariants:" + what);
  }
  write_text(r, o.out, "report.json", eval::to_json(report));
  write_text(r, o.out, "per_language.tsv", eval::per_language_tsv(report));
  write_text(r, o.out, "per_bucket.tsv", eval::per_bucket_tsv(report));
  if (o.compare) {
    const RunFile other = read_run(*o.compare);
    const auto delta = eval::compare_runs(run, other, gold, o.subset_name);
    write_text(r, o.out, "delta.json", eval::to_json(delta));
  }
  set(r, "mentions", gold.size());
  set(r, "missing_from_run", report.missing);
  set(r, "run_results", run.results.size());
  set(r, "schema_warnings", run.warnings.size());
  reconcile(r, "gold", all, gold.size(), all - gold.size());
  r.info["subset"] = o.subset_name;
  r.info["task"] = std::string(eval::to_string(o.task));
  finish(r, o.out);
  return r;
}

StageReport run_export(const ExportOptions& o) {
  fs::create_directories(o.out);
  StageReport r;
  r.stage = "export";
  const auto mentions = corpus::read_mentions(o.corpus / "mentions.jsonl");
  const auto assignment = splits::read_splits(o.splits / "splits.tsv");
  for (const auto& m : mentions) {
    if (!assignment.contains(m.gold)) throw_data("export: no split assignment for " + m.gold.str() + " (mention " + m.id + ")");
  }
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (auto s : splits::kAllSplits) {
    const auto part = select_split(mentions, assignment, {s});
    const std::string name = "mentions." + std::string(splits::to_string(s)) + ".jsonl";
    write_text(r, o.out, name, mentions_text(part));
    counts[name] = part.size();
    total += part.size();
  }
  reconcile(r, "mentions", mentions.size(), total, 0);

  std::set<Qid> kept;
  for (const auto& [q, s] : assignment.split) kept.insert(q);
  std::map<std::string, std::string> dicts;
  std::map<std::string, std::size_t> dict_counts;
  for (const auto& d : kbx::read_descriptions(o.events / "descriptions.jsonl")) {
    if (kept.count(d.qid) == 0) continue;
    dicts[d.language] += kbx::to_json_line(d) + "\n";
    ++dict_counts[d.language];
  }
  for (const auto& [lang, text] : dicts) {
    const std::string name = "dictionary." + lang + ".jsonl";
    write_text(r, o.out, name, text);
    counts[name] = dict_counts[lang];
  }
  set(r, "events", kept.size());
  set(r, "events_with_english", dict_counts.count("en") > 0 ? dict_counts["en"] : 0);

  write_text(r, o.out, "splits.tsv", splits::format_splits(assignment));
  counts["splits.tsv"] = assignment.split.size() + 1;
  write_text(r, o.out, "stats.json", read_file(o.corpus / "stats.json"));
  if (o.wikinews) {
    for (const char* name : {"wikinews.cross_domain.jsonl", "wikinews.zero_shot.jsonl"}) {
      const fs::path src = *o.wikinews / name;
      require_file(src, "Wikinews set");
      const auto part = corpus::read_mentions(src);
      write_text(r, o.out, name, mentions_text(part));
      counts[name] = part.size();
    }
  }

  std::ostringstream readme;
  readme << "# XLEL dataset export\n\n"
         << "Produced by xlel " << tool_version() << ".\n\n"
         << "| file | records |\n|---|---|\n";
  for (const auto& [name, n] : counts) readme << "| " << name << " | " << n << " |\n";
  readme << "\nLine counts equal record counts; `splits.tsv` includes its header line.\n";
  write_text(r, o.out, "README.md", readme.str());
  for (const auto& [name, n] : counts) set(r, name, n);
  finish(r, o.out);
  return r;
}

std::vector<corpus::Mention> select_split(const std::vector<corpus::Mention>& mentions,
                                          const splits::SplitAssignment& assignment,
                                          const std::vector<splits::Split>& wanted) {
  std::vector<corpus::Mention> out;
  for (const auto& m : mentions) {
    const auto it = assignment.split.find(m.gold);
    if (it == assignment.split.end()) throw_data("no split assignment for " + m.gold.str() + " (mention " + m.id + ")");
    if (std::find(wanted.begin(), wanted.end(), it->second) != wanted.end()) out.push_back(m);
  }
  return out;
}

}  // namespace xlel::stages
