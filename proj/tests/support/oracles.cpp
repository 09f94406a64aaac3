#include "oracles.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <json.hpp>

#include "xlel/io.hpp"
#include "xlel/unicode.hpp"

namespace xlel::testing {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Marks an other_claims entry as a novalue statement, which never counts.
const std::string kNoValue = "#novalue";

json item_snak(const std::string& prop, std::uint64_t value) {
  return {{"mainsnak",
           {{"snaktype", "value"},
            {"property", prop},
            {"datavalue",
             {{"type", "wikibase-entityid"},
              {"value", {{"entity-type", "item"}, {"numeric-id", value}, {"id", "Q" + std::to_string(value)}}}}}}},
          {"type", "statement"},
          {"rank", "normal"}};
}

json other_snak(const std::string& prop) {
  return {{"mainsnak",
           {{"snaktype", "value"},
            {"property", prop},
            {"datavalue", {{"type", "time"}, {"value", {{"time", "+2001-01-01T00:00:00Z"}, {"precision", 11}}}}}}},
          {"type", "statement"}};
}

bool has_property(const SynthItem& item, const std::string& p) {
  return item.item_claims.count(p) > 0 || item.other_claims.count(p) > 0;
}

}  // namespace

std::string item_line(const SynthItem& item) {
  json doc = {{"type", "item"}, {"id", "Q" + std::to_string(item.qid)}, {"claims", json::object()}, {"sitelinks", json::object()}};
  for (const auto& [prop, values] : item.item_claims) {
    for (auto v : values) doc["claims"][prop].push_back(item_snak(prop, v));
  }
  for (const auto& prop : item.other_claims) {
    if (prop.ends_with(kNoValue)) {
      const std::string bare = prop.substr(0, prop.size() - kNoValue.size());
      doc["claims"][bare].push_back({{"mainsnak", {{"snaktype", "novalue"}, {"property", bare}}}, {"type", "statement"}});
    } else {
      doc["claims"][prop].push_back(other_snak(prop));
    }
  }
  for (const auto& [lang, title] : item.sitelinks) doc["sitelinks"][lang + "wiki"] = {{"site", lang + "wiki"}, {"title", title}};
  return doc.dump();
}

std::vector<SynthItem> random_items(std::size_t n, std::mt19937_64& rng, const std::vector<kbx::ExclusionRule>& rules) {
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::uint64_t> excluded_classes;
  std::vector<std::string> wildcard_props;
  for (const auto& r : rules) {
    if (r.wildcard()) {
      wildcard_props.push_back(r.property);
    } else if (r.property == "P31") {
      excluded_classes.push_back(r.value->number());
    }
  }
  std::vector<SynthItem> items(n);
  for (std::size_t i = 0; i < n; ++i) {
    SynthItem& it = items[i];
    it.qid = 100 + i;
    for (const char* p : {"P2047", "P585", "P580", "P582"}) {
      if (u(rng) < 0.3) it.other_claims.insert(p);
      if (u(rng) < 0.1) it.other_claims.insert(std::string(p) + kNoValue);
    }
    if (u(rng) < 0.55) it.item_claims["P276"].push_back(900000 + rng() % 50);
    if (u(rng) < 0.35) it.other_claims.insert("P625");
    if (u(rng) < 0.1) it.other_claims.insert(std::string("P625") + kNoValue);
    if (u(rng) < 0.2 && !excluded_classes.empty()) {
      it.item_claims["P31"].push_back(excluded_classes[rng() % excluded_classes.size()]);
    } else {
      it.item_claims["P31"].push_back(1656682);
    }
    if (u(rng) < 0.08 && !wildcard_props.empty()) it.other_claims.insert(wildcard_props[rng() % wildcard_props.size()]);
    const double s = u(rng);
    if (s < 0.6) {
      it.sitelinks["en"] = "Event " + std::to_string(it.qid);
      if (coin(rng)) it.sitelinks["de"] = "Ereignis " + std::to_string(it.qid);
    } else if (s < 0.8) {
      it.sitelinks["xx"] = "Outside " + std::to_string(it.qid);
    }
  }
  // Part-of links between items, including chains.
  for (std::size_t i = 0; i < n; ++i) {
    if (u(rng) < 0.25) items[i].item_claims["P361"].push_back(100 + rng() % n);
  }
  return items;
}

std::set<std::uint64_t> oracle_events(const std::vector<SynthItem>& items, const std::vector<kbx::ExclusionRule>& rules,
                                      const std::set<std::string>& languages) {
  std::set<std::uint64_t> candidates;
  for (const auto& it : items) {
    const bool temporal =
        has_property(it, "P2047") || has_property(it, "P585") || (has_property(it, "P580") && has_property(it, "P582"));
    const bool spatial = has_property(it, "P276") || has_property(it, "P625");
    bool excluded = false;
    for (const auto& r : rules) {
      if (r.wildcard()) {
        excluded |= has_property(it, r.property);
      } else if (const auto c = it.item_claims.find(r.property); c != it.item_claims.end()) {
        excluded |= std::find(c->second.begin(), c->second.end(), r.value->number()) != c->second.end();
      }
    }
    bool linked = false;
    for (const auto& [lang, title] : it.sitelinks) linked |= languages.count(lang) > 0;
    if (temporal && spatial && !excluded && linked) candidates.insert(it.qid);
  }
  std::set<std::uint64_t> parents;
  for (const auto& it : items) {
    if (candidates.count(it.qid) == 0) continue;
    const auto p = it.item_claims.find("P361");
    if (p == it.item_claims.end()) continue;
    for (auto parent : p->second) {
      if (parent != it.qid && candidates.count(parent) > 0) parents.insert(parent);
    }
  }
  std::set<std::uint64_t> leaves;
  for (auto q : candidates) {
    if (parents.count(q) == 0) leaves.insert(q);
  }
  return leaves;
}

std::vector<std::vector<Qid>> bfs_components(const std::vector<Qid>& nodes, const std::set<QidPair>& edges) {
  const std::set<Qid> in(nodes.begin(), nodes.end());
  std::map<Qid, std::vector<Qid>> adj;
  for (const auto& e : edges) {
    if (in.count(e.first) && in.count(e.second)) {
      adj[e.first].push_back(e.second);
      adj[e.second].push_back(e.first);
    }
  }
  std::set<Qid> seen;
  std::vector<std::vector<Qid>> out;
  for (Qid start : in) {
    if (seen.count(start)) continue;
    std::vector<Qid> comp;
    std::deque<Qid> queue{start};
    seen.insert(start);
    while (!queue.empty()) {
      const Qid q = queue.front();
      queue.pop_front();
      comp.push_back(q);
      for (Qid nb : adj[q]) {
        if (seen.insert(nb).second) queue.push_back(nb);
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

std::map<std::string, std::string> iterate_redirects(const std::map<std::string, std::string>& raw) {
  auto on_cycle = [&](const std::string& t) {
    std::string cur = t;
    for (std::size_t steps = 0; steps <= raw.size(); ++steps) {
      const auto it = raw.find(cur);
      if (it == raw.end()) return false;
      cur = it->second;
      if (cur == t) return true;
    }
    return false;
  };
  std::map<std::string, std::string> out;
  for (const auto& [from, to] : raw) {
    if (on_cycle(from)) {
      out[from] = from;
      continue;
    }
    std::string cur = to;
    while (raw.count(cur) && !on_cycle(cur)) cur = raw.at(cur);
    out[from] = cur;
  }
  return out;
}

double oracle_idf_plus(std::size_t n_docs, std::size_t df) {
  return std::log((static_cast<double>(n_docs) + 1.0) / static_cast<double>(df));
}

std::vector<OracleHit> oracle_rank(const std::vector<std::vector<std::string>>& docs, const std::vector<std::string>& query,
                                   bm25::Variant variant, const bm25::Params& p) {
  const double n = static_cast<double>(docs.size());
  double total = 0.0;
  for (const auto& d : docs) total += static_cast<double>(d.size());
  const double avgdl = docs.empty() ? 0.0 : total / n;
  std::vector<OracleHit> hits;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const double dl = static_cast<double>(docs[i].size());
    const double norm = avgdl > 0.0 ? 1.0 - p.b + p.b * dl / avgdl : 1.0;
    double score = 0.0;
    for (const auto& t : query) {
      std::size_t df = 0;
      for (const auto& d : docs) df += std::find(d.begin(), d.end(), t) != d.end() ? 1 : 0;
      const double tf = static_cast<double>(std::count(docs[i].begin(), docs[i].end(), t));
      if (tf == 0.0) continue;
      const double dfd = static_cast<double>(df);
      switch (variant) {
        case bm25::Variant::okapi: {
          const double idf = std::log((n - dfd + 0.5) / (dfd + 0.5) + 1.0);
          score += idf * tf * (p.k1 + 1.0) / (tf + p.k1 * norm);
          break;
        }
        case bm25::Variant::plus: {
          const double idf = std::log((n + 1.0) / dfd);
          score += idf * (tf * (p.k1 + 1.0) / (tf + p.k1 * norm) + p.delta);
          break;
        }
        case bm25::Variant::l: {
          const double idf = std::log((n + 1.0) / dfd);
          const double c = tf / norm;
          score += idf * (p.k1 + 1.0) * (c + p.delta) / (p.k1 + c + p.delta);
          break;
        }
      }
    }
    hits.push_back({i, score});
  }
  std::stable_sort(hits.begin(), hits.end(), [](const OracleHit& a, const OracleHit& b) { return a.score > b.score; });
  return hits;
}

std::string compare_rankings(const std::vector<OracleHit>& oracle, const std::vector<bm25::RankedDoc>& got,
                             double rel_tol) {
  auto close = [&](double a, double b) { return std::abs(a - b) <= rel_tol * std::max({1.0, std::abs(a), std::abs(b)}); };
  std::map<std::size_t, double> oracle_score;
  for (const auto& h : oracle) oracle_score[h.doc] = h.score;
  const std::size_t k = got.size();
  if (k > oracle.size()) return "ranking longer than the document pool";
  for (std::size_t i = 0; i < k; ++i) {
    const auto& g = got[i];
    if (!close(g.score, oracle[i].score)) {
      return "score at rank " + std::to_string(i + 1) + ": " + std::to_string(g.score) + " vs " +
             std::to_string(oracle[i].score);
    }
    if (!close(oracle_score.at(g.doc), g.score)) return "doc " + std::to_string(g.doc) + " carries a wrong score";
    if (g.doc != oracle[i].doc && !close(oracle[i].score, oracle_score.at(g.doc))) {
      return "doc at rank " + std::to_string(i + 1) + ": " + std::to_string(g.doc) + " vs " + std::to_string(oracle[i].doc);
    }
    if (i > 0 && close(got[i - 1].score, g.score) && got[i - 1].doc > g.doc && got[i - 1].score == g.score) {
      return "tied documents out of id order at rank " + std::to_string(i + 1);
    }
  }
  return {};
}

std::map<Qid, splits::Split> replay_assignment(std::vector<splits::EventSequence> sequences,
                                              const splits::Fractions& fractions, std::uint64_t seed) {
  splits::SplitRng rng(seed);
  for (std::size_t i = sequences.size() - 1; i > 0; --i) std::swap(sequences[i], sequences[rng.below(i + 1)]);
  std::size_t total = 0;
  for (const auto& s : sequences) total += s.members.size();
  std::array<std::size_t, 3> have{};
  std::map<Qid, splits::Split> out;
  for (const auto& s : sequences) {
    // Largest deficit wins; on equal deficits the earlier split wins.
    std::array<double, 3> deficit{};
    for (int k = 0; k < 3; ++k) deficit[k] = fractions.value[k] * static_cast<double>(total) - static_cast<double>(have[k]);
    const int pick = static_cast<int>(std::max_element(deficit.begin(), deficit.end()) - deficit.begin());
    for (Qid q : s.members) out[q] = splits::kAllSplits[pick];
    have[pick] += s.members.size();
  }
  return out;
}

corpus::Mention make_mention(std::string language, std::string page, std::size_t offset, std::string surface, Qid gold,
                             std::size_t context_length) {
  corpus::Mention m;
  m.language = std::move(language);
  m.source_title = std::move(page);
  m.offset = offset;
  m.id = m.language + ":" + m.source_title + ":" + std::to_string(offset);
  m.surface = std::move(surface);
  m.gold = gold;
  const std::size_t surface_len = unicode::codepoint_count(m.surface);
  const std::size_t pad = context_length > surface_len ? context_length - surface_len : 0;
  m.left_context = std::string(pad / 2, 'a');
  m.right_context = std::string(pad - pad / 2, 'b');
  return m;
}

std::vector<std::string> reference_segmentation(const std::string& input) {
  const std::string text = unicode::nfkc(input);
  std::vector<std::string> out;
  std::string word;
  bool word_hangul = false;
  auto flush = [&] {
    if (!word.empty()) out.push_back(unicode::case_fold(word));
    word.clear();
  };
  auto ideograph = [](UChar32 c) {
    return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) || (c >= 0x3040 && c <= 0x30FF) ||
           (c >= 0x0E00 && c <= 0x0E7F);
  };
  // Hangul syllables form words of their own, split from adjacent letters.
  auto hangul = [](UChar32 c) { return (c >= 0xAC00 && c <= 0xD7AF) || (c >= 0x1100 && c <= 0x11FF); };
  std::int32_t i = 0;
  const auto len = static_cast<std::int32_t>(text.size());
  while (i < len) {
    const std::int32_t start = i;
    UChar32 c = 0;
    U8_NEXT(text.data(), i, len, c);
    const std::string ch = text.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start));
    const auto type = c >= 0 ? u_charType(c) : U_UNASSIGNED;
    const bool mark = type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK;
    if (c >= 0 && ideograph(c)) {
      flush();
      out.push_back(ch);
    } else if (c >= 0 && (u_isalnum(c) || mark)) {
      if (!mark && !word.empty() && hangul(c) != word_hangul) flush();
      if (word.empty()) word_hangul = hangul(c);
      word += ch;
    } else {
      flush();
    }
  }
  flush();
  return out;
}

TempDir::TempDir(const std::string& tag) {
  std::string pattern = (fs::temp_directory_path() / ("xlel-" + tag + "-XXXXXX")).string();
  if (::mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void copy_fixture_inputs(const fs::path& from, const fs::path& to) {
  fs::create_directories(to);
  for (const auto& entry : fs::directory_iterator(from)) {
    if (entry.is_regular_file()) fs::copy_file(entry.path(), to / entry.path().filename(), fs::copy_options::overwrite_existing);
  }
}

std::vector<std::string> golden_mismatches(const fs::path& golden, const fs::path& out) {
  std::vector<std::string> bad;
  for (const auto& entry : fs::recursive_directory_iterator(golden)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), golden);
    const auto produced = out / rel;
    if (!fs::exists(produced) || read_file(produced) != read_file(entry.path())) bad.push_back(rel.generic_string());
  }
  std::sort(bad.begin(), bad.end());
  return bad;
}

std::map<std::string, std::string> tree_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir).generic_string();
    if (rel == "manifest.json" || rel == ".xlel.lock") continue;
    out[rel] = read_file(entry.path());
  }
  return out;
}

}  // namespace xlel::testing
