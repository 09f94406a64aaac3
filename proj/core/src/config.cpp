#include "xlel/config.hpp"

#include <algorithm>
#include <json.hpp>
#include <set>

#include "xlel/errors.hpp"
#include "xlel/hash.hpp"
#include "xlel/io.hpp"

#ifndef XLEL_VERSION
#define XLEL_VERSION "0.0.0"
#endif

namespace xlel {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view tool_version() { return XLEL_VERSION; }

namespace {

void reject_unknown(const json& j, std::string_view where, std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw_config("config: unknown key '" + key + "' in " + std::string(where));
    }
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

std::size_t non_negative(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j[key].get<std::int64_t>();
  if (v < 0) throw_config(std::string("config: ") + key + " must not be negative");
  return static_cast<std::size_t>(v);
}

}  // namespace

void PipelineConfig::validate() const {
  thresholds.validate();
  fractions.validate();
  if (output_dir.empty()) throw_config("config: output_dir is required");
  if (wikidata.empty()) throw_config("config: wikidata dump path is required");
  if (wikipedia.empty()) throw_config("config: at least one Wikipedia dump is required");
  if (languages.empty()) throw_config("config: language allowlist is empty");
  const std::set<std::string> allow(languages.begin(), languages.end());
  for (const auto& [lang, path] : wikipedia) {
    if (allow.count(lang) == 0) throw_config("config: Wikipedia dump for '" + lang + "' is outside the language allowlist");
  }
  for (const auto& [lang, path] : wikinews) {
    if (allow.count(lang) == 0) throw_config("config: Wikinews dump for '" + lang + "' is outside the language allowlist");
  }
  if (std::find(std::begin(bm25::kWindowSizes), std::end(bm25::kWindowSizes), window) == std::end(bm25::kWindowSizes)) {
    throw_config("config: window must be one of 0, 8, 16, 32, 64, 128");
  }
  if (k < 1) throw_config("config: retrieval depth k must be at least 1");
  if (params.k1 < 0 || params.b < 0 || params.b > 1 || params.delta < 0) {
    throw_config("config: BM25 parameters out of range (k1 >= 0, 0 <= b <= 1, delta >= 0)");
  }
  if (ks.empty()) throw_config("config: ks is empty");
  for (std::size_t v : ks) {
    if (v == 0) throw_config("config: recall cutoffs must be positive");
  }
  if (tasks.empty()) throw_config("config: no evaluation task");
  if (eval_splits.empty()) throw_config("config: no evaluation split");
}

std::string PipelineConfig::canonical_json() const {
  auto path_str = [&](const fs::path& p) {
    return base_dir.empty() ? p.generic_string() : p.lexically_relative(base_dir).generic_string();
  };
  ojson j;
  j["output_dir"] = path_str(output_dir);
  j["wikidata"] = path_str(wikidata);
  ojson wp = ojson::object();
  for (const auto& [lang, p] : wikipedia) wp[lang] = path_str(p);
  j["wikipedia"] = std::move(wp);
  ojson wn = ojson::object();
  for (const auto& [lang, p] : wikinews) wn[lang] = path_str(p);
  j["wikinews"] = std::move(wn);
  std::vector<std::string> langs = languages;
  std::sort(langs.begin(), langs.end());
  j["languages"] = langs;
  j["rules_file"] = rules_file ? ojson(path_str(*rules_file)) : ojson(nullptr);
  j["date_patterns_file"] = date_patterns_file ? ojson(path_str(*date_patterns_file)) : ojson(nullptr);
  j["temporal_patterns"] = temporal_patterns;
  j["thresholds"] = {{"min_mentions", thresholds.min_mentions},
                     {"title_match_max", thresholds.title_match_max},
                     {"context_min", thresholds.context_min},
                     {"context_max", thresholds.context_max}};
  j["splits"] = {{"seed", seed}, {"fractions", fractions.value}};
  j["bm25"] = {{"variant", bm25::to_string(variant)},
               {"k1", params.k1},
               {"b", params.b},
               {"delta", params.delta},
               {"window", window},
               {"k", k},
               {"wordpiece_vocab", wordpiece_vocab ? ojson(path_str(*wordpiece_vocab)) : ojson(nullptr)}};
  ojson task_names = ojson::array();
  for (auto t : tasks) task_names.push_back(eval::to_string(t));
  ojson split_names = ojson::array();
  for (auto s : eval_splits) split_names.push_back(splits::to_string(s));
  j["eval"] = {{"tasks", task_names}, {"ks", ks}, {"splits", split_names}};
  return j.dump();
}

std::string PipelineConfig::hash() const { return sha256_hex(canonical_json()); }

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  PipelineConfig c;
  c.base_dir = base_dir.lexically_normal();
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw_config("config: top level must be an object");
    reject_unknown(j, "config", {"output_dir", "wikidata", "wikipedia", "wikinews", "languages", "rules_file",
                                 "date_patterns_file", "temporal_patterns", "thresholds", "splits", "bm25", "eval"});
    c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    c.wikidata = resolve(base_dir, j.at("wikidata").get<std::string>());
    for (const auto& [lang, p] : j.at("wikipedia").items()) c.wikipedia[lang] = resolve(base_dir, p.get<std::string>());
    if (j.contains("wikinews")) {
      for (const auto& [lang, p] : j["wikinews"].items()) c.wikinews[lang] = resolve(base_dir, p.get<std::string>());
    }
    if (j.contains("languages")) {
      const auto& l = j["languages"];
      if (l.is_string()) {
        const auto set = kbx::load_languages(resolve(base_dir, l.get<std::string>()));
        c.languages.assign(set.begin(), set.end());
      } else {
        c.languages = l.get<std::vector<std::string>>();
      }
    } else {
      const auto set = kbx::default_languages();
      c.languages.assign(set.begin(), set.end());
    }
    if (j.contains("rules_file") && !j["rules_file"].is_null()) {
      c.rules_file = resolve(base_dir, j["rules_file"].get<std::string>());
    }
    if (j.contains("date_patterns_file") && !j["date_patterns_file"].is_null()) {
      c.date_patterns_file = resolve(base_dir, j["date_patterns_file"].get<std::string>());
    }
    if (j.contains("temporal_patterns")) {
      c.temporal_patterns = j["temporal_patterns"].get<std::map<std::string, std::vector<std::string>>>();
    }
    if (j.contains("thresholds")) {
      const auto& t = j["thresholds"];
      reject_unknown(t, "thresholds", {"min_mentions", "title_match_max", "context_min", "context_max"});
      c.thresholds.min_mentions = non_negative(t, "min_mentions", c.thresholds.min_mentions);
      c.thresholds.title_match_max = t.value("title_match_max", c.thresholds.title_match_max);
      c.thresholds.context_min = non_negative(t, "context_min", c.thresholds.context_min);
      c.thresholds.context_max = non_negative(t, "context_max", c.thresholds.context_max);
    }
    if (j.contains("splits")) {
      const auto& s = j["splits"];
      reject_unknown(s, "splits", {"seed", "fractions"});
      c.seed = s.value("seed", c.seed);
      if (s.contains("fractions")) {
        const auto& f = s["fractions"];
        if (f.is_string()) {
          c.fractions = splits::Fractions::parse(f.get<std::string>());
        } else {
          const auto v = f.get<std::vector<double>>();
          if (v.size() != 3) throw_config("config: splits.fractions needs three values");
          std::copy(v.begin(), v.end(), c.fractions.value.begin());
        }
      }
    }
    if (j.contains("bm25")) {
      const auto& b = j["bm25"];
      reject_unknown(b, "bm25", {"variant", "k1", "b", "delta", "window", "k", "wordpiece_vocab"});
      if (b.contains("variant")) c.variant = bm25::parse_variant(b["variant"].get<std::string>());
      c.params.k1 = b.value("k1", c.params.k1);
      c.params.b = b.value("b", c.params.b);
      c.params.delta = b.value("delta", c.params.delta);
      c.window = non_negative(b, "window", c.window);
      c.k = non_negative(b, "k", c.k);
      if (b.contains("wordpiece_vocab") && !b["wordpiece_vocab"].is_null()) {
        c.wordpiece_vocab = resolve(base_dir, b["wordpiece_vocab"].get<std::string>());
      }
    }
    if (j.contains("eval")) {
      const auto& e = j["eval"];
      reject_unknown(e, "eval", {"tasks", "ks", "splits"});
      if (e.contains("tasks")) {
        c.tasks.clear();
        for (const auto& t : e["tasks"]) c.tasks.push_back(eval::parse_task(t.get<std::string>()));
      }
      if (e.contains("ks")) c.ks = e["ks"].get<std::vector<std::size_t>>();
      if (e.contains("splits")) {
        c.eval_splits.clear();
        for (const auto& s : e["splits"]) c.eval_splits.push_back(splits::parse_split(s.get<std::string>()));
      }
    }
  } catch (const json::exception& ex) {
    throw_config(std::string("config: ") + ex.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw_config("config file not found: " + path.string());
  const fs::path base = fs::absolute(path).parent_path();
  return parse_config(read_file(path), base);
}

}  // namespace xlel
