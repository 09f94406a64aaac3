#include "xlel/run_file.hpp"

#include <json.hpp>
#include <set>
#include <unordered_set>

#include "xlel/errors.hpp"
#include "xlel/io.hpp"

namespace xlel {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string to_json_line(const RetrievalResult& r) {
  ojson j;
  j["mention_id"] = r.mention_id;
  ojson ranked = ojson::array();
  for (const auto& c : r.ranked) ranked.push_back(ojson::array({c.qid.str(), c.score}));
  j["ranked"] = std::move(ranked);
  j["k"] = r.k;
  return j.dump();
}

namespace {

ScoredCandidate parse_candidate(const json& c) {
  ScoredCandidate out;
  if (c.is_array()) {
    if (c.size() != 2) throw_data("candidate must be [qid, score]");
    out.qid = Qid::parse_or_throw(c[0].get<std::string>());
    out.score = c[1].get<double>();
  } else if (c.is_object()) {
    out.qid = Qid::parse_or_throw(c.at("qid").get<std::string>());
    out.score = c.value("score", 0.0);
  } else {
    out.qid = Qid::parse_or_throw(c.get<std::string>());
  }
  return out;
}

}  // namespace

RunFile parse_run(std::string_view content, std::string_view source) {
  RunFile run;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  for (std::string_view line : split(content, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    RetrievalResult r;
    try {
      const json j = json::parse(line);
      if (!j.is_object()) throw_data("record is not an object");
      if (!j.contains("mention_id")) throw_data("missing key 'mention_id'");
      if (!j.contains("ranked")) throw_data("missing key 'ranked'");
      r.mention_id = j["mention_id"].get<std::string>();
      for (const auto& [key, value] : j.items()) {
        if (key != "mention_id" && key != "ranked" && key != "k") run.warnings.push_back(where + ": unknown key '" + key + "'");
      }
      std::set<Qid> seen;
      bool sorted = true;
      for (const auto& c : j["ranked"]) {
        ScoredCandidate cand = parse_candidate(c);
        if (!seen.insert(cand.qid).second) {
          run.warnings.push_back(where + ": duplicate candidate " + cand.qid.str() + " ignored");
          continue;
        }
        if (!r.ranked.empty() && cand.score > r.ranked.back().score) sorted = false;
        r.ranked.push_back(cand);
      }
      if (!sorted) run.warnings.push_back(where + ": scores not non-increasing; list order kept as given");
      if (j.contains("k")) {
        r.k = j["k"].get<std::size_t>();
        if (r.ranked.size() > r.k) run.warnings.push_back(where + ": more than k candidates");
      } else {
        r.k = r.ranked.size();
        run.warnings.push_back(where + ": missing 'k', using list length");
      }
    } catch (const json::exception& ex) {
      throw_data(where + ": " + ex.what());
    } catch (const DataError& ex) {
      throw_data(where + ": " + ex.what());
    }
    if (!ids.insert(r.mention_id).second) throw_data(where + ": duplicate mention_id '" + r.mention_id + "'");
    run.results.push_back(std::move(r));
  }
  return run;
}

RunFile read_run(const std::filesystem::path& path) {
  require_file(path, "run file");
  return parse_run(read_file(path), path.string());
}

void write_run(const std::filesystem::path& path, std::span<const RetrievalResult> results) {
  std::string content;
  for (const auto& r : results) {
    content += to_json_line(r);
    content.push_back('\n');
  }
  write_file_atomic(path, content);
}

}  // namespace xlel
