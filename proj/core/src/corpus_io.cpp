#include <fstream>
#include <json.hpp>

#include "xlel/corpus.hpp"
#include "xlel/errors.hpp"
#include "xlel/io.hpp"

namespace xlel::corpus {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string to_json(const CorpusStats& stats) {
  ojson j;
  j["events"] = stats.events;
  j["mentions"] = stats.mentions;
  j["languages_per_event"] = stats.languages_per_event;
  ojson buckets = ojson::object();
  for (Bucket b : kAllBuckets) {
    const auto i = static_cast<std::size_t>(b);
    buckets[std::string(to_string(b))] = {{"count", stats.bucket_counts[i]}, {"percent", stats.bucket_percent[i]}};
  }
  j["buckets"] = std::move(buckets);
  ojson langs = ojson::object();
  for (const auto& [lang, s] : stats.per_language) langs[lang] = {{"events", s.events}, {"mentions", s.mentions}};
  j["per_language"] = std::move(langs);
  return j.dump(2) + "\n";
}

std::string to_json_line(const Mention& m) {
  ojson j;
  j["id"] = m.id;
  j["language"] = m.language;
  j["source_title"] = m.source_title;
  j["offset"] = m.offset;
  j["surface"] = m.surface;
  j["left_context"] = m.left_context;
  j["right_context"] = m.right_context;
  j["gold_qid"] = m.gold.str();
  j["bucket"] = to_string(m.bucket);
  if (m.meta_title) j["meta_title"] = *m.meta_title;
  if (m.meta_date) j["meta_date"] = *m.meta_date;
  return j.dump();
}

Mention mention_from_json(std::string_view line) {
  try {
    const json j = json::parse(line);
    Mention m;
    m.id = j.at("id").get<std::string>();
    m.language = j.at("language").get<std::string>();
    m.source_title = j.at("source_title").get<std::string>();
    m.offset = j.at("offset").get<std::size_t>();
    m.surface = j.at("surface").get<std::string>();
    m.left_context = j.at("left_context").get<std::string>();
    m.right_context = j.at("right_context").get<std::string>();
    m.gold = Qid::parse_or_throw(j.at("gold_qid").get<std::string>());
    m.bucket = parse_bucket(j.at("bucket").get<std::string>());
    if (j.contains("meta_title") && !j["meta_title"].is_null()) m.meta_title = j["meta_title"].get<std::string>();
    if (j.contains("meta_date") && !j["meta_date"].is_null()) m.meta_date = j["meta_date"].get<std::string>();
    return m;
  } catch (const json::exception& ex) {
    throw_data(std::string("bad mention record: ") + ex.what());
  }
}

std::vector<Mention> read_mentions(const std::filesystem::path& path) {
  require_file(path, "mention file");
  std::vector<Mention> out;
  LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    if (trim(line).empty()) continue;
    try {
      out.push_back(mention_from_json(line));
    } catch (const DataError& ex) {
      throw_data(path.string() + ":" + std::to_string(reader.line_number()) + ": " + ex.what());
    }
  }
  return out;
}

void write_mentions(const std::filesystem::path& path, std::span<const Mention> mentions) {
  std::string content;
  for (const auto& m : mentions) {
    content += to_json_line(m);
    content.push_back('\n');
  }
  write_file_atomic(path, content);
}

}  // namespace xlel::corpus
