#include "xlel/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <functional>
#include <iostream>
#include <json.hpp>

#include "xlel/errors.hpp"
#include "xlel/hash.hpp"
#include "xlel/io.hpp"

namespace xlel {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / ".xlel.lock") {
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw_config("output directory is locked by another run (" + path_.string() + "); remove the file if that run died");
    }
    throw_config("cannot create lock " + path_.string() + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

namespace {

constexpr const char* kCacheFile = ".cache_key";

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Runner {
 public:
  Runner(const PipelineConfig& c, const PipelineOptions& o) : config_(c), options_(o) {}

  // Runs `fn` into `dir` unless `.cache_key` there matches `key` and every
  // recorded output still has its recorded hash. Returns the key digest,
  // which downstream stages fold into their own keys.
  std::string stage(const std::string& name, const fs::path& dir, const std::string& key,
                    const std::function<stages::StageReport()>& fn) {
    const std::string digest = sha256_hex(std::string(tool_version()) + "\n" + name + "\n" + key);
    StageOutcome outcome;
    outcome.name = name;
    if (auto cached = cache_hit(dir, digest)) {
      outcome.cache_hit = true;
      outcome.report = std::move(*cached);
    } else {
      std::error_code ec;
      fs::remove_all(dir, ec);
      fs::create_directories(dir);
      outcome.report = fn();
      std::string record = digest + "\n";
      for (const auto& out : outcome.report.outputs) record += file_sha256(dir / out) + "  " + out + "\n";
      write_file_atomic(dir / kCacheFile, record);
    }
    if (!options_.quiet) {
      std::cerr << "[xlel] " << name << (outcome.cache_hit ? " (cached)" : "") << "\n";
    }
    dirs_.push_back(dir);
    result_.stages.push_back(std::move(outcome));
    return digest;
  }

  PipelineResult& result() { return result_; }
  const std::vector<fs::path>& dirs() const { return dirs_; }

 private:
  std::optional<stages::StageReport> cache_hit(const fs::path& dir, const std::string& digest) const {
    const fs::path key_file = dir / kCacheFile;
    if (!fs::is_regular_file(key_file) || !fs::is_regular_file(dir / "manifest.json")) return std::nullopt;
    const auto lines = read_lines(key_file);
    if (lines.empty() || lines[0] != digest) return std::nullopt;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto sep = lines[i].find("  ");
      if (sep == std::string::npos) return std::nullopt;
      const fs::path out = dir / lines[i].substr(sep + 2);
      if (!fs::is_regular_file(out) || file_sha256(out) != lines[i].substr(0, sep)) return std::nullopt;
    }
    return stages::stage_report_from_json(read_file(dir / "manifest.json"));
  }

  const PipelineConfig& config_;
  const PipelineOptions& options_;
  PipelineResult result_;
  std::vector<fs::path> dirs_;
};

std::string optional_hash(const std::optional<fs::path>& p) { return p ? file_sha256(*p) : std::string("default"); }

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& c, const PipelineOptions& o) {
  c.validate();
  const fs::path out = c.output_dir;
  fs::create_directories(out);
  DirectoryLock lock(out);

  const std::string config_hash = c.hash();
  const fs::path hash_file = out / "config.hash";
  if (fs::is_regular_file(hash_file)) {
    const auto previous = std::string(trim(read_file(hash_file)));
    if (previous != config_hash && !o.force) {
      throw_config("output directory " + out.string() + " was produced by a different config (" + previous +
                   "); use --force to overwrite");
    }
  }
  write_file_atomic(hash_file, config_hash + "\n");
  const std::string started = utc_now();

  std::map<std::string, std::string> input_hashes;
  auto input = [&](const fs::path& p) {
    require_file(p, "input");
    const auto h = file_sha256(p);
    const std::string rel = c.base_dir.empty() ? p.generic_string() : p.lexically_relative(c.base_dir).generic_string();
    input_hashes[rel] = h;
    return h;
  };

  Runner run(c, o);
  const std::string dates = optional_hash(c.date_patterns_file);

  // Ingest.
  std::string wp_keys;
  for (const auto& [lang, dump] : c.wikipedia) {
    const fs::path dir = out / "ingest" / "wikipedia" / lang;
    const std::string key = "wikipedia|" + lang + "|" + input(dump);
    wp_keys += run.stage("ingest/wikipedia/" + lang, dir, key, [&] {
      return stages::run_ingest({dump, lang, wikitext::WikiKind::wikipedia, c.date_patterns_file, dir, o.jobs});
    }) + ",";
  }
  std::string wn_keys;
  for (const auto& [lang, dump] : c.wikinews) {
    const fs::path dir = out / "ingest" / "wikinews" / lang;
    const std::string key = "wikinews|" + lang + "|" + input(dump) + "|" + dates;
    wn_keys += run.stage("ingest/wikinews/" + lang, dir, key, [&] {
      return stages::run_ingest({dump, lang, wikitext::WikiKind::wikinews, c.date_patterns_file, dir, o.jobs});
    }) + ",";
  }

  // Event extraction.
  std::string languages_text;
  for (const auto& l : c.languages) languages_text += l + "\n";
  const fs::path languages_file = out / "languages.txt";
  write_file_atomic(languages_file, languages_text);
  const fs::path kbx_dir = out / "kbx";
  const std::string kbx_key = run.stage(
      "kbx", kbx_dir,
      input(c.wikidata) + "|" + optional_hash(c.rules_file) + "|" + sha256_hex(languages_text) + "|" + wp_keys, [&] {
        return stages::run_kbx({c.wikidata, c.rules_file, languages_file, out / "ingest" / "wikipedia", kbx_dir, o.jobs});
      });

  // Corpus.
  std::string patterns_text;
  for (const auto& [lang, list] : c.temporal_patterns) {
    for (const auto& re : list) patterns_text += lang + "\t" + re + "\n";
  }
  const std::string thresholds_key = std::to_string(c.thresholds.min_mentions) + "|" + fmt(c.thresholds.title_match_max) +
                                     "|" + std::to_string(c.thresholds.context_min) + "|" +
                                     std::to_string(c.thresholds.context_max) + "|" + sha256_hex(patterns_text);
  stages::CorpusOptions co;
  co.pages = out / "ingest" / "wikipedia";
  co.events = kbx_dir;
  co.out = out / "corpus";
  co.thresholds = c.thresholds;
  co.temporal_patterns = c.temporal_patterns;
  co.date_patterns = c.date_patterns_file;
  const std::string corpus_key =
      run.stage("corpus", co.out, kbx_key + "|" + wp_keys + "|" + thresholds_key, [&] { return stages::run_corpus(co); });

  std::string wikinews_key = "none";
  const fs::path wn_corpus = out / "corpus_wikinews";
  if (!c.wikinews.empty()) {
    stages::CorpusOptions wo = co;
    wo.pages = out / "ingest" / "wikinews";
    wo.out = wn_corpus;
    wo.wikinews = true;
    wo.wikipedia_corpus = co.out;
    wo.wikipedia_pages = co.pages;
    wikinews_key = run.stage("corpus_wikinews", wn_corpus, corpus_key + "|" + wn_keys + "|" + dates,
                             [&] { return stages::run_corpus(wo); });
  }

  // Splits.
  const fs::path split_dir = out / "split";
  stages::SplitOptions so;
  so.events = kbx_dir;
  so.corpus = co.out;
  if (!c.wikinews.empty()) so.wikinews = wn_corpus;
  so.seed = c.seed;
  so.fractions = c.fractions;
  so.out = split_dir;
  const std::string split_key = run.stage(
      "split", split_dir,
      corpus_key + "|" + wikinews_key + "|" + std::to_string(c.seed) + "|" + fmt(c.fractions.value[0]) + "," +
          fmt(c.fractions.value[1]) + "," + fmt(c.fractions.value[2]),
      [&] { return stages::run_split(so); });

  // Index, retrieval, evaluation.
  const std::string bm25_key = std::string(bm25::to_string(c.variant)) + "|" + fmt(c.params.k1) + "|" + fmt(c.params.b) +
                               "|" + fmt(c.params.delta) + "|" + optional_hash(c.wordpiece_vocab);
  std::string ks_key;
  for (auto k : c.ks) ks_key += std::to_string(k) + ",";
  for (const auto task : c.tasks) {
    const std::string t(eval::to_string(task));
    const fs::path index_dir = out / "index" / t;
    const std::string index_key = run.stage("index/" + t, index_dir, kbx_key + "|" + corpus_key + "|" + bm25_key + "|" + t, [&] {
      return stages::run_index({kbx_dir, co.out, task, c.variant, c.params, c.wordpiece_vocab, index_dir, o.jobs});
    });

    auto retrieve = [&](const std::string& name, const fs::path& mentions, const std::string& mentions_key, bool meta) {
      const fs::path dir = out / "retrieve" / t / name;
      stages::RetrieveOptions ro;
      ro.index = index_dir;
      ro.mentions = mentions;
      ro.task = task;
      ro.variant = c.variant;
      ro.params = c.params;
      ro.window = c.window;
      ro.k = c.k;
      ro.meta = meta;
      ro.vocab = c.wordpiece_vocab;
      ro.out = dir;
      ro.jobs = o.jobs;
      run.stage("retrieve/" + t + "/" + name, dir,
                index_key + "|" + mentions_key + "|" + name + "|" + std::to_string(c.window) + "|" + std::to_string(c.k) +
                    "|" + (meta ? "meta" : "plain"),
                [&] { return stages::run_retrieve(ro); });
      return dir / "run.jsonl";
    };
    auto evaluate = [&](const std::string& name, const fs::path& run_file, const fs::path& mentions,
                        const std::optional<fs::path>& compare, const std::string& key) {
      const fs::path dir = out / "eval" / t / name;
      stages::EvalOptions eo;
      eo.run = run_file;
      eo.mentions = mentions;
      eo.compare = compare;
      eo.ks = c.ks;
      eo.task = task;
      eo.run_id = t + "/" + name;
      eo.subset_name = name;
      eo.out = dir;
      run.stage("eval/" + t + "/" + name, dir, key + "|" + ks_key, [&] { return stages::run_eval(eo); });
    };

    for (const auto split : c.eval_splits) {
      const std::string s(splits::to_string(split));
      const fs::path mentions = split_dir / ("mentions." + s + ".jsonl");
      const fs::path run_file = retrieve(s, mentions, split_key, false);
      evaluate(s, run_file, mentions, std::nullopt, index_key + "|" + split_key + "|" + s);
    }
    if (!c.wikinews.empty()) {
      for (const char* set : {"cross_domain", "zero_shot"}) {
        const std::string name = std::string("wikinews_") + set;
        const fs::path mentions = split_dir / ("wikinews." + std::string(set) + ".jsonl");
        const fs::path plain = retrieve(name, mentions, split_key, false);
        const fs::path meta = retrieve(name + "_meta", mentions, split_key, true);
        evaluate(name, plain, mentions, meta, index_key + "|" + split_key + "|" + name);
      }
    }
  }

  // Export.
  const fs::path export_dir = out / "export";
  run.stage("export", export_dir, kbx_key + "|" + corpus_key + "|" + split_key, [&] {
    return stages::run_export({co.out, split_dir, kbx_dir, c.wikinews.empty() ? std::nullopt : std::optional(split_dir), export_dir});
  });

  // Root manifest.
  ojson m;
  m["tool_version"] = tool_version();
  m["config_hash"] = config_hash;
  m["seed"] = c.seed;
  m["started_at"] = started;
  m["finished_at"] = utc_now();
  m["inputs"] = input_hashes;
  ojson list = ojson::array();
  for (std::size_t i = 0; i < run.result().stages.size(); ++i) {
    const auto& s = run.result().stages[i];
    list.push_back({{"name", s.name},
                    {"dir", run.dirs()[i].lexically_relative(out).generic_string()},
                    {"cache_hit", s.cache_hit},
                    {"counters", s.report.counters}});
  }
  m["stages"] = std::move(list);
  auto result = std::move(run.result());
  result.manifest = out / "manifest.json";
  write_file_atomic(result.manifest, m.dump(2) + "\n");
  return result;
}

}  // namespace xlel
