// xlel command line front end. Each subcommand maps onto one stage function;
// `run` drives the whole pipeline from a config file.

#include <CLI11.hpp>
#include <iostream>
#include <thread>

#include "xlel/config.hpp"
#include "xlel/errors.hpp"
#include "xlel/io.hpp"
#include "xlel/pipeline.hpp"
#include "xlel/stages.hpp"

namespace fs = std::filesystem;
using namespace xlel;

namespace {

void print_report(const stages::StageReport& r, const fs::path& out) {
  std::cout << r.stage << " -> " << out.string() << "\n";
  for (const auto& [k, v] : r.counters) std::cout << "  " << k << " = " << v << "\n";
}

std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  for (auto part : split(text, ',')) {
    const std::string s(trim(part));
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) throw_config("bad --ks value '" + text + "'");
    ks.push_back(std::stoul(s));
  }
  return ks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xlel: multilingual event linking dataset toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(tool_version()));

  std::uint64_t seed = 13;
  bool seed_given = false;
  bool force = false;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { seed = s; seed_given = true; }, "split seed");
  app.add_flag("--force", force, "overwrite an output directory produced by a different config");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  // kbx
  stages::KbxOptions kbx;
  std::string kbx_rules, kbx_langs, kbx_pages;
  auto* kbx_cmd = app.add_subcommand("kbx", "extract candidate events from a Wikidata dump");
  kbx_cmd->add_option("--wikidata", kbx.wikidata, "Wikidata JSON dump (.json or .json.gz)")->required();
  kbx_cmd->add_option("--rules", kbx_rules, "exclusion rules TSV (property, value; * wildcard)");
  kbx_cmd->add_option("--langs", kbx_langs, "language allowlist, one code per line");
  kbx_cmd->add_option("--pages", kbx_pages, "ingest output root (<dir>/<lang>/pages.jsonl) for descriptions");
  kbx_cmd->add_option("--out", kbx.out, "output directory")->required();

  // ingest
  stages::IngestOptions ingest;
  std::string ingest_kind = "wikipedia", ingest_dates;
  auto* ingest_cmd = app.add_subcommand("ingest", "parse a MediaWiki XML dump into pages.jsonl");
  ingest_cmd->add_option("--dump", ingest.dump, "XML dump (.xml, .xml.gz)")->required();
  ingest_cmd->add_option("--lang", ingest.language, "language code")->required();
  ingest_cmd->add_option("--kind", ingest_kind, "wikipedia|wikinews");
  ingest_cmd->add_option("--date-patterns", ingest_dates, "Wikinews date pattern JSON");
  ingest_cmd->add_option("--out", ingest.out, "output directory")->required();

  // corpus
  stages::CorpusOptions corpus;
  std::string corpus_wp_corpus, corpus_wp_pages, corpus_dates;
  auto* corpus_cmd = app.add_subcommand("corpus", "harvest and filter mentions");
  corpus_cmd->add_option("--pages", corpus.pages, "ingest output root")->required();
  corpus_cmd->add_option("--events", corpus.events, "kbx output directory")->required();
  corpus_cmd->add_option("--out", corpus.out, "output directory")->required();
  corpus_cmd->add_flag("--wikinews", corpus.wikinews, "harvest the Wikinews evaluation set");
  corpus_cmd->add_option("--wikipedia-corpus", corpus_wp_corpus, "Wikipedia corpus directory (event set for --wikinews)");
  corpus_cmd->add_option("--wikipedia-pages", corpus_wp_pages, "Wikipedia ingest root (redirects for --wikinews)");
  corpus_cmd->add_option("--date-patterns", corpus_dates, "Wikinews date pattern JSON");
  corpus_cmd->add_option("--min-mentions", corpus.thresholds.min_mentions);
  corpus_cmd->add_option("--title-match-max", corpus.thresholds.title_match_max);
  corpus_cmd->add_option("--context-min", corpus.thresholds.context_min);
  corpus_cmd->add_option("--context-max", corpus.thresholds.context_max);

  // split
  stages::SplitOptions split_o;
  std::string split_corpus, split_wikinews, split_fractions = "0.8,0.1,0.1";
  auto* split_cmd = app.add_subcommand("split", "assign events to zero-shot train/dev/test splits");
  split_cmd->add_option("--events", split_o.events, "kbx output directory")->required();
  split_cmd->add_option("--corpus", split_corpus, "corpus directory (restricts to surviving events, writes mention files)");
  split_cmd->add_option("--wikinews", split_wikinews, "Wikinews corpus directory");
  split_cmd->add_option("--fractions", split_fractions, "train,dev,test event fractions");
  split_cmd->add_option("--out", split_o.out, "output directory")->required();

  // index
  stages::IndexOptions index;
  std::string index_task = "multilingual", index_variant = "plus", index_corpus, index_vocab;
  auto* index_cmd = app.add_subcommand("index", "build BM25 indexes over event descriptions");
  index_cmd->add_option("--events", index.events, "kbx output directory")->required();
  index_cmd->add_option("--corpus", index_corpus, "corpus directory (restricts to surviving events)");
  index_cmd->add_option("--task", index_task, "multilingual|crosslingual");
  index_cmd->add_option("--variant", index_variant, "okapi|plus|l");
  index_cmd->add_option("--k1", index.params.k1);
  index_cmd->add_option("--b", index.params.b);
  index_cmd->add_option("--delta", index.params.delta);
  index_cmd->add_option("--vocab", index_vocab, "WordPiece vocabulary file");
  index_cmd->add_option("--out", index.out, "output directory")->required();

  // retrieve
  stages::RetrieveOptions retrieve;
  std::string retrieve_task = "multilingual", retrieve_variant = "plus", retrieve_vocab;
  bm25::Params retrieve_params;
  retrieve.out = ".";
  auto* retrieve_cmd = app.add_subcommand("retrieve", "rank candidate events for each mention");
  retrieve_cmd->add_option("--index", retrieve.index, "index directory or .bm25 file")->required();
  retrieve_cmd->add_option("--mentions", retrieve.mentions, "mentions JSONL")->required();
  retrieve_cmd->add_option("--task", retrieve_task, "multilingual|crosslingual");
  retrieve_cmd->add_option("--variant", retrieve_variant, "okapi|plus|l");
  auto* k1_opt = retrieve_cmd->add_option("--k1", retrieve_params.k1);
  auto* b_opt = retrieve_cmd->add_option("--b", retrieve_params.b);
  auto* delta_opt = retrieve_cmd->add_option("--delta", retrieve_params.delta);
  retrieve_cmd->add_option("--window", retrieve.window, "context tokens per side");
  retrieve_cmd->add_option("--k", retrieve.k, "candidates per mention");
  retrieve_cmd->add_flag("--meta", retrieve.meta, "prepend Wikinews title/date to the query");
  retrieve_cmd->add_option("--vocab", retrieve_vocab, "WordPiece vocabulary file");
  retrieve_cmd->add_option("--out", retrieve.out, "output directory (run.jsonl)");

  // eval
  stages::EvalOptions ev;
  std::string eval_compare, eval_splits, eval_subset, eval_ks = "1,4,8,16", eval_task = "multilingual";
  ev.out = ".";
  auto* eval_cmd = app.add_subcommand("eval", "score a run against gold mentions");
  eval_cmd->add_option("--run", ev.run, "run.jsonl")->required();
  eval_cmd->add_option("--mentions", ev.mentions, "gold mentions JSONL")->required();
  eval_cmd->add_option("--compare", eval_compare, "second run; writes delta.json (second minus first)");
  eval_cmd->add_option("--splits", eval_splits, "splits.tsv (with --subset)");
  eval_cmd->add_option("--subset", eval_subset, "comma list of train,dev,test");
  eval_cmd->add_option("--ks", eval_ks, "recall cutoffs");
  eval_cmd->add_option("--task", eval_task, "multilingual|crosslingual");
  eval_cmd->add_option("--run-id", ev.run_id);
  eval_cmd->add_option("--out", ev.out, "output directory");

  // run
  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run the whole pipeline from a config file");
  run_cmd->add_option("--config", config_path, "pipeline config JSON")->required();
  bool quiet = false;
  run_cmd->add_flag("--quiet", quiet);

  // export
  stages::ExportOptions ex;
  std::string export_wikinews;
  auto* export_cmd = app.add_subcommand("export", "write the release bundle");
  export_cmd->add_option("--corpus", ex.corpus, "corpus directory")->required();
  export_cmd->add_option("--splits", ex.splits, "split directory")->required();
  export_cmd->add_option("--events", ex.events, "kbx output directory")->required();
  export_cmd->add_option("--wikinews", export_wikinews, "split directory holding the Wikinews sets");
  export_cmd->add_option("--out", ex.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (kbx_cmd->parsed()) {
      kbx.rules = opt_path(kbx_rules);
      kbx.languages = opt_path(kbx_langs);
      kbx.pages = opt_path(kbx_pages);
      kbx.jobs = jobs;
      print_report(stages::run_kbx(kbx), kbx.out);
    } else if (ingest_cmd->parsed()) {
      ingest.kind = wikitext::parse_kind(ingest_kind);
      ingest.date_patterns = opt_path(ingest_dates);
      ingest.jobs = jobs;
      print_report(stages::run_ingest(ingest), ingest.out);
    } else if (corpus_cmd->parsed()) {
      corpus.wikipedia_corpus = opt_path(corpus_wp_corpus);
      corpus.wikipedia_pages = opt_path(corpus_wp_pages);
      corpus.date_patterns = opt_path(corpus_dates);
      print_report(stages::run_corpus(corpus), corpus.out);
    } else if (split_cmd->parsed()) {
      split_o.corpus = opt_path(split_corpus);
      split_o.wikinews = opt_path(split_wikinews);
      split_o.fractions = splits::Fractions::parse(split_fractions);
      split_o.seed = seed;
      print_report(stages::run_split(split_o), split_o.out);
    } else if (index_cmd->parsed()) {
      index.corpus = opt_path(index_corpus);
      index.task = eval::parse_task(index_task);
      index.variant = bm25::parse_variant(index_variant);
      index.vocab = opt_path(index_vocab);
      index.jobs = jobs;
      print_report(stages::run_index(index), index.out);
    } else if (retrieve_cmd->parsed()) {
      retrieve.task = eval::parse_task(retrieve_task);
      retrieve.variant = bm25::parse_variant(retrieve_variant);
      if (k1_opt->count() + b_opt->count() + delta_opt->count() > 0) retrieve.params = retrieve_params;
      retrieve.vocab = opt_path(retrieve_vocab);
      retrieve.jobs = jobs;
      print_report(stages::run_retrieve(retrieve), retrieve.out);
    } else if (eval_cmd->parsed()) {
      ev.compare = opt_path(eval_compare);
      ev.splits = opt_path(eval_splits);
      if (!eval_subset.empty()) {
        if (!ev.splits) throw_config("--subset needs --splits");
        for (auto part : split(eval_subset, ',')) ev.subset.push_back(splits::parse_split(trim(part)));
        ev.subset_name = eval_subset;
      }
      ev.ks = parse_ks(eval_ks);
      ev.task = eval::parse_task(eval_task);
      const auto r = stages::run_eval(ev);
      print_report(r, ev.out);
      std::cout << read_file(ev.out / "report.json");
    } else if (run_cmd->parsed()) {
      auto config = load_config(config_path);
      if (seed_given) config.seed = seed;
      PipelineOptions po;
      po.force = force;
      po.jobs = jobs;
      po.quiet = quiet;
      const auto result = run_pipeline(config, po);
      std::size_t hits = 0;
      for (const auto& s : result.stages) hits += s.cache_hit ? 1 : 0;
      std::cout << "pipeline finished: " << result.stages.size() << " stages (" << hits << " cached), manifest "
                << result.manifest.string() << "\n";
    } else if (export_cmd->parsed()) {
      ex.wikinews = opt_path(export_wikinews);
      print_report(stages::run_export(ex), ex.out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "xlel: config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "xlel: error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
