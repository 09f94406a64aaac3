#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xlel/bm25.hpp"
#include "xlel/corpus.hpp"
#include "xlel/evalkit.hpp"
#include "xlel/splits.hpp"

namespace xlel {

/// Declarative pipeline configuration (JSON). Relative paths resolve against
/// the directory holding the config file.
struct PipelineConfig {
  /// Directory relative paths were resolved against; canonical_json() prints
  /// paths relative to it so the hash survives moving the whole tree.
  std::filesystem::path base_dir;
  std::filesystem::path output_dir;
  std::filesystem::path wikidata;
  std::map<std::string, std::filesystem::path> wikipedia;  // language -> XML dump
  std::map<std::string, std::filesystem::path> wikinews;   // language -> XML dump
  std::vector<std::string> languages;                      // allowlist
  std::optional<std::filesystem::path> rules_file;
  std::optional<std::filesystem::path> date_patterns_file;
  std::map<std::string, std::vector<std::string>> temporal_patterns;  // language ("*" = all) -> regexes
  corpus::Thresholds thresholds;
  std::uint64_t seed = 13;
  splits::Fractions fractions;
  bm25::Variant variant = bm25::Variant::plus;
  bm25::Params params;
  std::size_t window = 16;
  std::size_t k = 8;
  std::optional<std::filesystem::path> wordpiece_vocab;
  std::vector<eval::Task> tasks{eval::Task::multilingual};
  std::vector<std::size_t> ks{1, 4, 8, 16};
  std::vector<splits::Split> eval_splits{splits::Split::dev, splits::Split::test};

  /// Throws ConfigError on any invalid value.
  void validate() const;
  /// Canonical JSON of every setting; its hash keys the run cache.
  std::string canonical_json() const;
  std::string hash() const;
};

PipelineConfig parse_config(std::string_view json, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

std::string_view tool_version();

}  // namespace xlel
