#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "xlel/config.hpp"
#include "xlel/stages.hpp"

namespace xlel {

struct PipelineOptions {
  bool force = false;
  unsigned jobs = 1;
  bool quiet = false;
};

struct StageOutcome {
  std::string name;
  bool cache_hit = false;
  stages::StageReport report;
};

struct PipelineResult {
  std::vector<StageOutcome> stages;
  std::filesystem::path manifest;
};

/// ingest -> kbx -> corpus -> split -> index -> retrieve -> eval -> export.
/// Each stage is skipped when its cache key (stage options plus content
/// hashes of its inputs) matches the one stored beside its outputs. A
/// changed config against an existing output directory is refused unless
/// `force` is set. Throws ConfigError / DataError.
PipelineResult run_pipeline(const PipelineConfig& config, const PipelineOptions& options);

/// Exclusive lock on an output directory (`.xlel.lock`), released on destruction.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace xlel
