#pragma once

// Event sequences and zero-shot train/dev/test assignment.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xlel/corpus.hpp"
#include "xlel/qid.hpp"

namespace xlel::splits {

enum class Split { train, dev, test };
inline constexpr std::array<Split, 3> kAllSplits = {Split::train, Split::dev, Split::test};
std::string_view to_string(Split s);
Split parse_split(std::string_view text);

struct EventSequence {
  std::string sequence_id;  // smallest member QID
  std::vector<Qid> members; // ascending
};

/// Connected components of `events` under `edges`; edges touching an event
/// outside the set are ignored. Sorted by sequence id.
std::vector<EventSequence> build_sequences(std::span<const Qid> events, const std::set<QidPair>& edges);

/// Sequences computed on `all_events`, then restricted to `kept`, dropping
/// sequences with no kept member. Two kept events joined only through a
/// dropped one stay in one sequence.
std::vector<EventSequence> restrict_sequences(std::span<const EventSequence> sequences,
                                              const std::set<Qid>& kept);

struct Fractions {
  std::array<double, 3> value{0.8, 0.1, 0.1};

  /// Parses "a,b,c"; throws ConfigError unless three non-negative values sum to 1.
  static Fractions parse(std::string_view text);
  void validate() const;
};

struct SplitAssignment {
  std::map<Qid, Split> split;
  std::map<Qid, std::string> sequence_of;
  std::uint64_t seed = 0;
  Fractions fractions;
  std::array<std::size_t, 3> event_counts{};
  std::array<std::size_t, 3> sequence_counts{};

  Split at(Qid q) const;
  bool contains(Qid q) const { return split.count(q) > 0; }
};

/// Seeded Fisher-Yates shuffle of the sequences, then each goes to the split
/// with the largest remaining event deficit (ties: train, dev, test).
/// Throws DataError on fewer than three sequences.
SplitAssignment assign_splits(std::span<const EventSequence> sequences, const Fractions& fractions,
                              std::uint64_t seed);

/// Uniform integer in [0, bound) from the splitmix64 stream; shared with tests
/// so the shuffle can be replayed.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

struct WikinewsSets {
  std::vector<corpus::Mention> cross_domain;
  std::vector<corpus::Mention> zero_shot;
};

/// Cross-domain is every mention; zero-shot keeps golds assigned to dev/test.
/// Mentions of events outside the assignment are treated as train.
WikinewsSets derive_wikinews_sets(std::span<const corpus::Mention> mentions,
                                  const SplitAssignment& assignment);

/// Columns: qid, split, sequence_id. Rows in QID order.
std::string format_splits(const SplitAssignment& a);
SplitAssignment read_splits(const std::filesystem::path& path);

}  // namespace xlel::splits
