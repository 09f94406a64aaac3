#include "xlel/splits.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xlel/errors.hpp"
#include "xlel/io.hpp"
#include "xlel/union_find.hpp"

namespace xlel::splits {

namespace {
constexpr std::string_view kSplitNames[] = {"train", "dev", "test"};
}

std::string_view to_string(Split s) { return kSplitNames[static_cast<std::size_t>(s)]; }

Split parse_split(std::string_view text) {
  for (Split s : kAllSplits) {
    if (to_string(s) == text) return s;
  }
  throw_config("unknown split '" + std::string(text) + "' (expected train|dev|test)");
}

std::vector<EventSequence> build_sequences(std::span<const Qid> events, const std::set<QidPair>& edges) {
  std::vector<Qid> nodes(events.begin(), events.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  auto index_of = [&](Qid q) -> std::optional<std::size_t> {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), q);
    if (it == nodes.end() || *it != q) return std::nullopt;
    return static_cast<std::size_t>(it - nodes.begin());
  };
  UnionFind uf(nodes.size());
  for (const auto& e : edges) {
    const auto a = index_of(e.first);
    const auto b = index_of(e.second);
    if (a && b) uf.unite(*a, *b);
  }
  std::map<std::size_t, std::vector<Qid>> groups;
  for (std::size_t i = 0; i < nodes.size(); ++i) groups[uf.find(i)].push_back(nodes[i]);
  std::vector<EventSequence> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) out.push_back(EventSequence{members.front().str(), std::move(members)});
  std::sort(out.begin(), out.end(),
            [](const EventSequence& a, const EventSequence& b) { return a.members.front() < b.members.front(); });
  return out;
}

std::vector<EventSequence> restrict_sequences(std::span<const EventSequence> sequences, const std::set<Qid>& kept) {
  std::vector<EventSequence> out;
  for (const auto& s : sequences) {
    EventSequence r;
    for (Qid q : s.members) {
      if (kept.count(q) > 0) r.members.push_back(q);
    }
    if (r.members.empty()) continue;
    r.sequence_id = r.members.front().str();
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(),
            [](const EventSequence& a, const EventSequence& b) { return a.members.front() < b.members.front(); });
  return out;
}

Fractions Fractions::parse(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw_config("fractions must be three comma-separated values, got '" + std::string(text) + "'");
  Fractions f;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string part(trim(parts[i]));
    std::size_t used = 0;
    try {
      f.value[i] = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) throw_config("bad fraction '" + part + "'");
  }
  f.validate();
  return f;
}

void Fractions::validate() const {
  double sum = 0.0;
  for (double v : value) {
    if (!(v >= 0.0)) throw_config("fractions must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw_config("fractions must sum to 1, got " + std::to_string(sum));
}

Split SplitAssignment::at(Qid q) const {
  const auto it = split.find(q);
  if (it == split.end()) throw_data("no split assignment for " + q.str());
  return it->second;
}

std::uint64_t SplitRng::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitRng::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

SplitAssignment assign_splits(std::span<const EventSequence> sequences, const Fractions& fractions,
                              std::uint64_t seed) {
  fractions.validate();
  if (sequences.size() < 3) {
    throw_data("need at least 3 event sequences to form train/dev/test, got " + std::to_string(sequences.size()));
  }
  std::vector<const EventSequence*> order;
  order.reserve(sequences.size());
  for (const auto& s : sequences) order.push_back(&s);
  SplitRng rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  std::size_t total = 0;
  for (const auto& s : sequences) total += s.members.size();

  SplitAssignment a;
  a.seed = seed;
  a.fractions = fractions;
  for (const EventSequence* s : order) {
    std::size_t best = 0;
    double best_deficit = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const double deficit = fractions.value[k] * static_cast<double>(total) - static_cast<double>(a.event_counts[k]);
      if (k == 0 || deficit > best_deficit) {
        best = k;
        best_deficit = deficit;
      }
    }
    for (Qid q : s->members) {
      a.split[q] = kAllSplits[best];
      a.sequence_of[q] = s->sequence_id;
    }
    a.event_counts[best] += s->members.size();
    ++a.sequence_counts[best];
  }
  return a;
}

WikinewsSets derive_wikinews_sets(std::span<const corpus::Mention> mentions, const SplitAssignment& assignment) {
  WikinewsSets sets;
  for (const auto& m : mentions) {
    sets.cross_domain.push_back(m);
    const auto it = assignment.split.find(m.gold);
    if (it != assignment.split.end() && it->second != Split::train) sets.zero_shot.push_back(m);
  }
  return sets;
}

std::string format_splits(const SplitAssignment& a) {
  std::ostringstream out;
  out << "qid\tsplit\tsequence_id\n";
  for (const auto& [qid, s] : a.split) {
    const auto seq = a.sequence_of.find(qid);
    out << qid.str() << '\t' << to_string(s) << '\t' << (seq != a.sequence_of.end() ? seq->second : qid.str())
        << '\n';
  }
  return out.str();
}

SplitAssignment read_splits(const std::filesystem::path& path) {
  require_file(path, "splits file");
  SplitAssignment a;
  std::set<std::string> sequences[3];
  LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    if (trim(line).empty() || line.starts_with("qid\t")) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 3) {
      throw_data(path.string() + ":" + std::to_string(reader.line_number()) + ": expected 3 columns");
    }
    const Qid q = Qid::parse_or_throw(cols[0]);
    Split s;
    try {
      s = parse_split(cols[1]);
    } catch (const ConfigError& ex) {
      throw_data(path.string() + ":" + std::to_string(reader.line_number()) + ": " + ex.what());
    }
    a.split[q] = s;
    a.sequence_of[q] = std::string(cols[2]);
    ++a.event_counts[static_cast<std::size_t>(s)];
    sequences[static_cast<std::size_t>(s)].insert(std::string(cols[2]));
  }
  for (std::size_t k = 0; k < 3; ++k) a.sequence_counts[k] = sequences[k].size();
  return a;
}

}  // namespace xlel::splits
