#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "xlel/errors.hpp"
#include "xlel/io.hpp"
#include "xlel/splits.hpp"

namespace xlel {
namespace {

using namespace splits;

struct RandomGraph {
  std::vector<Qid> nodes;
  std::set<QidPair> edges;
};

RandomGraph random_graph(std::mt19937_64& rng, std::size_t n, double edge_rate) {
  RandomGraph g;
  for (std::size_t i = 0; i < n; ++i) g.nodes.push_back(Qid(1 + rng() % (n * 4)));
  std::sort(g.nodes.begin(), g.nodes.end());
  g.nodes.erase(std::unique(g.nodes.begin(), g.nodes.end()), g.nodes.end());
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (u(rng) < edge_rate) {
      const Qid other = u(rng) < 0.1 ? Qid(999999) : g.nodes[rng() % g.nodes.size()];
      if (other != g.nodes[i]) g.edges.insert(QidPair::canonical(g.nodes[i], other));
    }
  }
  return g;
}

TEST(Sequences, MatchBreadthFirstComponents) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = random_graph(rng, 5 + rng() % 200, 0.4);
    const auto seqs = build_sequences(g.nodes, g.edges);
    const auto oracle = testing::bfs_components(g.nodes, g.edges);
    ASSERT_EQ(seqs.size(), oracle.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      EXPECT_EQ(seqs[i].members, oracle[i]);
      EXPECT_EQ(seqs[i].sequence_id, oracle[i].front().str());
    }
  }
}

TEST(Sequences, RestrictKeepsBridgedMembersTogether) {
  const std::vector<Qid> nodes{Qid(1), Qid(2), Qid(3), Qid(4)};
  const std::set<QidPair> edges{QidPair::canonical(Qid(1), Qid(2)), QidPair::canonical(Qid(2), Qid(3))};
  const auto seqs = build_sequences(nodes, edges);
  const auto restricted = restrict_sequences(seqs, {Qid(1), Qid(3)});
  ASSERT_EQ(restricted.size(), 1u);
  EXPECT_EQ(restricted[0].members, (std::vector<Qid>{Qid(1), Qid(3)}));
  EXPECT_EQ(restricted[0].sequence_id, "Q1");
}

TEST(Assignment, ReplaysGreedyOracle) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = random_graph(rng, 20 + rng() % 200, 0.5);
    const auto seqs = build_sequences(g.nodes, g.edges);
    if (seqs.size() < 3) continue;
    const std::uint64_t seed = rng();
    const Fractions f;
    const auto a = assign_splits(seqs, f, seed);
    EXPECT_EQ(a.split, testing::replay_assignment(seqs, f, seed)) << "trial " << trial;
  }
}

TEST(Assignment, SequencesAreAtomicAndSplitsDisjoint) {
  std::mt19937_64 rng(29);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = random_graph(rng, 150, 0.6);
    const auto seqs = build_sequences(g.nodes, g.edges);
    const auto a = assign_splits(seqs, Fractions{}, seed);
    std::size_t total = 0;
    for (const auto& s : seqs) {
      total += s.members.size();
      for (Qid q : s.members) EXPECT_EQ(a.at(q), a.at(s.members.front()));
    }
    EXPECT_EQ(a.split.size(), total);
    EXPECT_EQ(a.event_counts[0] + a.event_counts[1] + a.event_counts[2], total);
  }
}

TEST(Assignment, SingletonsHitFractions) {
  std::vector<EventSequence> seqs;
  for (std::uint64_t i = 1; i <= 1000; ++i) seqs.push_back({Qid(i).str(), {Qid(i)}});
  std::sort(seqs.begin(), seqs.end(), [](const auto& a, const auto& b) { return a.members[0] < b.members[0]; });
  const auto a = assign_splits(seqs, Fractions{}, 13);
  EXPECT_NEAR(static_cast<double>(a.event_counts[0]), 800.0, 1.0);
  EXPECT_NEAR(static_cast<double>(a.event_counts[1]), 100.0, 1.0);
  EXPECT_NEAR(static_cast<double>(a.event_counts[2]), 100.0, 1.0);
}

TEST(Assignment, DeterministicAndSeedSensitive) {
  std::vector<EventSequence> seqs;
  for (std::uint64_t i = 1; i <= 50; ++i) seqs.push_back({Qid(i).str(), {Qid(i)}});
  EXPECT_EQ(assign_splits(seqs, Fractions{}, 1).split, assign_splits(seqs, Fractions{}, 1).split);
  EXPECT_NE(assign_splits(seqs, Fractions{}, 1).split, assign_splits(seqs, Fractions{}, 2).split);
}

TEST(Assignment, RejectsTooFewSequences) {
  std::vector<EventSequence> seqs{{"Q1", {Qid(1), Qid(2)}}, {"Q3", {Qid(3)}}};
  EXPECT_THROW(assign_splits(seqs, Fractions{}, 1), DataError);
}

TEST(Fractions, Parse) {
  EXPECT_EQ(Fractions::parse("0.6,0.2,0.2").value[0], 0.6);
  EXPECT_THROW(Fractions::parse("0.5,0.2"), ConfigError);
  EXPECT_THROW(Fractions::parse("0.5,0.2,0.2"), ConfigError);
  EXPECT_THROW(Fractions::parse("1.2,-0.1,-0.1"), ConfigError);
}

TEST(Rng, BelowIsInRange) {
  SplitRng rng(42);
  for (std::uint64_t bound : {1ULL, 2ULL, 3ULL, 7ULL, 1000ULL, (1ULL << 63) + 1}) {
    for (int i = 0; i < 200; ++i) EXPECT_LT(rng.below(bound), bound);
  }
  // splitmix64 reference value for seed 0.
  SplitRng zero(0);
  EXPECT_EQ(zero.next(), 0xE220A8397B1DCDAFULL);
}

TEST(Splits, TsvRoundTripAndWikinewsSets) {
  std::vector<EventSequence> seqs;
  for (std::uint64_t i = 1; i <= 10; ++i) seqs.push_back({Qid(i).str(), {Qid(i)}});
  const auto a = assign_splits(seqs, Fractions{}, 5);
  testing::TempDir dir("splits");
  write_file_atomic(dir.path() / "s.tsv", format_splits(a));
  const auto back = read_splits(dir.path() / "s.tsv");
  EXPECT_EQ(back.split, a.split);
  EXPECT_EQ(format_splits(back), format_splits(a));

  std::vector<corpus::Mention> ms;
  for (std::uint64_t i = 1; i <= 11; ++i) ms.push_back(testing::make_mention("en", "N", i, "s", Qid(i)));
  const auto sets = derive_wikinews_sets(ms, a);
  EXPECT_EQ(sets.cross_domain.size(), ms.size());
  for (const auto& m : sets.zero_shot) EXPECT_NE(a.at(m.gold), Split::train);
  std::size_t unseen = 0;
  for (const auto& m : ms) unseen += a.contains(m.gold) && a.at(m.gold) != Split::train ? 1 : 0;
  EXPECT_EQ(sets.zero_shot.size(), unseen);
}

}  // namespace
}  // namespace xlel
