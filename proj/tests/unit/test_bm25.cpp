#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "xlel/bm25.hpp"
#include "xlel/errors.hpp"

namespace xlel {
namespace {

using namespace bm25;
using Docs = std::vector<std::vector<std::string>>;

Index make_index(const Docs& docs, Variant v, Params p = {}) {
  std::vector<DocKey> keys;
  for (std::size_t i = 0; i < docs.size(); ++i) keys.push_back({Qid(i + 1), "en"});
  return Index::from_tokens(keys, docs, v, p, Tokenizer().fingerprint());
}

Docs random_docs(std::mt19937_64& rng, std::size_t n, std::size_t vocab) {
  Docs docs(n);
  for (auto& d : docs) {
    const std::size_t len = 1 + rng() % 40;
    for (std::size_t i = 0; i < len; ++i) d.push_back("t" + std::to_string(rng() % vocab));
  }
  return docs;
}

std::vector<std::string> random_query(std::mt19937_64& rng, std::size_t vocab) {
  std::vector<std::string> q;
  const std::size_t len = 1 + rng() % 20;
  for (std::size_t i = 0; i < len; ++i) q.push_back("t" + std::to_string(rng() % (vocab + 5)));
  return q;
}

const Docs kBudapest{{"budapest", "2010", "european", "championships"},
                     {"budapest", "2006"},
                     {"2010", "world", "cup", "south", "africa", "final"}};

TEST(Index, PostingsAndStatistics) {
  const auto idx = make_index(kBudapest, Variant::plus);
  EXPECT_EQ(idx.num_docs(), 3u);
  EXPECT_DOUBLE_EQ(idx.avgdl(), 4.0);
  EXPECT_EQ(idx.df("budapest"), 2u);
  EXPECT_EQ(idx.df("missing"), 0u);
  EXPECT_EQ(idx.postings("missing"), nullptr);
  EXPECT_EQ(idx.tf("2010", 2), 1u);
  EXPECT_EQ(idx.tf("2010", 1), 0u);
  ASSERT_NE(idx.postings("2010"), nullptr);
  EXPECT_EQ(idx.postings("2010")->size(), 2u);
}

TEST(Score, HandComputedPlus) {
  const auto idx = make_index(kBudapest, Variant::plus);
  const std::vector<std::string> q{"budapest", "2010"};
  const double ln2 = std::log(2.0);
  // L = 1, 0.625, 1.375 for lengths 4, 2, 6 with avgdl 4.
  EXPECT_NEAR(idx.score(q, 0), 2 * ln2 * (2.5 / 2.5 + 1.0), 1e-12);
  EXPECT_NEAR(idx.score(q, 1), ln2 * (2.5 / (1 + 1.5 * 0.625) + 1.0), 1e-12);
  EXPECT_NEAR(idx.score(q, 2), ln2 * (2.5 / (1 + 1.5 * 1.375) + 1.0), 1e-12);
  const auto r = rank(idx, q, 3);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].doc, 0u);
  EXPECT_EQ(r[1].doc, 1u);
  EXPECT_EQ(r[2].doc, 2u);
}

TEST(Score, HandComputedOkapiAndL) {
  const std::vector<std::string> q{"budapest"};
  const auto okapi = make_index(kBudapest, Variant::okapi);
  const double idf_o = std::log((3 - 2 + 0.5) / (2 + 0.5) + 1);
  EXPECT_NEAR(okapi.score(q, 0), idf_o * 2.5 / 2.5, 1e-12);
  const auto l = make_index(kBudapest, Variant::l);
  const double c = 1.0 / 0.625;
  EXPECT_NEAR(l.score(q, 1), std::log(2.0) * 2.5 * (c + 1) / (1.5 + c + 1), 1e-12);
  EXPECT_EQ(l.score(q, 2), 0.0);
}

TEST(Score, RepeatedQueryTokensCount) {
  const auto idx = make_index(kBudapest, Variant::plus);
  const std::vector<std::string> once{"budapest"}, twice{"budapest", "budapest"};
  EXPECT_NEAR(idx.score(twice, 0), 2 * idx.score(once, 0), 1e-12);
}

class OracleEquivalence : public ::testing::TestWithParam<Variant> {};

TEST_P(OracleEquivalence, RandomCorpora) {
  std::mt19937_64 rng(1000 + static_cast<int>(GetParam()));
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t vocab = 5 + rng() % 60;
    const auto docs = random_docs(rng, 1 + rng() % 100, vocab);
    const Params p{0.5 + 2 * u(rng), u(rng), 2 * u(rng)};
    const auto idx = make_index(docs, GetParam(), p);
    const auto q = random_query(rng, vocab);
    const std::size_t k = 1 + rng() % docs.size();
    const auto oracle = testing::oracle_rank(docs, q, GetParam(), p);
    const auto got = rank(idx, q, k);
    ASSERT_EQ(got.size(), k);
    EXPECT_EQ(testing::compare_rankings(oracle, got, 1e-9), "") << "trial " << trial;
  }
}

INSTANTIATE_TEST_SUITE_P(Variants, OracleEquivalence, ::testing::Values(Variant::okapi, Variant::plus, Variant::l),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Rank, PrefixProperty) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto docs = random_docs(rng, 60, 15);
    const auto idx = make_index(docs, Variant::plus);
    const auto q = random_query(rng, 15);
    const auto full = rank(idx, q, docs.size());
    for (std::size_t k : {1u, 5u, 20u}) {
      const auto top = rank(idx, q, k);
      for (std::size_t i = 0; i < top.size(); ++i) EXPECT_EQ(top[i].doc, full[i].doc);
    }
  }
}

TEST(Score, PlusLowerBound) {
  std::mt19937_64 rng(9);
  std::size_t checked = 0;
  while (checked < 1000) {
    const auto docs = random_docs(rng, 30, 20);
    const Params p{1.2, 0.75, 0.5 + (rng() % 10) / 10.0};
    const auto idx = make_index(docs, Variant::plus, p);
    const std::uint32_t d = rng() % docs.size();
    for (const auto& t : std::set<std::string>(docs[d].begin(), docs[d].end())) {
      const double idf = testing::oracle_idf_plus(docs.size(), idx.df(t));
      const double w = idx.term_weight(idx.idf(idx.df(t)), idx.tf(t, d), idx.doc_length(d));
      EXPECT_GE(w, p.delta * idf - 1e-12);
      EXPECT_GT(w, 0.0);
      ++checked;
    }
  }
}

TEST(Score, MonotoneInTermFrequency) {
  for (Variant v : {Variant::okapi, Variant::plus, Variant::l}) {
    const auto idx = make_index(kBudapest, v);
    const double idf = idx.idf(1);
    double prev = 0.0;
    for (std::uint32_t tf = 1; tf < 20; ++tf) {
      const double w = idx.term_weight(idf, tf, 4);
      EXPECT_GT(w, prev);
      prev = w;
    }
    // Longer documents never gain weight at equal tf.
    EXPECT_GE(idx.term_weight(idf, 2, 3), idx.term_weight(idf, 2, 9));
  }
}

TEST(Score, PlusWithZeroDeltaEqualsOkapiShapeWithPlusIdf) {
  const Params p{1.5, 0.75, 0.0};
  const auto plus = make_index(kBudapest, Variant::plus, p);
  const double idf = std::log(4.0 / 2.0);
  EXPECT_NEAR(plus.term_weight(idf, 1, 2), idf * 2.5 / (1 + 1.5 * 0.625), 1e-12);
}

TEST(Retrieve, DedupesEventsAndRejectsZeroK) {
  std::vector<DocKey> keys{{Qid(7), "de"}, {Qid(7), "en"}, {Qid(8), "en"}};
  const Docs docs{{"budapest", "2010"}, {"budapest"}, {"rome"}};
  const auto idx = Index::from_tokens(keys, docs, Variant::plus, {}, Tokenizer().fingerprint());
  Query q{{"budapest", "2010"}, 0};
  const auto r = retrieve(idx, q, "en:P:0", 2);
  ASSERT_EQ(r.ranked.size(), 2u);
  EXPECT_EQ(r.ranked[0].qid, Qid(7));
  EXPECT_EQ(r.ranked[1].qid, Qid(8));
  EXPECT_EQ(r.ranked[1].score, 0.0);
  EXPECT_THROW(retrieve(idx, q, "x", 0), ConfigError);
}

TEST(Query, WindowTokens) {
  const Tokenizer t;
  auto m = testing::make_mention("en", "P", 0, "Budapest games", Qid(1));
  m.left_context = "one two three four";
  m.right_context = "five six seven";
  m.meta_title = "Swimming news";
  m.meta_date = "2010-08-04";
  EXPECT_EQ(build_query(m, 0, t).tokens, (std::vector<std::string>{"budapest", "games"}));
  EXPECT_EQ(build_query(m, 2, t).tokens,
            (std::vector<std::string>{"three", "four", "budapest", "games", "five", "six"}));
  EXPECT_EQ(build_query(m, 8, t).tokens.size(), 9u);
  const auto meta = build_query(m, 0, t, true).tokens;
  EXPECT_EQ(meta.front(), "swimming");
  EXPECT_EQ(meta.size(), 2u + 2u + t.tokenize("2010-08-04").size());
}

TEST(Persistence, SaveLoadAndFingerprints) {
  testing::TempDir dir("bm25");
  std::vector<kbx::EventDescription> pool{{Qid(1), "en", "Budapest 2010", "Championships held in Budapest."},
                                          {Qid(2), "en", "Rome 2009", "Championships held in Rome."}};
  const Tokenizer tok;
  const auto idx = Index::build(pool, Variant::plus, {}, tok);
  idx.save(dir.path() / "en.bm25");
  const auto back = Index::load(dir.path() / "en.bm25", tok, Variant::plus, Params{});
  EXPECT_EQ(back.fingerprint(), idx.fingerprint());
  EXPECT_EQ(back.num_terms(), idx.num_terms());
  const auto q = tok.tokenize("budapest championships");
  EXPECT_EQ(back.score_all(q), idx.score_all(q));
  EXPECT_EQ(back.doc_key(1).qid, Qid(2));

  EXPECT_THROW(Index::load(dir.path() / "en.bm25", tok, Variant::okapi), DataError);
  EXPECT_THROW(Index::load(dir.path() / "en.bm25", tok, Variant::plus, Params{1.2, 0.75, 1.0}), DataError);
  EXPECT_THROW(Index::load(dir.path() / "en.bm25", Tokenizer::with_wordpiece({"a"})), DataError);
  EXPECT_THROW(Index::build({}, Variant::plus, {}, tok), ConfigError);
  EXPECT_THROW(Index::load(dir.path() / "missing.bm25", tok), DataError);
}

}  // namespace
}  // namespace xlel
