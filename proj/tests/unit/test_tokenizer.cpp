#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "xlel/errors.hpp"
#include "xlel/tokenizer.hpp"

namespace xlel {
namespace {

using bm25::Tokenizer;
using V = std::vector<std::string>;

TEST(Tokenizer, LatinWordsAreFolded) {
  const Tokenizer t;
  EXPECT_EQ(t.tokenize("2010 European Championships"), (V{"2010", "european", "championships"}));
  EXPECT_EQ(t.tokenize("  Budapest,  Hungary! "), (V{"budapest", "hungary"}));
  EXPECT_EQ(t.tokenize(""), V{});
}

TEST(Tokenizer, HanSplitsIntoCharacters) {
  const Tokenizer t;
  EXPECT_EQ(t.tokenize("青島戰役"), (V{"青", "島", "戰", "役"}));
  EXPECT_EQ(t.tokenize("1914年青島"), (V{"1914", "年", "青", "島"}));
}

TEST(Tokenizer, NormalizesCompatibilityForms) {
  const Tokenizer t;
  EXPECT_EQ(t.tokenize("ＦＩＦＡ ２０１０"), (V{"fifa", "2010"}));
  EXPECT_EQ(t.tokenize("STRASSE"), t.tokenize("straße"));
}

// Mixed-script strings against an independent segmentation.
TEST(TokenizerProperty, MatchesReferenceSegmentation) {
  const V pieces{"Budapest", "2010", "Weltmeisterschaft", "Москва", "Αθήνα", "東京", "オリンピック", "서울",
                 "हिन्दी", "القاهرة", "İstanbul", "Zürich", "—", ", ", ". ", " ", "(", ")", "\t"};
  const Tokenizer t;
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      text += pieces[rng() % pieces.size()];
      if (rng() % 2) text += ' ';
    }
    EXPECT_EQ(t.tokenize(text), testing::reference_segmentation(text)) << text;
  }
}

TEST(Tokenizer, WordPieceGreedyLongestMatch) {
  const auto t = Tokenizer::with_wordpiece({"cham", "##pion", "##ships", "##ship", "euro", "##pean", "[UNK]"});
  EXPECT_TRUE(t.uses_wordpiece());
  EXPECT_EQ(t.tokenize("championships European"), (V{"cham", "##pion", "##ships", "euro", "##pean"}));
  EXPECT_EQ(t.tokenize("xyz"), (V{"[UNK]"}));
  EXPECT_NE(t.fingerprint(), Tokenizer().fingerprint());
}

TEST(Tokenizer, UnsegmentedScripts) {
  EXPECT_TRUE(bm25::is_unsegmented_script(U'青'));
  EXPECT_TRUE(bm25::is_unsegmented_script(U'ก'));
  EXPECT_FALSE(bm25::is_unsegmented_script(U'a'));
  EXPECT_FALSE(bm25::is_unsegmented_script(U'한'));
}

}  // namespace
}  // namespace xlel
