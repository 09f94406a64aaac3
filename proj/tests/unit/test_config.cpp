#include <gtest/gtest.h>

#include "oracles.hpp"
#include "xlel/config.hpp"
#include "xlel/errors.hpp"
#include "xlel/io.hpp"

namespace xlel {
namespace {

const std::string kMinimal = R"({"output_dir": "out", "wikidata": "wd.json", "wikipedia": {"en": "en.xml"},
                                 "languages": ["en", "de"]})";

std::string with(const std::string& extra) {
  return kMinimal.substr(0, kMinimal.size() - 1) + ", " + extra + "}";
}

TEST(Config, DefaultsAndPaths) {
  const auto c = parse_config(kMinimal, "/data/run");
  EXPECT_EQ(c.output_dir, std::filesystem::path("/data/run/out"));
  EXPECT_EQ(c.wikipedia.at("en"), std::filesystem::path("/data/run/en.xml"));
  EXPECT_EQ(c.thresholds.min_mentions, 30u);
  EXPECT_EQ(c.thresholds.context_min, 100u);
  EXPECT_EQ(c.thresholds.context_max, 2000u);
  EXPECT_EQ(c.fractions.value[0], 0.8);
  EXPECT_EQ(c.variant, bm25::Variant::plus);
  EXPECT_EQ(c.window, 16u);
  EXPECT_EQ(c.k, 8u);
}

TEST(Config, HashIsRelocatableAndSensitive) {
  const auto a = parse_config(kMinimal, "/data/one");
  const auto b = parse_config(kMinimal, "/elsewhere/two");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), parse_config(with(R"("splits": {"seed": 14})"), "/data/one").hash());
  EXPECT_NE(a.hash(), parse_config(with(R"("bm25": {"window": 32})"), "/data/one").hash());
}

TEST(Config, Rejections) {
  const std::vector<std::string> bad{
      with(R"("thresholds": {"context_min": 2000, "context_max": 2000})"),
      with(R"("thresholds": {"context_min": 3000})"),
      with(R"("thresholds": {"min_mentions": -1})"),
      with(R"("thresholds": {"title_match_max": 0})"),
      with(R"("splits": {"fractions": [0.5, 0.5]})"),
      with(R"("splits": {"fractions": [0.5, 0.3, 0.3]})"),
      with(R"("bm25": {"window": 10})"),
      with(R"("bm25": {"k": 0})"),
      with(R"("bm25": {"variant": "bm42"})"),
      with(R"("bm25": {"b": 1.5})"),
      with(R"("eval": {"ks": [0, 1]})"),
      with(R"("eval": {"tasks": ["monolingual"]})"),
      with(R"("unknown": 1)"),
      with(R"("wikinews": {"xx": "n.xml"})"),
      R"({"output_dir": "out", "wikidata": "wd.json", "wikipedia": {"ja": "ja.xml"}, "languages": ["en"]})",
      R"({"output_dir": "out"})",
      "not json",
  };
  for (const auto& text : bad) EXPECT_THROW(parse_config(text, "/x"), ConfigError) << text;
}

TEST(Config, LanguagesFromFileAndDefault) {
  testing::TempDir dir("cfg");
  write_file_atomic(dir.path() / "langs.txt", "en\nfr\n");
  const auto c = parse_config(R"({"output_dir": "o", "wikidata": "w", "wikipedia": {"fr": "f"}, "languages": "langs.txt"})",
                              dir.path());
  EXPECT_EQ(c.languages, (std::vector<std::string>{"en", "fr"}));
  const auto d = parse_config(R"({"output_dir": "o", "wikidata": "w", "wikipedia": {"fr": "f"}})", dir.path());
  EXPECT_EQ(d.languages.size(), 44u);
  EXPECT_THROW(load_config(dir.path() / "missing.json"), ConfigError);
}

}  // namespace
}  // namespace xlel
