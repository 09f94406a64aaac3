#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>

#include "oracles.hpp"
#include "xlel/io.hpp"

namespace xlel {
namespace {

namespace fs = std::filesystem;
const fs::path kMini = fs::path(XLEL_FIXTURE_DIR) / "mini";

int xlel(const std::string& args) {
  const std::string cmd = std::string(XLEL_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

TEST(Cli, ExitCodes) {
  testing::TempDir dir("cli");
  EXPECT_EQ(xlel("--version"), 0);
  EXPECT_EQ(xlel("kbx --out " + q(dir.path())), 1);               // missing required option
  EXPECT_EQ(xlel("no-such-command"), 1);
  EXPECT_EQ(xlel("run --config " + q(dir.path() / "none.json")), 1);
  write_file_atomic(dir.path() / "bad.json", R"({"output_dir": "o", "wikidata": "w", "wikipedia": {"en": "e"},
    "languages": ["en"], "thresholds": {"context_min": 5000}})");
  EXPECT_EQ(xlel("run --config " + q(dir.path() / "bad.json")), 1);
  EXPECT_EQ(xlel("split --events " + q(dir.path()) + " --fractions 0.5,0.5 --out " + q(dir.path() / "s")), 1);

  write_file_atomic(dir.path() / "cut.xml", "<mediawiki>\n  <page>\n    <title>Cut</title>");
  EXPECT_EQ(xlel("ingest --dump " + q(dir.path() / "cut.xml") + " --lang en --out " + q(dir.path() / "i")), 2);
  write_file_atomic(dir.path() / "run.jsonl", "not json\n");
  write_file_atomic(dir.path() / "m.jsonl", "");
  EXPECT_EQ(xlel("eval --run " + q(dir.path() / "run.jsonl") + " --mentions " + q(dir.path() / "m.jsonl") + " --out " +
                 q(dir.path() / "e")),
            2);
  EXPECT_EQ(xlel("kbx --wikidata " + q(dir.path() / "absent.json") + " --out " + q(dir.path() / "k")), 2);
}

TEST(Cli, StageCommandsMatchPipeline) {
  testing::TempDir dir("cli-stages");
  const auto out = dir.path();
  ASSERT_EQ(xlel("ingest --dump " + q(kMini / "enwiki.xml") + " --lang en --out " + q(out / "pages" / "en")), 0);
  ASSERT_EQ(xlel("ingest --dump " + q(kMini / "dewiki.xml") + " --lang de --out " + q(out / "pages" / "de")), 0);
  ASSERT_EQ(xlel("ingest --dump " + q(kMini / "frwiki.xml.gz") + " --lang fr --out " + q(out / "pages" / "fr")), 0);
  write_file_atomic(out / "langs.txt", "en\nde\nfr\n");
  ASSERT_EQ(xlel("--jobs 3 kbx --wikidata " + q(kMini / "wikidata.json") + " --langs " + q(out / "langs.txt") +
                 " --pages " + q(out / "pages") + " --out " + q(out / "kbx")),
            0);
  EXPECT_EQ(read_file(out / "kbx" / "events.jsonl"), read_file(kMini / "golden" / "kbx" / "events.jsonl"));
  ASSERT_EQ(xlel("corpus --pages " + q(out / "pages") + " --events " + q(out / "kbx") + " --out " + q(out / "corpus")), 0);
  EXPECT_EQ(read_file(out / "corpus" / "event_filter.tsv"), read_file(kMini / "golden" / "corpus" / "event_filter.tsv"));
  ASSERT_EQ(xlel("--seed 13 split --events " + q(out / "kbx") + " --corpus " + q(out / "corpus") +
                 " --fractions 0.6,0.2,0.2 --out " + q(out / "split")),
            0);
  EXPECT_EQ(read_file(out / "split" / "splits.tsv"), read_file(kMini / "golden" / "split" / "splits.tsv"));
  ASSERT_EQ(xlel("index --events " + q(out / "kbx") + " --corpus " + q(out / "corpus") + " --out " + q(out / "index")), 0);
  ASSERT_EQ(xlel("retrieve --index " + q(out / "index") + " --mentions " + q(out / "split" / "mentions.dev.jsonl") +
                 " --out " + q(out / "run")),
            0);
  EXPECT_EQ(read_file(out / "run" / "run.jsonl"), read_file(kMini / "golden" / "retrieve" / "multilingual" / "dev" / "run.jsonl"));
  ASSERT_EQ(xlel("eval --run " + q(out / "run" / "run.jsonl") + " --mentions " + q(out / "split" / "mentions.dev.jsonl") +
                 " --out " + q(out / "eval")),
            0);
  EXPECT_TRUE(fs::exists(out / "eval" / "report.json"));
}

}  // namespace
}  // namespace xlel
