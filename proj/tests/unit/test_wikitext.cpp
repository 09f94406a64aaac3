#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "xlel/errors.hpp"
#include "xlel/io.hpp"
#include "xlel/wikitext.hpp"

namespace xlel {
namespace {

using namespace wikitext;

std::string page_xml(const std::string& title, int ns, const std::string& text, const std::string& redirect = "") {
  std::string out = "  <page>\n    <title>" + title + "</title>\n    <ns>" + std::to_string(ns) + "</ns>\n    <id>1</id>\n";
  if (!redirect.empty()) out += "    <redirect title=\"" + redirect + "\" />\n";
  out += "    <revision><timestamp>2021-01-01T00:00:00Z</timestamp><text xml:space=\"preserve\">" + text +
         "</text></revision>\n  </page>\n";
  return out;
}

const std::string kHeader = "<mediawiki xmlns=\"http://www.mediawiki.org/xml/export-0.10/\">\n";

void expect_spans_reslice(const PageText& page) {
  for (const auto& s : page.links) {
    ASSERT_LE(s.end, page.body.size());
    EXPECT_EQ(page.body.substr(s.start, s.end - s.start), s.surface);
  }
}

TEST(Render, LinksBecomeSpans) {
  RenderOptions opts{"en", WikiKind::wikipedia, nullptr};
  const auto page = render_page(
      "Swimming", "The [[2010 European Aquatics Championships|2010 European Championships]] took place in "
                  "[[budapest]].<ref>cite</ref> {{Infobox|x=1}}[[File:Pool.jpg|thumb|A pool]][[Category:Sport]]",
      opts);
  EXPECT_EQ(page.body, "The 2010 European Championships took place in budapest.");
  ASSERT_EQ(page.links.size(), 2u);
  EXPECT_EQ(page.links[0].surface, "2010 European Championships");
  EXPECT_EQ(page.links[0].target_title, "2010 European Aquatics Championships");
  EXPECT_EQ(page.links[1].target_title, "Budapest");
  expect_spans_reslice(page);
}

TEST(Render, HeadingsAndParagraphs) {
  RenderOptions opts{"en", WikiKind::wikipedia, nullptr};
  const auto page = render_page("T", "First ''bold'' line.\nSame paragraph.\n\n== History ==\nSecond [[A]].\n", opts);
  ASSERT_EQ(page.headings.size(), 1u);
  const auto paras = paragraphs(page);
  ASSERT_EQ(paras.size(), 2u);
  EXPECT_EQ(first_paragraph(page), "First bold line. Same paragraph.");
  ASSERT_EQ(page.links.size(), 1u);
  const auto p = enclosing_paragraph(page, page.links[0].start);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(*p, paras[1]);
  EXPECT_FALSE(enclosing_paragraph(page, page.headings[0].first).has_value());
}

TEST(Render, WikinewsLinks) {
  RenderOptions opts{"en", WikiKind::wikinews, nullptr};
  const auto page = render_page("Story", "{{date|October 6, 2007}}\nFans watched [[w:Budapest|the city]] and "
                                         "[[:Category:Swimming|swimming]] and {{w|Rome}} and [[Local story]].",
                                opts);
  std::vector<std::string> langs;
  for (const auto& s : page.links) langs.push_back(s.wikipedia_language);
  ASSERT_EQ(page.links.size(), 4u);
  EXPECT_EQ(page.links[0].wikipedia_language, "en");
  EXPECT_EQ(page.links[0].target_title, "Budapest");
  EXPECT_EQ(page.links[1].target_title, "Category:Swimming");
  EXPECT_FALSE(page.links[1].to_wikipedia());
  EXPECT_EQ(page.links[2].surface, "Rome");
  EXPECT_TRUE(page.links[2].to_wikipedia());
  EXPECT_NE(page.body.find("October 6, 2007"), std::string::npos);
  expect_spans_reslice(page);
}

// Random markup: every span must re-slice to its surface.
TEST(RenderProperty, OffsetsResliceSurface) {
  const std::vector<std::string> pieces{"plain words ", "[[Target one]] ", "[[Target two|shown text]] ",
                                        "{{cite|a=[[x]]}} ", "<ref>[[hidden]]</ref> ", "'''bold''' ",
                                        "Zürich ", "青島 ", "\n\n", "\n== H ==\n", "[[File:x.png|thumb|cap [[y]]]] ",
                                        "&amp; ", "[[a|b|c]] ", "<!-- [[c]] --> ", "[[Category:K]]"};
  std::mt19937_64 rng(11);
  RenderOptions opts{"en", WikiKind::wikipedia, nullptr};
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const int n = 1 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) text += pieces[rng() % pieces.size()];
    const auto page = render_page("P", text, opts);
    expect_spans_reslice(page);
    for (const auto& s : page.links) EXPECT_NE(s.target_title, "Hidden");
  }
}

TEST(Titles, Normalization) {
  EXPECT_EQ(normalize_title("2010_European_Aquatics_Championships"), "2010 European Aquatics Championships");
  EXPECT_EQ(normalize_title("budapest#History"), "Budapest");
  EXPECT_EQ(normalize_title("Z%C3%BCrich"), "Zürich");
  EXPECT_EQ(normalize_title(":  a   b "), "A b");
}

TEST(Redirects, ChainsCollapse) {
  RedirectMap m;
  m.add("A", "B");
  m.add("B", "C");
  m.add("C", "Article");
  EXPECT_EQ(m.finalize(), 0u);
  EXPECT_EQ(m.resolve(std::string("A")), "Article");
  EXPECT_EQ(m.resolve(std::string("Article")), "Article");
}

TEST(Redirects, CycleMembersMapToThemselves) {
  RedirectMap m;
  m.add("Loop A", "Loop B");
  m.add("Loop B", "Loop A");
  m.add("Into loop", "Loop A");
  EXPECT_EQ(m.finalize(), 2u);
  EXPECT_EQ(m.resolve(std::string("Loop A")), "Loop A");
  EXPECT_EQ(m.resolve(std::string("Loop B")), "Loop B");
  EXPECT_EQ(m.resolve(std::string("Into loop")), "Loop A");
}

TEST(RedirectsProperty, MatchesIteration) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::map<std::string, std::string> raw;
    for (int i = 0; i < 1000; ++i) {
      const auto from = "T" + std::to_string(rng() % 1500);
      const auto to = "T" + std::to_string(rng() % 1500);
      if (from != to) raw[from] = to;
    }
    RedirectMap m;
    for (const auto& [f, t] : raw) m.add(f, t);
    m.finalize();
    const auto expected = testing::iterate_redirects(raw);
    for (const auto& [f, t] : expected) ASSERT_EQ(m.resolve(f), t) << f;
  }
}

TEST(Redirects, TsvRoundTrip) {
  testing::TempDir dir("redir");
  RedirectMap m;
  m.add("X", "Y");
  m.add("Y", "Z");
  m.finalize();
  write_file_atomic(dir.path() / "r.tsv", format_redirects(m));
  EXPECT_EQ(format_redirects(read_redirects(dir.path() / "r.tsv")), format_redirects(m));
}

TEST(Dump, ParsesPagesAndCounts) {
  testing::TempDir dir("dump");
  const auto path = dir.path() / "d.xml";
  write_file_atomic(path, kHeader + page_xml("Alpha", 0, "Alpha is [[Beta]].") + page_xml("Old", 0, "", "Alpha") +
                              page_xml("Talk:Alpha", 1, "x") + "  <page><title>broken</page>\n" +
                              page_xml("Beta", 0, "Beta &lt;b&gt; text.") + "</mediawiki>\n");
  IngestCounters c;
  const auto redirects = build_redirect_map(path, &c);
  EXPECT_EQ(redirects.size(), 1u);
  std::vector<PageText> pages;
  RenderOptions opts{"en", WikiKind::wikipedia, &redirects};
  IngestCounters c2;
  parse_dump(path, opts, nullptr, [&](PageText&& p) { pages.push_back(std::move(p)); }, c2, 2);
  ASSERT_EQ(pages.size(), 2u);
  EXPECT_EQ(pages[0].title, "Alpha");
  EXPECT_EQ(c2.pages_seen, 5u);
  EXPECT_EQ(c2.articles, 2u);
  EXPECT_EQ(c2.redirects, 1u);
  EXPECT_EQ(c2.other_namespace, 1u);
  EXPECT_EQ(c2.malformed, 1u);
}

TEST(Dump, TruncatedStreamThrowsAfterCompletePages) {
  testing::TempDir dir("trunc");
  const auto path = dir.path() / "d.xml";
  write_file_atomic(path, kHeader + page_xml("Alpha", 0, "One.") + "  <page>\n    <title>Cut</title>\n    <ns>0");
  std::vector<std::string> titles;
  IngestCounters c;
  RenderOptions opts{"en", WikiKind::wikipedia, nullptr};
  EXPECT_THROW(parse_dump(path, opts, nullptr, [&](PageText&& p) { titles.push_back(p.title); }, c), DataError);
  EXPECT_EQ(titles, std::vector<std::string>{"Alpha"});
}

TEST(WikinewsMeta, DatesFromPatterns) {
  const auto dates = DateParser::defaults();
  EXPECT_EQ(dates.parse("en", "Saturday, October 6, 2007"), "2007-10-06");
  EXPECT_EQ(dates.parse("es", "viernes 24 de marzo de 2006"), "2006-03-24");
  EXPECT_EQ(dates.parse("de", "Dienstag, 3. März 2009"), "2009-03-03");
  EXPECT_EQ(dates.parse("ja", "2011年3月11日"), "2011-03-11");
  EXPECT_EQ(dates.parse("xx", "2012-05-01"), "2012-05-01");
  EXPECT_FALSE(dates.parse("en", "no date here").has_value());
  EXPECT_FALSE(dates.parse("en", "Smarch 40, 2007").has_value());
  EXPECT_THROW(DateParser::from_json("{\"patterns\": [{\"lang\": \"en\", \"regex\": \"(\"}]}"), ConfigError);
}

TEST(WikinewsMeta, TitleAndDate) {
  RenderOptions opts{"en", WikiKind::wikinews, nullptr};
  auto page = render_page("Hungary hosts championships", "{{date|October 6, 2007}}\nBody text.", opts);
  const auto meta = extract_wikinews_meta(page, DateParser::defaults());
  EXPECT_EQ(meta.title, "Hungary hosts championships");
  EXPECT_EQ(meta.date, "2007-10-06");
}

TEST(PageJson, RoundTrip) {
  RenderOptions opts{"de", WikiKind::wikinews, nullptr};
  auto page = render_page("Seite", "Text [[w:Ort|Ort]].\n\n== K ==\nMehr.", opts);
  page.published = "2007-10-06";
  const auto line = to_json_line(page);
  EXPECT_EQ(to_json_line(page_from_json(line)), line);
}

}  // namespace
}  // namespace xlel
