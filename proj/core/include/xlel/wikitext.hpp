#pragma once

// MediaWiki XML dump reading, wikitext-to-plain-text rendering with exact
// hyperlink offsets, redirect resolution and Wikinews meta extraction.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xlel {
class InputFile;
}

namespace xlel::wikitext {

enum class WikiKind { wikipedia, wikinews };
std::string_view to_string(WikiKind kind);
WikiKind parse_kind(std::string_view text);

// ---------------------------------------------------------------------------
// XML dump

struct RawPage {
  std::string title;
  int ns = 0;
  std::int64_t id = 0;
  std::optional<std::string> redirect;
  std::string timestamp;
  std::string text;
};

/// Splits a MediaWiki export stream at <page> boundaries and parses each page
/// on its own, so one malformed page is skipped without losing the rest.
/// A stream that ends inside a page (or without </mediawiki>) throws
/// DataError once every complete page before it has been returned.
class PageReader {
 public:
  explicit PageReader(InputFile& input);

  std::optional<RawPage> next();
  std::size_t malformed() const { return malformed_; }
  std::size_t pages_seen() const { return pages_seen_; }

 private:
  bool fill();
  std::optional<std::string> next_chunk();

  InputFile& input_;
  std::string buffer_;
  std::size_t scan_from_ = 0;
  bool eof_ = false;
  bool saw_close_ = false;
  std::size_t malformed_ = 0;
  std::size_t pages_seen_ = 0;
};

/// Parses one `<page>...</page>` element; nullopt if it is malformed.
std::optional<RawPage> parse_page_element(std::string_view xml);

// ---------------------------------------------------------------------------
// Titles and redirects

/// Underscores to spaces, percent-decoding, whitespace collapse, leading `:`
/// and `#fragment` removed, first character uppercased.
std::string normalize_title(std::string_view raw);

class RedirectMap {
 public:
  void add(std::string_view from, std::string_view to);
  /// Collapses chains to their final target. Members of a cycle map to
  /// themselves; the number of such members is returned.
  std::size_t finalize();

  /// Final target, or the title itself when it is not a redirect.
  const std::string& resolve(const std::string& title) const;
  std::string resolve(std::string_view title) const;

  bool contains(std::string_view title) const;
  std::size_t size() const { return map_.size(); }
  std::size_t cycle_members() const { return cycle_members_; }
  const std::map<std::string, std::string, std::less<>>& entries() const { return map_; }

 private:
  std::map<std::string, std::string, std::less<>> map_;
  std::size_t cycle_members_ = 0;
};

std::string format_redirects(const RedirectMap& redirects);
RedirectMap read_redirects(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Rendered pages

struct HyperlinkSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
  std::string target_title;
  /// Empty for links inside the same wiki; for Wikinews links into Wikipedia
  /// this is the Wikipedia language code.
  std::string wikipedia_language;

  bool to_wikipedia() const { return !wikipedia_language.empty(); }
};

struct PageText {
  std::string language;
  std::string title;
  WikiKind kind = WikiKind::wikipedia;
  int ns = 0;
  std::string body;
  std::vector<HyperlinkSpan> links;
  /// Byte ranges of section-heading lines; each heading is its own block.
  std::vector<std::pair<std::size_t, std::size_t>> headings;
  std::optional<std::string> published;  // ISO-8601, Wikinews only
};

struct RenderOptions {
  std::string language;
  WikiKind kind = WikiKind::wikipedia;
  const RedirectMap* redirects = nullptr;
};

/// Strips templates, tables, references, comments, media and category links;
/// keeps headings as standalone lines and turns wikilinks into spans.
/// In Wikinews mode `{{w|...}}` templates and `w:` links become Wikipedia
/// spans, `[[:Category:...]]` links become spans, and date templates render
/// their argument.
PageText render_page(std::string_view title, std::string_view wikitext, const RenderOptions& opts);

/// Paragraph blocks (text between blank lines, headings excluded) as byte ranges.
std::vector<std::pair<std::size_t, std::size_t>> paragraphs(const PageText& page);

/// The block containing `offset`, or nullopt when it lies in a heading/blank.
std::optional<std::pair<std::size_t, std::size_t>> enclosing_paragraph(const PageText& page,
                                                                        std::size_t offset);

/// First non-empty paragraph with line breaks joined by single spaces.
std::string first_paragraph(const PageText& page);

std::string to_json_line(const PageText& page);
PageText page_from_json(std::string_view line);

// ---------------------------------------------------------------------------
// Wikinews meta

struct DatePattern {
  std::string language;
  std::regex regex;
  std::string source;
  int year_group = 0;
  int month_group = 0;
  int day_group = 0;
};

/// Per-language publication date patterns; month groups may be numeric or a
/// month name looked up in the language's month table.
class DateParser {
 public:
  static DateParser defaults();
  /// JSON: {"months": {lang: [12 names]}, "patterns": [{"lang", "regex",
  /// "year", "month", "day"}]}. Throws ConfigError.
  static DateParser from_json(std::string_view json);
  static DateParser load(const std::filesystem::path& path);

  /// ISO date of the first pattern match in `line`, trying the language's
  /// patterns first and the language-independent ones ("*") after.
  std::optional<std::string> parse(std::string_view language, std::string_view line) const;

 private:
  std::optional<int> month_number(std::string_view language, std::string_view token) const;

  std::vector<DatePattern> patterns_;
  std::map<std::string, std::vector<std::string>, std::less<>> months_;
};

struct WikinewsMeta {
  std::string title;
  std::optional<std::string> date;
};

WikinewsMeta extract_wikinews_meta(const PageText& page, const DateParser& dates);

// ---------------------------------------------------------------------------
// Dump ingestion

struct IngestCounters {
  std::size_t pages_seen = 0;
  std::size_t articles = 0;
  std::size_t redirects = 0;
  std::size_t other_namespace = 0;
  std::size_t malformed = 0;
  std::size_t redirect_cycle_members = 0;
};

/// First pass: redirect pages only.
RedirectMap build_redirect_map(const std::filesystem::path& dump, IngestCounters* counters = nullptr);

/// Second pass: renders every namespace-0 article and hands it to `sink` in
/// dump order. Rendering runs on `jobs` threads in batches.
void parse_dump(const std::filesystem::path& dump, const RenderOptions& opts,
                const DateParser* dates, const std::function<void(PageText&&)>& sink,
                IngestCounters& counters, unsigned jobs = 1);

}  // namespace xlel::wikitext
