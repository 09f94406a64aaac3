#include <algorithm>
#include <array>
#include <cctype>
#include <span>
#include <json.hpp>

#include "namespaces.hpp"
#include "xlel/errors.hpp"
#include "xlel/io.hpp"
#include "xlel/parallel.hpp"
#include "xlel/unicode.hpp"
#include "xlel/wikitext.hpp"

namespace xlel::wikitext {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
using detail::PrefixKind;

std::string_view to_string(WikiKind kind) {
  return kind == WikiKind::wikinews ? "wikinews" : "wikipedia";
}

WikiKind parse_kind(std::string_view text) {
  if (text == "wikipedia") return WikiKind::wikipedia;
  if (text == "wikinews") return WikiKind::wikinews;
  throw_config("unknown wiki kind '" + std::string(text) + "' (expected wikipedia|wikinews)");
}

namespace {

// Tags whose content never renders as article prose.
constexpr std::string_view kDropWithContent[] = {
    "ref", "gallery", "math", "chem", "score", "timeline", "imagemap", "syntaxhighlight", "source",
    "graph", "mapframe", "maplink", "templatedata", "references", "categorytree", "hiero", "inputbox",
    "dynamicpagelist", "indicator", "pre", "code", "ce", "table"};

// Tags stripped while their content is kept.
constexpr std::string_view kStripTag[] = {
    "span", "small", "big", "sup", "sub", "b", "i", "u", "s", "del", "ins", "strike", "em", "strong",
    "div", "center", "font", "blockquote", "abbr", "poem", "nowiki", "p", "tt", "var", "q", "cite",
    "bdi", "bdo", "mark", "onlyinclude", "includeonly", "noinclude", "section", "br", "hr", "wbr",
    "li", "ul", "ol", "dl", "dt", "dd", "time", "kbd", "samp", "dfn", "ruby", "rb", "rt", "rp",
    "languages", "translate", "tvar"};

// Wikinews templates that render their first argument (publication dates).
constexpr std::string_view kDateTemplates[] = {"date", "fecha", "data", "datum", "日付", "日期", "תאריך"};

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool in_list(std::string_view name, std::span<const std::string_view> list) {
  return std::find(list.begin(), list.end(), name) != list.end();
}

bool at_line_start(const std::string& out) {
  for (auto it = out.rbegin(); it != out.rend(); ++it) {
    if (*it == '\n') return true;
    if (*it != ' ' && *it != '\t') return false;
  }
  return true;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x110000) {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// ---------------------------------------------------------------------------
// Block-level preprocessing. Links stay as [[...]] markup for the line pass.

std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t open = text.find("<!--", i);
    if (open == std::string_view::npos) {
      out.append(text.substr(i));
      break;
    }
    out.append(text.substr(i, open - i));
    const std::size_t close = text.find("-->", open + 4);
    if (close == std::string_view::npos) break;
    i = close + 3;
  }
  return out;
}

// Parses "<name ...>" at text[i]; returns false if it is not a tag.
struct TagInfo {
  std::string name;
  bool closing = false;
  bool self_closing = false;
  std::size_t end = 0;  // one past '>'
};

bool parse_tag(std::string_view text, std::size_t i, TagInfo& tag) {
  std::size_t j = i + 1;
  tag.closing = j < text.size() && text[j] == '/';
  if (tag.closing) ++j;
  const std::size_t name_start = j;
  while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
  if (j == name_start) return false;
  if (j < text.size() && !(text[j] == '>' || text[j] == '/' || text[j] == ' ' || text[j] == '\t' ||
                           text[j] == '\n')) {
    return false;
  }
  tag.name = ascii_lower(text.substr(name_start, j - name_start));
  const std::size_t gt = text.find('>', j);
  if (gt == std::string_view::npos) return false;
  // Attributes may not span a new tag.
  const std::size_t lt = text.find('<', j);
  if (lt != std::string_view::npos && lt < gt) return false;
  tag.self_closing = gt > 0 && text[gt - 1] == '/';
  tag.end = gt + 1;
  return true;
}

std::string strip_tags(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '<') {
      out.push_back(text[i++]);
      continue;
    }
    TagInfo tag;
    if (!parse_tag(text, i, tag)) {
      out.push_back(text[i++]);
      continue;
    }
    if (in_list(tag.name, kDropWithContent)) {
      if (tag.closing || tag.self_closing) {
        i = tag.end;
        continue;
      }
      // Find the matching close tag, case-insensitively.
      const std::string lowered = ascii_lower(text.substr(tag.end));
      const std::size_t close = lowered.find("</" + tag.name);
      if (close == std::string::npos) {
        i = tag.end;
        continue;
      }
      const std::size_t gt = lowered.find('>', close);
      i = gt == std::string::npos ? text.size() : tag.end + gt + 1;
      continue;
    }
    if (in_list(tag.name, kStripTag)) {
      if (tag.name == "br" || tag.name == "hr") out.push_back(' ');
      i = tag.end;
      continue;
    }
    out.push_back(text[i++]);
  }
  return out;
}

// Finds the end (one past the closing braces) of a balanced "{{...}}"
// starting at i, or npos when unbalanced.
std::size_t match_braces(std::string_view text, std::size_t i) {
  int depth = 0;
  std::size_t j = i;
  while (j < text.size()) {
    if (text.compare(j, 2, "{{") == 0) {
      ++depth;
      j += 2;
    } else if (text.compare(j, 2, "}}") == 0) {
      --depth;
      j += 2;
      if (depth == 0) return j;
    } else {
      ++j;
    }
  }
  return std::string_view::npos;
}

// Splits template/link content at top-level '|'.
std::vector<std::string_view> split_args(std::string_view inner) {
  std::vector<std::string_view> parts;
  int braces = 0;
  int brackets = 0;
  std::size_t start = 0;
  for (std::size_t j = 0; j < inner.size(); ++j) {
    if (inner.compare(j, 2, "{{") == 0) {
      ++braces;
      ++j;
    } else if (inner.compare(j, 2, "}}") == 0) {
      --braces;
      ++j;
    } else if (inner.compare(j, 2, "[[") == 0) {
      ++brackets;
      ++j;
    } else if (inner.compare(j, 2, "]]") == 0) {
      --brackets;
      ++j;
    } else if (inner[j] == '|' && braces == 0 && brackets == 0) {
      parts.push_back(inner.substr(start, j - start));
      start = j + 1;
    }
  }
  parts.push_back(inner.substr(start));
  return parts;
}

// Positional template arguments; "1=foo" style is accepted for 1 and 2.
std::vector<std::string> positional_args(std::span<const std::string_view> parts) {
  std::vector<std::string> args;
  std::array<std::string, 2> named;
  for (std::size_t p = 1; p < parts.size(); ++p) {
    const std::string_view a = trim(parts[p]);
    if (a.starts_with("1=")) {
      named[0] = std::string(trim(a.substr(2)));
    } else if (a.starts_with("2=")) {
      named[1] = std::string(trim(a.substr(2)));
    } else if (a.find('=') == std::string_view::npos) {
      args.emplace_back(a);
    }
  }
  for (std::size_t n = 0; n < named.size(); ++n) {
    if (named[n].empty()) continue;
    if (args.size() <= n) args.resize(n + 1);
    args[n] = named[n];
  }
  return args;
}

std::string expand_template(std::string_view inner, const RenderOptions& opts) {
  if (opts.kind != WikiKind::wikinews) return {};
  const auto parts = split_args(inner);
  std::string name(trim(parts[0]));
  const std::string key = unicode::normalize_for_match(name);
  const auto args = positional_args(parts);
  if ((key == "w" || key == "wikipedia") && !args.empty() && !args[0].empty()) {
    // The template shows its label, or the bare title without the w: prefix.
    const std::string& label = args.size() > 1 && !args[1].empty() ? args[1] : args[0];
    return "[[w:" + args[0] + "|" + label + "]]";
  }
  if (in_list(key, kDateTemplates) && !args.empty()) return args[0];
  return {};
}

// Removes a block construct [i, end) and, when it fills whole lines, its
// trailing newline so no spurious paragraph break is left behind.
std::size_t skip_block_newline(std::string_view text, std::size_t end, const std::string& out) {
  if (!at_line_start(out)) return end;
  std::size_t j = end;
  while (j < text.size() && (text[j] == ' ' || text[j] == '\t')) ++j;
  if (j < text.size() && text[j] == '\n') return j + 1;
  return end;
}

std::string strip_templates(std::string_view text, const RenderOptions& opts) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, 2, "{{") != 0) {
      out.push_back(text[i++]);
      continue;
    }
    const std::size_t end = match_braces(text, i);
    if (end == std::string_view::npos) {
      // Unbalanced: drop the rest of the line.
      const std::size_t nl = text.find('\n', i);
      i = nl == std::string_view::npos ? text.size() : nl;
      continue;
    }
    std::string_view inner = text.substr(i + 2, end - i - 4);
    while (!inner.empty() && inner.front() == '{') inner.remove_prefix(1);  // {{{param}}}
    const std::string replacement = expand_template(inner, opts);
    if (!replacement.empty()) {
      out += replacement;
      i = end;
    } else {
      i = skip_block_newline(text, end, out);
    }
  }
  return out;
}

std::string strip_tables(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  int depth = 0;
  for (std::string_view line : split(text, '\n')) {
    const std::string_view t = trim(line);
    if (t.starts_with("{|")) {
      ++depth;
      continue;
    }
    if (depth > 0) {
      if (t.starts_with("|}")) --depth;
      continue;
    }
    out.append(line);
    out.push_back('\n');
  }
  if (!out.empty() && (text.empty() || text.back() != '\n')) out.pop_back();
  return out;
}

std::string strip_magic_words(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, 2, "__") == 0) {
      std::size_t j = i + 2;
      while (j < text.size() && std::isupper(static_cast<unsigned char>(text[j]))) ++j;
      if (j > i + 2 && text.compare(j, 2, "__") == 0) {
        i = j + 2;
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string decode_entities(std::string_view text) {
  static const std::array<std::pair<std::string_view, std::string_view>, 10> kNamed = {{
      {"nbsp", " "}, {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"},
      {"ndash", "–"}, {"mdash", "—"}, {"thinsp", " "}, {"shy", ""},
  }};
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '&') {
      const std::size_t semi = text.find(';', i + 1);
      if (semi != std::string_view::npos && semi - i <= 10) {
        const std::string_view name = text.substr(i + 1, semi - i - 1);
        if (!name.empty() && name[0] == '#') {
          const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
          const std::string digits(name.substr(hex ? 2 : 1));
          char* endp = nullptr;
          const unsigned long cp = std::strtoul(digits.c_str(), &endp, hex ? 16 : 10);
          if (!digits.empty() && endp != nullptr && *endp == '\0' && cp > 0 && cp < 0x110000) {
            append_utf8(out, static_cast<char32_t>(cp == 0xA0 ? 0x20 : cp));
            i = semi + 1;
            continue;
          }
        }
        const auto it = std::find_if(kNamed.begin(), kNamed.end(), [&](const auto& e) { return e.first == name; });
        if (it != kNamed.end()) {
          out.append(it->second);
          i = semi + 1;
          continue;
        }
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string preprocess(std::string_view wikitext, const RenderOptions& opts) {
  std::string text = strip_comments(wikitext);
  text = strip_tags(text);
  text = strip_templates(text, opts);
  text = strip_tables(text);
  text = strip_magic_words(text);
  return decode_entities(text);
}

// ---------------------------------------------------------------------------
// Inline rendering of one line with span tracking.

struct LinkTarget {
  enum class Action { span, plain, drop } action = Action::plain;
  std::string title;
  std::string wikipedia_language;
};

std::pair<std::string_view, std::string_view> split_prefix(std::string_view t) {
  const std::size_t colon = t.find(':');
  if (colon == std::string_view::npos) return {{}, t};
  return {t.substr(0, colon), t.substr(colon + 1)};
}

LinkTarget classify_link(std::string_view raw_target, const RenderOptions& opts) {
  LinkTarget out;
  std::string_view t = trim(raw_target);
  const bool leading_colon = !t.empty() && t.front() == ':';
  while (!t.empty() && t.front() == ':') t.remove_prefix(1);
  if (t.empty() || t.front() == '#') {
    out.action = LinkTarget::Action::plain;  // same-page anchor
    return out;
  }
  const bool news = opts.kind == WikiKind::wikinews;
  const auto [prefix, rest] = split_prefix(t);
  const PrefixKind kind = prefix.empty() ? PrefixKind::none : detail::classify_prefix(prefix);
  switch (kind) {
    case PrefixKind::none:
      out.action = LinkTarget::Action::span;
      out.title = normalize_title(t);
      if (opts.redirects != nullptr) out.title = opts.redirects->resolve(out.title);
      return out;
    case PrefixKind::file:
      out.action = leading_colon ? LinkTarget::Action::plain : LinkTarget::Action::drop;
      return out;
    case PrefixKind::category:
      if (!leading_colon) {
        out.action = LinkTarget::Action::drop;
      } else if (news) {
        out.action = LinkTarget::Action::span;
        out.title = normalize_title(t);
      }
      return out;
    case PrefixKind::wikipedia: {
      if (!news) return out;  // interwiki on Wikipedia: plain text
      std::string_view target = trim(rest);
      while (!target.empty() && target.front() == ':') target.remove_prefix(1);
      std::string lang = opts.language;
      const auto [p2, rest2] = split_prefix(target);
      if (!p2.empty() && detail::classify_prefix(p2) == PrefixKind::language) {
        lang = std::string(trim(p2));
        target = rest2;
      }
      if (trim(target).empty()) return out;
      out.action = LinkTarget::Action::span;
      out.title = normalize_title(target);
      out.wikipedia_language = lang;
      return out;
    }
    case PrefixKind::language:
      out.action = leading_colon ? LinkTarget::Action::plain : LinkTarget::Action::drop;
      return out;
    case PrefixKind::other:
      return out;
  }
  return out;
}

class LineRenderer {
 public:
  LineRenderer(const RenderOptions& opts, bool allow_spans) : opts_(opts), allow_spans_(allow_spans) {}

  void render(std::string_view line) { render_range(line, /*in_link=*/false); }

  std::string text;
  std::vector<HyperlinkSpan> spans;

 private:
  void emit(char c) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    if (c == ' ' && (text.empty() || text.back() == ' ')) return;
    text.push_back(c);
  }

  void emit_plain(std::string_view s) { render_range(s, /*in_link=*/true); }

  static std::size_t match_brackets(std::string_view s, std::size_t i) {
    int depth = 0;
    std::size_t j = i;
    while (j < s.size()) {
      if (s.compare(j, 2, "[[") == 0) {
        ++depth;
        j += 2;
      } else if (s.compare(j, 2, "]]") == 0) {
        --depth;
        j += 2;
        if (depth == 0) return j;
      } else {
        ++j;
      }
    }
    return std::string_view::npos;
  }

  static bool is_url_start(std::string_view s) {
    for (std::string_view scheme : {"http://", "https://", "ftp://", "//", "mailto:", "news:", "irc://"}) {
      if (s.starts_with(scheme)) return true;
    }
    return false;
  }

  void render_link(std::string_view inner, std::string_view trail, bool in_link) {
    const auto parts = split_args(inner);
    const LinkTarget target = classify_link(parts[0], opts_);
    if (target.action == LinkTarget::Action::drop) return;
    std::string_view display;
    if (parts.size() > 1) {
      // For [[a|b|c]] MediaWiki shows the last part.
      display = parts.back();
      if (trim(display).empty()) display = parts[0];
    } else {
      display = parts[0];
    }
    display = trim(display);
    while (!display.empty() && display.front() == ':' && parts.size() == 1) display.remove_prefix(1);

    const bool make_span = target.action == LinkTarget::Action::span && allow_spans_ && !in_link &&
                           !target.title.empty();
    if (!make_span) {
      emit_plain(display);
      emit_plain(trail);
      return;
    }
    if (!text.empty() && text.back() != ' ' && display.front() == ' ') emit(' ');
    std::size_t start = text.size();
    emit_plain(display);
    emit_plain(trail);
    std::size_t end = text.size();
    while (start < end && text[start] == ' ') ++start;
    while (end > start && text[end - 1] == ' ') --end;
    if (end <= start) return;
    spans.push_back(HyperlinkSpan{start, end, text.substr(start, end - start), target.title,
                                  target.wikipedia_language});
  }

  void render_range(std::string_view s, bool in_link) {
    std::size_t i = 0;
    while (i < s.size()) {
      if (s.compare(i, 2, "[[") == 0) {
        const std::size_t end = match_brackets(s, i);
        if (end != std::string_view::npos) {
          std::size_t trail_end = end;
          while (trail_end < s.size() && std::islower(static_cast<unsigned char>(s[trail_end]))) ++trail_end;
          render_link(s.substr(i + 2, end - i - 4), s.substr(end, trail_end - end), in_link);
          i = trail_end;
          continue;
        }
      }
      if (s[i] == '[' && is_url_start(s.substr(i + 1))) {
        const std::size_t close = s.find(']', i);
        if (close != std::string_view::npos) {
          const std::string_view inside = s.substr(i + 1, close - i - 1);
          const std::size_t space = inside.find(' ');
          if (space != std::string_view::npos) emit_plain(inside.substr(space + 1));
          i = close + 1;
          continue;
        }
      }
      if (s[i] == '\'' && i + 1 < s.size() && s[i + 1] == '\'') {
        while (i < s.size() && s[i] == '\'') ++i;
        continue;
      }
      emit(s[i]);
      ++i;
    }
  }

  const RenderOptions& opts_;
  bool allow_spans_;
};

std::optional<std::string_view> heading_text(std::string_view line) {
  const std::string_view t = trim(line);
  if (t.size() < 3 || t.front() != '=' || t.back() != '=') return std::nullopt;
  std::size_t lead = 0;
  while (lead < t.size() && t[lead] == '=') ++lead;
  std::size_t tail = 0;
  while (tail < t.size() && t[t.size() - 1 - tail] == '=') ++tail;
  const std::size_t level = std::min(lead, tail);
  if (2 * level >= t.size()) return std::nullopt;
  return trim(t.substr(level, t.size() - 2 * level));
}

void trim_line(LineRenderer& r) {
  while (!r.text.empty() && r.text.back() == ' ') r.text.pop_back();
  std::size_t lead = 0;
  while (lead < r.text.size() && r.text[lead] == ' ') ++lead;
  if (lead > 0) {
    r.text.erase(0, lead);
    for (auto& s : r.spans) {
      s.start -= lead;
      s.end -= lead;
    }
  }
}

}  // namespace

PageText render_page(std::string_view title, std::string_view wikitext, const RenderOptions& opts) {
  PageText page;
  page.language = opts.language;
  page.title = normalize_title(title);
  page.kind = opts.kind;

  const std::string text = preprocess(wikitext, opts);
  bool pending_break = false;
  auto begin_block = [&] {
    if (page.body.empty()) return;
    page.body += pending_break ? "\n\n" : "\n";
    pending_break = false;
  };

  for (std::string_view line : split(text, '\n')) {
    if (trim(line).empty()) {
      pending_break = true;
      continue;
    }
    const std::string_view t = trim(line);
    if (t.starts_with("----")) {
      pending_break = true;
      continue;
    }
    if (const auto heading = heading_text(t)) {
      LineRenderer r(opts, /*allow_spans=*/false);
      r.render(*heading);
      trim_line(r);
      if (r.text.empty()) continue;
      pending_break = true;
      begin_block();
      const std::size_t start = page.body.size();
      page.body += r.text;
      page.headings.emplace_back(start, page.body.size());
      pending_break = true;
      continue;
    }
    std::string_view content = t;
    while (!content.empty() && (content.front() == '*' || content.front() == '#' || content.front() == ':' ||
                                content.front() == ';')) {
      content.remove_prefix(1);
    }
    LineRenderer r(opts, /*allow_spans=*/true);
    r.render(trim(content));
    trim_line(r);
    if (r.text.empty()) continue;
    begin_block();
    const std::size_t base = page.body.size();
    page.body += r.text;
    for (auto& s : r.spans) {
      s.start += base;
      s.end += base;
      page.links.push_back(std::move(s));
    }
  }
  return page;
}

std::vector<std::pair<std::size_t, std::size_t>> paragraphs(const PageText& page) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::string& body = page.body;
  std::size_t start = 0;
  std::size_t h = 0;
  while (start < body.size()) {
    std::size_t end = body.find("\n\n", start);
    if (end == std::string::npos) end = body.size();
    while (h < page.headings.size() && page.headings[h].first < start) ++h;
    const bool is_heading = h < page.headings.size() && page.headings[h].first == start;
    if (!is_heading && end > start) out.emplace_back(start, end);
    start = end + 2;
  }
  return out;
}

std::optional<std::pair<std::size_t, std::size_t>> enclosing_paragraph(const PageText& page, std::size_t offset) {
  if (offset >= page.body.size()) return std::nullopt;
  for (const auto& h : page.headings) {
    if (offset >= h.first && offset < h.second) return std::nullopt;
  }
  std::size_t start = page.body.rfind("\n\n", offset);
  start = start == std::string::npos ? 0 : start + 2;
  if (start > offset) return std::nullopt;
  std::size_t end = page.body.find("\n\n", offset);
  if (end == std::string::npos) end = page.body.size();
  return std::make_pair(start, end);
}

std::string first_paragraph(const PageText& page) {
  const auto blocks = paragraphs(page);
  if (blocks.empty()) return {};
  std::string out = page.body.substr(blocks.front().first, blocks.front().second - blocks.front().first);
  std::replace(out.begin(), out.end(), '\n', ' ');
  return out;
}

std::string to_json_line(const PageText& page) {
  ojson j;
  j["language"] = page.language;
  j["title"] = page.title;
  j["kind"] = to_string(page.kind);
  j["ns"] = page.ns;
  j["body"] = page.body;
  ojson links = ojson::array();
  for (const auto& l : page.links) {
    ojson row = ojson::array({l.start, l.end, l.target_title});
    if (l.to_wikipedia()) row.push_back(l.wikipedia_language);
    links.push_back(std::move(row));
  }
  j["links"] = std::move(links);
  ojson headings = ojson::array();
  for (const auto& [s, e] : page.headings) headings.push_back(ojson::array({s, e}));
  j["headings"] = std::move(headings);
  if (page.published) j["published"] = *page.published;
  return j.dump();
}

PageText page_from_json(std::string_view line) {
  try {
    const json j = json::parse(line);
    PageText p;
    p.language = j.at("language").get<std::string>();
    p.title = j.at("title").get<std::string>();
    p.kind = parse_kind(j.at("kind").get<std::string>());
    p.ns = j.value("ns", 0);
    p.body = j.at("body").get<std::string>();
    for (const auto& row : j.at("links")) {
      HyperlinkSpan s;
      s.start = row.at(0).get<std::size_t>();
      s.end = row.at(1).get<std::size_t>();
      s.target_title = row.at(2).get<std::string>();
      if (row.size() > 3) s.wikipedia_language = row.at(3).get<std::string>();
      if (s.start >= s.end || s.end > p.body.size()) throw_data("link offsets out of range in page " + p.title);
      s.surface = p.body.substr(s.start, s.end - s.start);
      p.links.push_back(std::move(s));
    }
    if (j.contains("headings")) {
      for (const auto& row : j["headings"]) {
        p.headings.emplace_back(row.at(0).get<std::size_t>(), row.at(1).get<std::size_t>());
      }
    }
    if (j.contains("published")) p.published = j["published"].get<std::string>();
    return p;
  } catch (const json::exception& ex) {
    throw_data(std::string("bad page record: ") + ex.what());
  }
}

RedirectMap build_redirect_map(const std::filesystem::path& dump, IngestCounters* counters) {
  InputFile input(dump);
  PageReader reader(input);
  RedirectMap map;
  while (auto page = reader.next()) {
    if (page->redirect && !page->redirect->empty()) map.add(page->title, *page->redirect);
  }
  const std::size_t cycles = map.finalize();
  if (counters != nullptr) counters->redirect_cycle_members += cycles;
  return map;
}

void parse_dump(const std::filesystem::path& dump, const RenderOptions& opts, const DateParser* dates,
                const std::function<void(PageText&&)>& sink, IngestCounters& counters, unsigned jobs) {
  InputFile input(dump);
  PageReader reader(input);
  std::vector<RawPage> batch;
  constexpr std::size_t kBatch = 256;

  auto flush = [&] {
    std::vector<PageText> rendered(batch.size());
    parallel_for(batch.size(), jobs, [&](std::size_t i) {
      rendered[i] = render_page(batch[i].title, batch[i].text, opts);
      rendered[i].ns = batch[i].ns;
      if (opts.kind == WikiKind::wikinews && dates != nullptr) {
        rendered[i].published = extract_wikinews_meta(rendered[i], *dates).date;
      }
    });
    for (auto& p : rendered) sink(std::move(p));
    batch.clear();
  };

  try {
    while (auto page = reader.next()) {
      if (page->redirect) {
        ++counters.redirects;
      } else if (page->ns != 0) {
        ++counters.other_namespace;
      } else {
        ++counters.articles;
        batch.push_back(std::move(*page));
        if (batch.size() == kBatch) flush();
      }
    }
  } catch (...) {
    // Emit every complete page before reporting the truncation.
    flush();
    counters.pages_seen = reader.pages_seen();
    counters.malformed = reader.malformed();
    throw;
  }
  flush();
  counters.pages_seen = reader.pages_seen();
  counters.malformed = reader.malformed();
}

}  // namespace xlel::wikitext
