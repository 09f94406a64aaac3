#include <expat.h>

#include <charconv>
#include <cstring>
#include <vector>

#include "xlel/errors.hpp"
#include "xlel/io.hpp"
#include "xlel/wikitext.hpp"

namespace xlel::wikitext {

namespace {

constexpr std::string_view kPageOpen = "<page";
constexpr std::string_view kPageClose = "</page>";
constexpr std::string_view kDocClose = "</mediawiki>";
constexpr std::size_t kReadSize = 1 << 17;

struct PageParseState {
  RawPage page;
  std::vector<std::string> stack;
  std::string text;
  bool has_title = false;
  bool bad = false;
};

void XMLCALL on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
  auto* st = static_cast<PageParseState*>(data);
  const std::string_view tag(name);
  if (tag == "redirect" && !st->stack.empty() && st->stack.back() == "page") {
    std::string target;
    for (int i = 0; attrs[i] != nullptr; i += 2) {
      if (std::strcmp(attrs[i], "title") == 0) target = attrs[i + 1];
    }
    st->page.redirect = std::move(target);
  }
  st->stack.emplace_back(tag);
  st->text.clear();
}

void XMLCALL on_end(void* data, const XML_Char* name) {
  auto* st = static_cast<PageParseState*>(data);
  const std::string_view tag(name);
  const std::string parent = st->stack.size() >= 2 ? st->stack[st->stack.size() - 2] : std::string();
  if (parent == "page") {
    if (tag == "title") {
      st->page.title = st->text;
      st->has_title = true;
    } else if (tag == "ns") {
      const std::string_view v = trim(st->text);
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), st->page.ns);
      if (ec != std::errc{} || p != v.data() + v.size()) st->bad = true;
    } else if (tag == "id") {
      const std::string_view v = trim(st->text);
      std::from_chars(v.data(), v.data() + v.size(), st->page.id);
    }
  } else if (parent == "revision") {
    if (tag == "text") st->page.text = st->text;
    if (tag == "timestamp") st->page.timestamp = st->text;
  }
  if (!st->stack.empty()) st->stack.pop_back();
  st->text.clear();
}

void XMLCALL on_chars(void* data, const XML_Char* s, int len) {
  static_cast<PageParseState*>(data)->text.append(s, static_cast<std::size_t>(len));
}

bool is_page_open(std::string_view buf, std::size_t at) {
  const std::size_t after = at + kPageOpen.size();
  if (after >= buf.size()) return false;
  const char c = buf[after];
  return c == '>' || c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

}  // namespace

std::optional<RawPage> parse_page_element(std::string_view xml) {
  XML_Parser parser = XML_ParserCreate("UTF-8");
  if (parser == nullptr) throw_data("expat: parser allocation failed");
  PageParseState st;
  XML_SetUserData(parser, &st);
  XML_SetElementHandler(parser, on_start, on_end);
  XML_SetCharacterDataHandler(parser, on_chars);
  const auto status = XML_Parse(parser, xml.data(), static_cast<int>(xml.size()), /*isFinal=*/1);
  XML_ParserFree(parser);
  if (status != XML_STATUS_OK || st.bad || !st.has_title || st.page.title.empty()) return std::nullopt;
  return std::move(st.page);
}

PageReader::PageReader(InputFile& input) : input_(input) {}

bool PageReader::fill() {
  if (eof_) return false;
  if (scan_from_ > (1u << 20)) {
    buffer_.erase(0, scan_from_);
    scan_from_ = 0;
  }
  const std::size_t old = buffer_.size();
  buffer_.resize(old + kReadSize);
  const std::size_t n = input_.read(buffer_.data() + old, kReadSize);
  buffer_.resize(old + n);
  if (n == 0) eof_ = true;
  return n > 0;
}

std::optional<std::string> PageReader::next_chunk() {
  // Locate the next page opening tag.
  std::size_t open = std::string::npos;
  for (;;) {
    std::size_t at = buffer_.find(kPageOpen, scan_from_);
    while (at != std::string::npos && at + kPageOpen.size() < buffer_.size() && !is_page_open(buffer_, at)) {
      at = buffer_.find(kPageOpen, at + 1);
    }
    if (at != std::string::npos && at + kPageOpen.size() < buffer_.size()) {
      open = at;
      break;
    }
    if (!fill()) break;
  }
  if (open == std::string::npos) {
    // No further page: the document must be closed properly.
    saw_close_ = buffer_.find(kDocClose, scan_from_) != std::string::npos;
    scan_from_ = buffer_.size();
    if (!saw_close_) {
      throw_data("truncated dump " + input_.path().string() + ": missing </mediawiki> after " +
                 std::to_string(pages_seen_) + " pages");
    }
    return std::nullopt;
  }
  // fill() may drop consumed bytes, so positions are kept relative to scan_from_.
  scan_from_ = open;
  std::size_t close = std::string::npos;
  std::size_t rel = 0;
  for (;;) {
    close = buffer_.find(kPageClose, scan_from_ + rel);
    if (close != std::string::npos) break;
    const std::size_t have = buffer_.size() - scan_from_;
    rel = have >= kPageClose.size() ? have - kPageClose.size() : 0;
    if (!fill()) {
      throw_data("truncated dump " + input_.path().string() + ": unterminated <page> after " +
                 std::to_string(pages_seen_) + " complete pages");
    }
  }
  open = scan_from_;
  const std::size_t end = close + kPageClose.size();
  std::string chunk = buffer_.substr(open, end - open);
  scan_from_ = end;
  return chunk;
}

std::optional<RawPage> PageReader::next() {
  while (auto chunk = next_chunk()) {
    ++pages_seen_;
    if (auto page = parse_page_element(*chunk)) return page;
    ++malformed_;
  }
  return std::nullopt;
}

}  // namespace xlel::wikitext
