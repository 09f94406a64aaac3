#include "xlel/tokenizer.hpp"

#include <unicode/brkiter.h>
#include <unicode/uchar.h>
#include <unicode/uscript.h>
#include <unicode/uvernum.h>

#include <algorithm>

#include "xlel/errors.hpp"
#include "xlel/hash.hpp"
#include "xlel/io.hpp"
#include "xlel/unicode.hpp"

namespace xlel::bm25 {

namespace {

constexpr std::string_view kUnknown = "[UNK]";
constexpr std::size_t kMaxWordChars = 100;

icu::BreakIterator& word_iterator() {
  thread_local std::unique_ptr<icu::BreakIterator> it = [] {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::BreakIterator> bi(icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
    if (U_FAILURE(status) || !bi) throw_data("ICU: word break iterator unavailable");
    return bi;
  }();
  return *it;
}

bool is_mark(UChar32 c) {
  const int8_t t = u_charType(c);
  return t == U_NON_SPACING_MARK || t == U_ENCLOSING_MARK || t == U_COMBINING_SPACING_MARK;
}

void append(std::string& out, const icu::UnicodeString& text, int32_t start, int32_t end) {
  text.tempSubStringBetween(start, end).toUTF8String(out);
}

// Splits one word segment: runs of unsegmented scripts become single
// characters (with trailing marks), everything else stays together.
void emit_segment(const icu::UnicodeString& text, int32_t start, int32_t end, std::vector<std::string>& out) {
  int32_t run = -1;
  int32_t i = start;
  while (i < end) {
    const UChar32 c = text.char32At(i);
    int32_t next = text.moveIndex32(i, 1);
    if (is_unsegmented_script(static_cast<char32_t>(c))) {
      if (run >= 0) {
        out.emplace_back();
        append(out.back(), text, run, i);
        run = -1;
      }
      while (next < end && is_mark(text.char32At(next))) next = text.moveIndex32(next, 1);
      out.emplace_back();
      append(out.back(), text, i, next);
    } else if (run < 0) {
      run = i;
    }
    i = next;
  }
  if (run >= 0) {
    out.emplace_back();
    append(out.back(), text, run, end);
  }
}

}  // namespace

bool is_unsegmented_script(char32_t cp) {
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(static_cast<UChar32>(cp), &status);
  if (U_FAILURE(status)) return false;
  switch (script) {
    case USCRIPT_HAN:
    case USCRIPT_HIRAGANA:
    case USCRIPT_KATAKANA:
    case USCRIPT_THAI:
    case USCRIPT_LAO:
    case USCRIPT_KHMER:
    case USCRIPT_MYANMAR:
      return true;
    default:
      return false;
  }
}

Tokenizer::Tokenizer() : fingerprint_("icu-word/" U_ICU_VERSION "/nfkc-fold") {}

Tokenizer Tokenizer::with_wordpiece(std::vector<std::string> vocab) {
  if (vocab.empty()) throw_config("wordpiece vocabulary is empty");
  Tokenizer t;
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  Sha256 h;
  for (const auto& v : vocab) h.update(v).update("\n");
  t.fingerprint_ += "/wordpiece:" + h.hex();
  t.vocab_.insert(vocab.begin(), vocab.end());
  return t;
}

Tokenizer Tokenizer::with_wordpiece_file(const std::filesystem::path& vocab_path) {
  require_file(vocab_path, "wordpiece vocabulary");
  std::vector<std::string> vocab;
  for (auto& line : read_lines(vocab_path)) {
    const std::string_view t = trim(line);
    if (!t.empty()) vocab.emplace_back(t);
  }
  return with_wordpiece(std::move(vocab));
}

void Tokenizer::wordpiece(const std::string& word, std::vector<std::string>& out) const {
  if (unicode::codepoint_count(word) > kMaxWordChars) {
    out.emplace_back(kUnknown);
    return;
  }
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start < word.size()) {
    std::size_t end = word.size();
    std::string found;
    while (end > start) {
      std::string candidate = word.substr(start, end - start);
      if (start > 0) candidate = "##" + candidate;
      if (vocab_.count(candidate) > 0) {
        found = std::move(candidate);
        break;
      }
      // Step back one UTF-8 code point.
      do {
        --end;
      } while (end > start && (static_cast<unsigned char>(word[end]) & 0xC0) == 0x80);
    }
    if (found.empty()) {
      out.emplace_back(kUnknown);
      return;
    }
    pieces.push_back(std::move(found));
    start = end;
  }
  for (auto& p : pieces) out.push_back(std::move(p));
}

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> words;
  if (text.empty()) return words;
  const std::string folded = unicode::case_fold(unicode::nfkc(text));
  const icu::UnicodeString u = icu::UnicodeString::fromUTF8(folded);
  icu::BreakIterator& bi = word_iterator();
  bi.setText(u);
  int32_t start = bi.first();
  for (int32_t end = bi.next(); end != icu::BreakIterator::DONE; start = end, end = bi.next()) {
    if (bi.getRuleStatus() < UBRK_WORD_NONE_LIMIT) continue;
    emit_segment(u, start, end, words);
  }
  if (vocab_.empty()) return words;
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) wordpiece(w, out);
  return out;
}

}  // namespace xlel::bm25
