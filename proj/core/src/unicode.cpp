#include "xlel/unicode.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "xlel/errors.hpp"

namespace xlel::unicode {

namespace {

const icu::Normalizer2& nfkc_instance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status) || n == nullptr) throw_data("ICU: NFKC normalizer unavailable");
  return *n;
}

icu::UnicodeString from_utf8(std::string_view s) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

bool is_ws(UChar32 c) { return u_isUWhiteSpace(c) || c == 0x200B || c == 0xFEFF; }

}  // namespace

std::string nfkc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = nfkc_instance().normalize(from_utf8(utf8), status);
  if (U_FAILURE(status)) return std::string(utf8);
  return to_utf8(out);
}

std::string case_fold(std::string_view utf8) {
  icu::UnicodeString u = from_utf8(utf8);
  u.foldCase(U_FOLD_CASE_DEFAULT);
  return to_utf8(u);
}

std::string normalize_for_match(std::string_view utf8) {
  const std::string folded = case_fold(nfkc(utf8));
  // Case folding can denormalize a few characters; renormalize once more.
  const std::string text = nfkc(folded);
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  int32_t i = 0;
  const auto len = static_cast<int32_t>(text.size());
  while (i < len) {
    const int32_t start = i;
    UChar32 c = 0;
    U8_NEXT(text.data(), i, len, c);
    if (c >= 0 && is_ws(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.append(text, static_cast<std::size_t>(start), static_cast<std::size_t>(i - start));
  }
  return out;
}

std::size_t codepoint_count(std::string_view utf8) {
  std::size_t n = 0;
  int32_t i = 0;
  const auto len = static_cast<int32_t>(utf8.size());
  while (i < len) {
    UChar32 c = 0;
    U8_NEXT(utf8.data(), i, len, c);
    ++n;
  }
  return n;
}

std::string upper_first(std::string_view utf8) {
  if (utf8.empty()) return {};
  int32_t i = 0;
  const auto len = static_cast<int32_t>(utf8.size());
  UChar32 c = 0;
  U8_NEXT(utf8.data(), i, len, c);
  if (c < 0) return std::string(utf8);
  const UChar32 upper = u_toupper(c);
  if (upper == c) return std::string(utf8);
  std::string out;
  char buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool err = false;
  U8_APPEND(buf, n, U8_MAX_LENGTH, upper, err);
  if (err) return std::string(utf8);
  out.append(buf, static_cast<std::size_t>(n));
  out.append(utf8.substr(static_cast<std::size_t>(i)));
  return out;
}

std::string ascii_digits(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  int32_t i = 0;
  const auto len = static_cast<int32_t>(utf8.size());
  while (i < len) {
    const int32_t start = i;
    UChar32 c = 0;
    U8_NEXT(utf8.data(), i, len, c);
    if (c > 0x7f && u_charType(c) == U_DECIMAL_DIGIT_NUMBER) {
      out.push_back(static_cast<char>('0' + u_charDigitValue(c)));
    } else {
      out.append(utf8.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
    }
  }
  return out;
}

bool is_valid_utf8(std::string_view bytes) {
  int32_t i = 0;
  const auto len = static_cast<int32_t>(bytes.size());
  while (i < len) {
    UChar32 c = 0;
    U8_NEXT(bytes.data(), i, len, c);
    if (c < 0) return false;
  }
  return true;
}

}  // namespace xlel::unicode
