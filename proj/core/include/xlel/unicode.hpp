#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace xlel::unicode {

std::string nfkc(std::string_view utf8);
std::string case_fold(std::string_view utf8);

/// NFKC, case-fold, trim, and collapse whitespace runs to one ASCII space.
/// This is the comparison form used for title matching and bucketing.
std::string normalize_for_match(std::string_view utf8);

/// Number of Unicode code points; invalid bytes count as one each.
std::size_t codepoint_count(std::string_view utf8);

/// Uppercases the first code point (MediaWiki title canonicalization).
std::string upper_first(std::string_view utf8);

/// Replaces every Unicode decimal digit with its ASCII counterpart.
std::string ascii_digits(std::string_view utf8);

bool is_valid_utf8(std::string_view bytes);

}  // namespace xlel::unicode
