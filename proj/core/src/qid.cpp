#include "xlel/qid.hpp"

#include <charconv>

#include "xlel/errors.hpp"

namespace xlel {

namespace {

std::optional<std::uint64_t> parse_prefixed_number(std::string_view text, char prefix) {
  if (text.size() < 2 || text.front() != prefix) return std::nullopt;
  const char* first = text.data() + 1;
  const char* last = text.data() + text.size();
  if (*first == '0') return std::nullopt;
  std::uint64_t n = 0;
  const auto [ptr, ec] = std::from_chars(first, last, n);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return n;
}

}  // namespace

std::optional<Qid> Qid::parse(std::string_view text) {
  if (auto n = parse_prefixed_number(text, 'Q')) return Qid(*n);
  return std::nullopt;
}

Qid Qid::parse_or_throw(std::string_view text) {
  if (auto q = parse(text)) return *q;
  throw_data("invalid QID: '" + std::string(text) + "'");
}

std::string Qid::str() const { return "Q" + std::to_string(number_); }

bool is_property_id(std::string_view text) { return parse_prefixed_number(text, 'P').has_value(); }

}  // namespace xlel
