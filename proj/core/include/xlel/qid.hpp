#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace xlel {

/// Wikidata item identifier (`Q[0-9]+`). Ordered numerically, so Q9 < Q10.
class Qid {
 public:
  constexpr Qid() = default;
  constexpr explicit Qid(std::uint64_t number) : number_(number) {}

  static std::optional<Qid> parse(std::string_view text);
  /// Like parse() but throws DataError on malformed input.
  static Qid parse_or_throw(std::string_view text);

  constexpr std::uint64_t number() const { return number_; }
  constexpr bool valid() const { return number_ != 0; }
  std::string str() const;

  constexpr auto operator<=>(const Qid&) const = default;

 private:
  std::uint64_t number_ = 0;
};

/// An undirected QID pair stored canonically (first < second).
struct QidPair {
  Qid first;
  Qid second;

  static QidPair canonical(Qid a, Qid b) { return a < b ? QidPair{a, b} : QidPair{b, a}; }
  auto operator<=>(const QidPair&) const = default;
};

/// `P[0-9]+`
bool is_property_id(std::string_view text);

}  // namespace xlel

template <>
struct std::hash<xlel::Qid> {
  std::size_t operator()(const xlel::Qid& q) const noexcept {
    return std::hash<std::uint64_t>{}(q.number());
  }
};
