#include <algorithm>
#include <charconv>
#include <cstdio>
#include <json.hpp>

#include "default_dates.hpp"
#include "xlel/errors.hpp"
#include "xlel/io.hpp"
#include "xlel/unicode.hpp"
#include "xlel/wikitext.hpp"

namespace xlel::wikitext {

namespace {

// Leading decimal digits of a token ("1er" -> 1).
std::optional<int> leading_int(std::string_view token) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr == token.data()) return std::nullopt;
  return value;
}

bool valid_date(int year, int month, int day) {
  static constexpr int kDays[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (year < 1 || year > 9999 || month < 1 || month > 12 || day < 1) return false;
  if (day > kDays[month - 1]) return false;
  if (month == 2 && day == 29) {
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    if (!leap) return false;
  }
  return true;
}

// Lines scanned from the top of a Wikinews article when looking for its date.
constexpr std::size_t kDateLines = 3;

}  // namespace

DateParser DateParser::defaults() { return from_json(detail::kDefaultDatePatterns); }

DateParser DateParser::from_json(std::string_view text) {
  using nlohmann::json;
  DateParser parser;
  try {
    const json j = json::parse(text);
    if (j.contains("months")) {
      for (const auto& [lang, names] : j.at("months").items()) {
        std::vector<std::string> months;
        for (const auto& n : names) months.push_back(unicode::normalize_for_match(n.get<std::string>()));
        if (months.size() != 12) throw_config("date patterns: language '" + lang + "' needs 12 month names");
        parser.months_[lang] = std::move(months);
      }
    }
    for (const auto& p : j.at("patterns")) {
      DatePattern pattern;
      pattern.language = p.at("lang").get<std::string>();
      pattern.source = p.at("regex").get<std::string>();
      pattern.year_group = p.at("year").get<int>();
      pattern.month_group = p.at("month").get<int>();
      pattern.day_group = p.at("day").get<int>();
      try {
        pattern.regex = std::regex(pattern.source, std::regex::ECMAScript);
      } catch (const std::regex_error& ex) {
        throw_config("date patterns: bad regex '" + pattern.source + "': " + ex.what());
      }
      const auto groups = static_cast<int>(pattern.regex.mark_count());
      for (int g : {pattern.year_group, pattern.month_group, pattern.day_group}) {
        if (g < 1 || g > groups) throw_config("date patterns: group index out of range in '" + pattern.source + "'");
      }
      parser.patterns_.push_back(std::move(pattern));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw_config(std::string("date patterns: ") + ex.what());
  }
  return parser;
}

DateParser DateParser::load(const std::filesystem::path& path) {
  require_file(path, "date pattern file");
  return from_json(read_file(path));
}

std::optional<int> DateParser::month_number(std::string_view language, std::string_view token) const {
  if (!token.empty() && std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return leading_int(token);
  }
  const std::string key = unicode::normalize_for_match(token);
  auto lookup = [&](std::string_view lang) -> std::optional<int> {
    const auto it = months_.find(lang);
    if (it == months_.end()) return std::nullopt;
    for (std::size_t m = 0; m < it->second.size(); ++m) {
      if (it->second[m] == key) return static_cast<int>(m + 1);
    }
    return std::nullopt;
  };
  return lookup(language);
}

std::optional<std::string> DateParser::parse(std::string_view language, std::string_view line) const {
  const std::string text = unicode::ascii_digits(line);
  for (const bool wildcard : {false, true}) {
    for (const auto& p : patterns_) {
      if (wildcard ? p.language != "*" : p.language != language) continue;
      for (auto it = std::sregex_iterator(text.begin(), text.end(), p.regex); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        const auto year = leading_int(m.str(p.year_group));
        const auto day = leading_int(m.str(p.day_group));
        const auto month = month_number(language, m.str(p.month_group));
        if (!year || !day || !month || !valid_date(*year, *month, *day)) continue;
        char buf[40];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", *year, *month, *day);
        return std::string(buf);
      }
    }
  }
  return std::nullopt;
}

WikinewsMeta extract_wikinews_meta(const PageText& page, const DateParser& dates) {
  WikinewsMeta meta;
  meta.title = page.title;
  std::size_t seen = 0;
  for (std::string_view line : split(page.body, '\n')) {
    if (trim(line).empty()) continue;
    if (seen++ == kDateLines) break;
    if (auto date = dates.parse(page.language, line)) {
      meta.date = std::move(date);
      break;
    }
  }
  return meta;
}

}  // namespace xlel::wikitext
