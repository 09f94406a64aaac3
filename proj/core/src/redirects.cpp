#include <algorithm>

#include "namespaces.hpp"
#include "xlel/errors.hpp"
#include "xlel/io.hpp"
#include "xlel/unicode.hpp"
#include "xlel/wikitext.hpp"

namespace xlel::wikitext {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      const int hi = hex_value(s[i + 1]);
      const int lo = hex_value(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  // A decoded sequence that is not UTF-8 was not percent-encoded text.
  return unicode::is_valid_utf8(out) ? out : std::string(s);
}

}  // namespace

std::string normalize_title(std::string_view raw) {
  std::string_view s = trim(raw);
  while (!s.empty() && s.front() == ':') s.remove_prefix(1);
  if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
  std::string decoded = percent_decode(s);
  for (std::string_view entity : {"&amp;", "&nbsp;"}) {
    for (std::size_t at = decoded.find(entity); at != std::string::npos; at = decoded.find(entity, at)) {
      decoded.replace(at, entity.size(), entity == "&amp;" ? "&" : " ");
    }
  }
  std::string out;
  out.reserve(decoded.size());
  bool space = false;
  for (char c : decoded) {
    if (c == '_' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      space = !out.empty();
      continue;
    }
    if (space) {
      out.push_back(' ');
      space = false;
    }
    out.push_back(c);
  }
  if (out.empty()) return out;
  // "category:foo bar" -> "Category:Foo bar"
  if (const auto colon = out.find(':'); colon != std::string::npos && colon + 1 < out.size() &&
                                        detail::classify_prefix(std::string_view(out).substr(0, colon)) !=
                                            detail::PrefixKind::none) {
    std::string rest = out.substr(colon + 1);
    const std::size_t lead = rest.find_first_not_of(' ');
    if (lead != std::string::npos && lead > 0) rest.erase(0, lead);
    return unicode::upper_first(out.substr(0, colon)) + ":" + unicode::upper_first(rest);
  }
  return unicode::upper_first(out);
}

void RedirectMap::add(std::string_view from, std::string_view to) {
  std::string f = normalize_title(from);
  std::string t = normalize_title(to);
  if (f.empty() || t.empty()) return;
  map_.insert_or_assign(std::move(f), std::move(t));
}

std::size_t RedirectMap::finalize() {
  enum class State : char { fresh, active, done };
  std::map<std::string, State, std::less<>> state;
  for (const auto& [k, v] : map_) state.emplace(k, State::fresh);
  std::map<std::string, std::string, std::less<>> resolved;
  std::size_t cycle_members = 0;

  for (const auto& [start, ignored] : map_) {
    if (state[start] == State::done) continue;
    std::vector<std::string> path;
    std::string cur = start;
    for (;;) {
      const auto st = state.find(cur);
      if (st == state.end() || st->second == State::done || st->second == State::active) break;
      st->second = State::active;
      path.push_back(cur);
      cur = map_.at(cur);
    }
    const auto st = state.find(cur);
    std::size_t tail = path.size();
    std::string target;
    if (st == state.end()) {
      target = cur;  // final article
    } else if (st->second == State::done) {
      target = resolved.at(cur);
    } else {
      // cur is on the current path: a cycle.
      tail = static_cast<std::size_t>(std::find(path.begin(), path.end(), cur) - path.begin());
      for (std::size_t i = tail; i < path.size(); ++i) {
        resolved[path[i]] = path[i];
        ++cycle_members;
      }
      target = cur;
    }
    for (std::size_t i = 0; i < tail; ++i) resolved[path[i]] = target;
    for (const auto& p : path) state[p] = State::done;
  }
  map_ = std::move(resolved);
  cycle_members_ += cycle_members;
  return cycle_members;
}

const std::string& RedirectMap::resolve(const std::string& title) const {
  const auto it = map_.find(title);
  return it == map_.end() ? title : it->second;
}

std::string RedirectMap::resolve(std::string_view title) const {
  const auto it = map_.find(title);
  return it == map_.end() ? std::string(title) : it->second;
}

bool RedirectMap::contains(std::string_view title) const { return map_.find(title) != map_.end(); }

std::string format_redirects(const RedirectMap& redirects) {
  std::string out;
  for (const auto& [from, to] : redirects.entries()) {
    out += from;
    out += '\t';
    out += to;
    out += '\n';
  }
  return out;
}

RedirectMap read_redirects(const std::filesystem::path& path) {
  RedirectMap map;
  if (!std::filesystem::exists(path)) return map;
  LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw_data("redirects: missing tab at line " + std::to_string(reader.line_number()));
    map.add(std::string_view(line).substr(0, tab), std::string_view(line).substr(tab + 1));
  }
  map.finalize();
  return map;
}

}  // namespace xlel::wikitext
