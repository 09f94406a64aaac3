#include "xlel/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <numeric>

#include "xlel/errors.hpp"
#include "xlel/hash.hpp"
#include "xlel/io.hpp"
#include "xlel/parallel.hpp"

namespace xlel::bm25 {

namespace {

constexpr char kMagic[8] = {'X', 'L', 'E', 'L', 'B', 'M', '2', '5'};
constexpr std::uint32_t kFormatVersion = 1;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Little-endian binary writer/reader for the index file.
class Writer {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
  }
  void put_string(std::string_view s) {
    put<std::uint64_t>(s.size());
    out.append(s);
  }
  std::string out;
};

class Reader {
 public:
  Reader(std::string_view data, const std::filesystem::path& path) : data_(data), path_(path) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint64_t>();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    const auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw_data(path_.string() + ": truncated BM25 index");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
  const std::filesystem::path& path_;
};

bool doc_key_less(const DocKey& a, const DocKey& b) {
  return std::tie(a.qid, a.language) < std::tie(b.qid, b.language);
}

bool ranked_before(const RankedDoc& a, const RankedDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc < b.doc;
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::okapi:
      return "okapi";
    case Variant::plus:
      return "plus";
    case Variant::l:
      return "l";
  }
  return "unknown";
}

Variant parse_variant(std::string_view text) {
  if (text == "okapi") return Variant::okapi;
  if (text == "plus") return Variant::plus;
  if (text == "l") return Variant::l;
  throw_config("unknown BM25 variant '" + std::string(text) + "' (expected okapi|plus|l)");
}

Index Index::build(std::span<const kbx::EventDescription> pool, Variant variant, Params params,
                   const Tokenizer& tokenizer, unsigned jobs) {
  if (pool.empty()) throw_config("BM25 candidate pool is empty");
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(pool[a].qid, pool[a].language) < std::tie(pool[b].qid, pool[b].language);
  });
  std::vector<DocKey> keys(pool.size());
  std::vector<std::vector<std::string>> docs(pool.size());
  parallel_for(order.size(), jobs, [&](std::size_t i) {
    const auto& d = pool[order[i]];
    keys[i] = DocKey{d.qid, d.language};
    docs[i] = tokenizer.tokenize(d.title + " " + d.description);
  });
  return from_tokens(std::move(keys), docs, variant, params, tokenizer.fingerprint());
}

Index Index::from_tokens(std::vector<DocKey> keys, const std::vector<std::vector<std::string>>& docs,
                         Variant variant, Params params, std::string tokenizer_fingerprint) {
  if (keys.size() != docs.size()) throw_config("BM25: document keys and token lists differ in length");
  if (keys.empty()) throw_config("BM25 candidate pool is empty");
  if (!std::is_sorted(keys.begin(), keys.end(), doc_key_less)) {
    throw_config("BM25: documents must be ordered by (qid, language)");
  }
  if (params.k1 < 0 || params.b < 0 || params.b > 1 || params.delta < 0) {
    throw_config("BM25: parameters out of range (k1 >= 0, 0 <= b <= 1, delta >= 0)");
  }
  Index index;
  index.variant_ = variant;
  index.params_ = params;
  index.tokenizer_fingerprint_ = std::move(tokenizer_fingerprint);
  index.doc_keys_ = std::move(keys);
  index.doc_lengths_.reserve(docs.size());

  std::map<std::string, std::vector<Posting>, std::less<>> postings;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    index.doc_lengths_.push_back(static_cast<std::uint32_t>(docs[d].size()));
    std::map<std::string_view, std::uint32_t> counts;
    for (const auto& t : docs[d]) ++counts[t];
    for (const auto& [term, tf] : counts) {
      auto it = postings.find(term);
      if (it == postings.end()) it = postings.emplace(std::string(term), std::vector<Posting>{}).first;
      it->second.push_back(Posting{static_cast<std::uint32_t>(d), tf});
    }
  }
  index.terms_.reserve(postings.size());
  index.postings_.reserve(postings.size());
  for (auto& [term, list] : postings) {
    index.terms_.push_back(term);
    index.postings_.push_back(std::move(list));
  }
  index.finalize();
  return index;
}

void Index::finalize() {
  std::uint64_t total = 0;
  for (auto len : doc_lengths_) total += len;
  avgdl_ = doc_lengths_.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(doc_lengths_.size());
  term_ids_.clear();
  term_ids_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) term_ids_.emplace(terms_[i], static_cast<std::uint32_t>(i));
}

const std::vector<Posting>* Index::postings(std::string_view term) const {
  const auto it = term_ids_.find(std::string(term));
  return it == term_ids_.end() ? nullptr : &postings_[it->second];
}

std::size_t Index::df(std::string_view term) const {
  const auto* p = postings(term);
  return p == nullptr ? 0 : p->size();
}

std::uint32_t Index::tf(std::string_view term, std::uint32_t doc) const {
  const auto* p = postings(term);
  if (p == nullptr) return 0;
  const auto it = std::lower_bound(p->begin(), p->end(), doc, [](const Posting& a, std::uint32_t d) { return a.doc < d; });
  return it != p->end() && it->doc == doc ? it->tf : 0;
}

double Index::idf(std::size_t df) const {
  if (df == 0) return 0.0;
  const auto n = static_cast<double>(num_docs());
  const auto f = static_cast<double>(df);
  if (variant_ == Variant::okapi) return std::log((n - f + 0.5) / (f + 0.5) + 1.0);
  return std::log((n + 1.0) / f);
}

double Index::term_weight(double idf, std::uint32_t tf, std::uint32_t doc_length) const {
  if (tf == 0) return 0.0;
  const double k1 = params_.k1;
  const double norm = avgdl_ > 0.0 ? 1.0 - params_.b + params_.b * static_cast<double>(doc_length) / avgdl_ : 1.0;
  const auto f = static_cast<double>(tf);
  switch (variant_) {
    case Variant::okapi:
      return idf * f * (k1 + 1.0) / (f + k1 * norm);
    case Variant::plus:
      return idf * (f * (k1 + 1.0) / (f + k1 * norm) + params_.delta);
    case Variant::l: {
      const double c = f / norm;
      return idf * (k1 + 1.0) * (c + params_.delta) / (k1 + c + params_.delta);
    }
  }
  return 0.0;
}

double Index::score(std::span<const std::string> query, std::uint32_t doc) const {
  double total = 0.0;
  for (const auto& t : query) {
    const auto* p = postings(t);
    if (p == nullptr) continue;
    total += term_weight(idf(p->size()), tf(t, doc), doc_lengths_[doc]);
  }
  return total;
}

std::vector<double> Index::score_all(std::span<const std::string> query) const {
  std::vector<double> scores(num_docs(), 0.0);
  for (const auto& t : query) {
    const auto* p = postings(t);
    if (p == nullptr) continue;
    const double w = idf(p->size());
    for (const auto& posting : *p) scores[posting.doc] += term_weight(w, posting.tf, doc_lengths_[posting.doc]);
  }
  return scores;
}

std::string Index::fingerprint() const {
  std::string text = "xlel-bm25/" + std::to_string(kFormatVersion);
  text += "|" + std::string(to_string(variant_));
  text += "|k1=" + format_double(params_.k1);
  text += "|b=" + format_double(params_.b);
  text += "|delta=" + format_double(params_.delta);
  text += "|tokenizer=" + tokenizer_fingerprint_;
  return sha256_hex(text);
}

void Index::save(const std::filesystem::path& path) const {
  Writer w;
  w.out.append(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(kFormatVersion);
  w.put_string(fingerprint());
  w.put_string(tokenizer_fingerprint_);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(variant_));
  w.put<double>(params_.k1);
  w.put<double>(params_.b);
  w.put<double>(params_.delta);
  w.put<std::uint64_t>(doc_keys_.size());
  for (std::size_t d = 0; d < doc_keys_.size(); ++d) {
    w.put<std::uint64_t>(doc_keys_[d].qid.number());
    w.put_string(doc_keys_[d].language);
    w.put<std::uint32_t>(doc_lengths_[d]);
  }
  w.put<std::uint64_t>(terms_.size());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    w.put_string(terms_[t]);
    w.put<std::uint64_t>(postings_[t].size());
    for (const auto& p : postings_[t]) {
      w.put<std::uint32_t>(p.doc);
      w.put<std::uint32_t>(p.tf);
    }
  }
  write_file_atomic(path, w.out);
}

Index Index::load(const std::filesystem::path& path, const Tokenizer& tokenizer, std::optional<Variant> variant,
                  std::optional<Params> params) {
  require_file(path, "BM25 index");
  const std::string data = read_file(path);
  Reader r(data, path);
  if (r.raw(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) {
    throw_data(path.string() + ": not a BM25 index file");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kFormatVersion) {
    throw_data(path.string() + ": unsupported index format version " + std::to_string(version));
  }
  Index index;
  const std::string stored = r.get_string();
  index.tokenizer_fingerprint_ = r.get_string();
  const auto v = r.get<std::uint8_t>();
  if (v > static_cast<std::uint8_t>(Variant::l)) throw_data(path.string() + ": bad variant tag");
  index.variant_ = static_cast<Variant>(v);
  index.params_.k1 = r.get<double>();
  index.params_.b = r.get<double>();
  index.params_.delta = r.get<double>();
  if (stored != index.fingerprint()) throw_data(path.string() + ": index fingerprint does not match its header");
  if (index.tokenizer_fingerprint_ != tokenizer.fingerprint()) {
    throw_data(path.string() + ": index was built with tokenizer '" + index.tokenizer_fingerprint_ +
               "', current tokenizer is '" + tokenizer.fingerprint() + "'");
  }
  if (variant && *variant != index.variant_) {
    throw_data(path.string() + ": index variant is " + std::string(to_string(index.variant_)) + ", requested " +
               std::string(to_string(*variant)));
  }
  if (params && !(*params == index.params_)) throw_data(path.string() + ": index BM25 parameters differ from requested");

  const auto n_docs = r.get<std::uint64_t>();
  for (std::uint64_t d = 0; d < n_docs; ++d) {
    DocKey key;
    key.qid = Qid(r.get<std::uint64_t>());
    key.language = r.get_string();
    index.doc_keys_.push_back(std::move(key));
    index.doc_lengths_.push_back(r.get<std::uint32_t>());
  }
  const auto n_terms = r.get<std::uint64_t>();
  for (std::uint64_t t = 0; t < n_terms; ++t) {
    index.terms_.push_back(r.get_string());
    const auto n = r.get<std::uint64_t>();
    std::vector<Posting> list;
    list.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      Posting p;
      p.doc = r.get<std::uint32_t>();
      p.tf = r.get<std::uint32_t>();
      if (p.doc >= n_docs) throw_data(path.string() + ": posting refers to unknown document");
      list.push_back(p);
    }
    index.postings_.push_back(std::move(list));
  }
  if (!r.done()) throw_data(path.string() + ": trailing bytes after BM25 index");
  index.finalize();
  return index;
}

Query build_query(const corpus::Mention& mention, std::size_t window, const Tokenizer& tokenizer, bool with_meta) {
  Query q;
  q.window = window;
  if (with_meta) {
    if (mention.meta_title) {
      for (auto& t : tokenizer.tokenize(*mention.meta_title)) q.tokens.push_back(std::move(t));
    }
    if (mention.meta_date) {
      for (auto& t : tokenizer.tokenize(*mention.meta_date)) q.tokens.push_back(std::move(t));
    }
  }
  if (window > 0) {
    auto left = tokenizer.tokenize(mention.left_context);
    const std::size_t from = left.size() > window ? left.size() - window : 0;
    for (std::size_t i = from; i < left.size(); ++i) q.tokens.push_back(std::move(left[i]));
  }
  for (auto& t : tokenizer.tokenize(mention.surface)) q.tokens.push_back(std::move(t));
  if (window > 0) {
    auto right = tokenizer.tokenize(mention.right_context);
    const std::size_t to = std::min(window, right.size());
    for (std::size_t i = 0; i < to; ++i) q.tokens.push_back(std::move(right[i]));
  }
  return q;
}

std::vector<RankedDoc> rank(const Index& index, std::span<const std::string> query, std::size_t k) {
  const auto scores = index.score_all(query);
  std::vector<RankedDoc> docs(scores.size());
  for (std::size_t d = 0; d < scores.size(); ++d) docs[d] = RankedDoc{static_cast<std::uint32_t>(d), scores[d]};
  const std::size_t n = std::min(k, docs.size());
  std::partial_sort(docs.begin(), docs.begin() + static_cast<std::ptrdiff_t>(n), docs.end(), ranked_before);
  docs.resize(n);
  return docs;
}

RetrievalResult retrieve(const Index& index, const Query& query, std::string mention_id, std::size_t k) {
  if (k < 1) throw_config("retrieval depth k must be at least 1");
  RetrievalResult result;
  result.mention_id = std::move(mention_id);
  result.k = k;
  // Rank everything so per-event dedup never leaves the list short.
  const auto ranked = rank(index, query.tokens, index.num_docs());
  std::set<Qid> seen;
  for (const auto& r : ranked) {
    const Qid q = index.doc_key(r.doc).qid;
    if (!seen.insert(q).second) continue;
    result.ranked.push_back(ScoredCandidate{q, r.score});
    if (result.ranked.size() == k) break;
  }
  return result;
}

}  // namespace xlel::bm25
