#pragma once

// Inverted index over event descriptions and BM25 / BM25+ / BM25L ranking.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xlel/corpus.hpp"
#include "xlel/kbx.hpp"
#include "xlel/qid.hpp"
#include "xlel/run_file.hpp"
#include "xlel/tokenizer.hpp"

namespace xlel::bm25 {

enum class Variant { okapi, plus, l };
std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

struct Params {
  double k1 = 1.5;
  double b = 0.75;
  double delta = 1.0;

  bool operator==(const Params&) const = default;
};

struct DocKey {
  Qid qid;
  std::string language;
};

struct Posting {
  std::uint32_t doc = 0;
  std::uint32_t tf = 0;
};

/// Term-frequency postings, document lengths and the scoring parameters.
/// Immutable once built; safe to share between reader threads.
///
/// With N documents, df(t) documents containing t, tf its frequency in a
/// document of length dl and L = 1 - b + b * dl / avgdl:
///   okapi  idf = ln((N - df + 0.5) / (df + 0.5) + 1),  w = idf * tf(k1+1) / (tf + k1 L)
///   plus   idf = ln((N + 1) / df),                    w = idf * (tf(k1+1) / (tf + k1 L) + delta)
///   l      idf = ln((N + 1) / df),  c = tf / L,       w = idf * (k1+1)(c+delta) / (k1+c+delta)
/// A query scores as the sum of w over its tokens (repeats count); terms
/// absent from a document contribute nothing.
class Index {
 public:
  /// Documents are title + " " + description. Doc ids follow (qid, language)
  /// order. Throws ConfigError on an empty pool.
  static Index build(std::span<const kbx::EventDescription> pool, Variant variant, Params params,
                     const Tokenizer& tokenizer, unsigned jobs = 1);
  static Index from_tokens(std::vector<DocKey> keys, const std::vector<std::vector<std::string>>& docs,
                           Variant variant, Params params, std::string tokenizer_fingerprint);

  Variant variant() const { return variant_; }
  const Params& params() const { return params_; }
  std::size_t num_docs() const { return doc_lengths_.size(); }
  double avgdl() const { return avgdl_; }
  std::uint32_t doc_length(std::uint32_t doc) const { return doc_lengths_[doc]; }
  const DocKey& doc_key(std::uint32_t doc) const { return doc_keys_[doc]; }
  std::size_t num_terms() const { return terms_.size(); }

  /// nullptr when the term is not indexed.
  const std::vector<Posting>* postings(std::string_view term) const;
  std::size_t df(std::string_view term) const;
  std::uint32_t tf(std::string_view term, std::uint32_t doc) const;

  double idf(std::size_t df) const;
  /// Contribution of one query token to one document; 0 when tf == 0.
  double term_weight(double idf, std::uint32_t tf, std::uint32_t doc_length) const;

  double score(std::span<const std::string> query, std::uint32_t doc) const;
  /// Term-at-a-time scores for every document.
  std::vector<double> score_all(std::span<const std::string> query) const;

  const std::string& tokenizer_fingerprint() const { return tokenizer_fingerprint_; }
  /// Hash of format version, variant, parameters and tokenizer fingerprint.
  std::string fingerprint() const;

  void save(const std::filesystem::path& path) const;
  /// Refuses (DataError) when the stored fingerprint does not match the
  /// file's own header or the supplied tokenizer / variant / parameters.
  static Index load(const std::filesystem::path& path, const Tokenizer& tokenizer,
                    std::optional<Variant> variant = std::nullopt,
                    std::optional<Params> params = std::nullopt);

 private:
  void finalize();

  Variant variant_ = Variant::plus;
  Params params_;
  std::string tokenizer_fingerprint_;
  std::vector<DocKey> doc_keys_;
  std::vector<std::uint32_t> doc_lengths_;
  double avgdl_ = 0.0;
  std::vector<std::string> terms_;  // sorted
  std::vector<std::vector<Posting>> postings_;
  std::unordered_map<std::string, std::uint32_t> term_ids_;
};

struct Query {
  std::vector<std::string> tokens;
  std::size_t window = 0;
};

inline constexpr std::size_t kWindowSizes[] = {0, 8, 16, 32, 64, 128};

/// Surface tokens plus up to `window` context tokens on each side. With
/// `with_meta` the Wikinews title and date tokens are prepended.
Query build_query(const corpus::Mention& mention, std::size_t window, const Tokenizer& tokenizer,
                  bool with_meta = false);

struct RankedDoc {
  std::uint32_t doc = 0;
  double score = 0.0;
};

/// Top-k documents, score descending, ties by ascending doc id.
std::vector<RankedDoc> rank(const Index& index, std::span<const std::string> query, std::size_t k);

/// Ranked events for one mention; keeps the best document per event.
/// Throws ConfigError when k < 1.
RetrievalResult retrieve(const Index& index, const Query& query, std::string mention_id, std::size_t k);

}  // namespace xlel::bm25
