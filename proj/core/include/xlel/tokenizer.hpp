#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace xlel::bm25 {

/// Multilingual tokenizer: NFKC, case-fold, Unicode word segmentation.
/// Runs of Han, Kana, Thai, Lao, Khmer and Myanmar are split into single
/// characters (combining marks stay attached). An optional WordPiece
/// vocabulary further splits each word into greedy longest-match subwords.
class Tokenizer {
 public:
  Tokenizer();
  static Tokenizer with_wordpiece(std::vector<std::string> vocab);
  static Tokenizer with_wordpiece_file(const std::filesystem::path& vocab_path);

  std::vector<std::string> tokenize(std::string_view text) const;

  /// Identifies the segmentation behaviour; stored inside serialized indexes.
  const std::string& fingerprint() const { return fingerprint_; }
  bool uses_wordpiece() const { return !vocab_.empty(); }

 private:
  void wordpiece(const std::string& word, std::vector<std::string>& out) const;

  std::unordered_set<std::string> vocab_;
  std::string fingerprint_;
};

/// True for code points of scripts written without spaces between words.
bool is_unsegmented_script(char32_t cp);

}  // namespace xlel::bm25
