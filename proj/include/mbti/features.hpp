#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mbti::features {

struct TokenizerConfig {
  bool lowercase = true;
  bool strip_urls = true;
  bool strip_html_entities = true;
  bool strip_emoji = false;
  int ngram_lo = 1;
  int ngram_hi = 1;

  /// Throws unless 1 <= ngram_lo <= ngram_hi <= 3.
  void validate() const;
};

/// Letter/digit runs. Emoji code points become one-character tokens unless
/// stripped; URLs and HTML entities are dropped when flagged.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg = {});

/// Word list, one entry per line.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::unordered_set<std::string> words) : words_(std::move(words)) {}

  static Lexicon load(const std::filesystem::path& path);
  static Lexicon parse(std::string_view text);
  /// Built-in English stop-word list (data/stopwords/en.txt).
  static Lexicon english();

  bool contains(const std::string& w) const { return words_.contains(w); }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

 private:
  std::unordered_set<std::string> words_;
};

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const Lexicon& lexicon);

/// Porter stemmer run to a fixed point (see porter.hpp for the single pass).
std::string stem(std::string_view token);

/// Space-joined n-grams for every n in [lo, hi], unigrams first.
std::vector<std::string> make_ngrams(const std::vector<std::string>& tokens, int lo, int hi);

/// tokenize -> stop words -> stem -> n-grams. The order is fixed and recorded
/// in every manifest.
struct TextPipeline {
  TokenizerConfig tokenizer;
  bool remove_stopwords = true;
  bool stem = true;
  Lexicon stopwords = Lexicon::english();

  std::vector<std::string> terms(std::string_view text) const;

  nlohmann::json to_json() const;
  /// Stop words are always the built-in English list when restored.
  static TextPipeline from_json(const nlohmann::json& j);

  static constexpr std::string_view kOrder = "tokenize>stopwords>stem>ngrams";
};

/// Document-frequency counts; partial counters from shards merge associatively.
class DfCounter {
 public:
  void add(const std::vector<std::string>& doc_terms);
  void merge(const DfCounter& other);

  std::size_t documents() const { return documents_; }
  const std::map<std::string, std::size_t>& counts() const { return df_; }

 private:
  std::size_t documents_ = 0;
  std::map<std::string, std::size_t> df_;
};

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Keeps terms with min_df <= df <= max_df * documents; indices follow
  /// lexicographic term order. Throws on an empty corpus.
  static Vocabulary fit(const DfCounter& counts, std::size_t min_df, double max_df = 1.0);
  static Vocabulary fit(const std::vector<std::vector<std::string>>& docs, std::size_t min_df,
                        double max_df = 1.0);

  std::size_t size() const { return terms_.size(); }
  std::optional<std::uint32_t> index(const std::string& term) const;
  const std::string& term(std::size_t i) const { return terms_.at(i); }
  std::size_t df(std::size_t i) const { return df_.at(i); }
  const std::vector<std::string>& terms() const { return terms_; }

  /// "term<TAB>index<TAB>df" lines.
  std::string to_text() const;
  static Vocabulary from_text(std::string_view text);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.terms_ == b.terms_ && a.df_ == b.df_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;  // strictly increasing indices
  std::size_t dim = 0;

  double sum() const;
  bool valid() const;
};

/// Counts of in-vocabulary terms; out-of-vocabulary terms are dropped.
SparseVector vectorize(const std::vector<std::string>& terms, const Vocabulary& vocab);

}  // namespace mbti::features
