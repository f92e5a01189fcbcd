#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbti/corpus.hpp"

namespace mbti::synth {

/// Synthetic labeled corpus with a tunable class signal.
struct SynthSpec {
  /// 0 = every class draws from the shared vocabulary, 1 = disjoint per-class
  /// vocabularies.
  double distinctiveness = 0.5;
  std::size_t docs_per_class = 100;
  std::size_t shared_vocab = 2000;
  std::size_t class_vocab = 200;
  std::size_t min_doc_length = 10;
  std::size_t max_doc_length = 20;
  std::size_t authors_per_class = 25;
  /// Fraction of records placed in an MBTI-named subreddit.
  double mbti_venue_share = 0.15;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

/// Pseudo-words that survive tokenization, stop-word removal and stemming
/// unchanged. Deterministic in `n`.
std::vector<std::string> make_words(std::size_t n, std::size_t offset);

/// Each token comes from the record's class vocabulary with probability
/// `distinctiveness`, otherwise from the shared vocabulary.
std::vector<corpus::Comment> generate(const SynthSpec& spec);

}  // namespace mbti::synth
