#pragma once

#include <filesystem>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mbti/corpus.hpp"
#include "mbti/features.hpp"

namespace mbti::analysis {

struct LanguageProfile {
  std::string code;
  std::unordered_set<std::string> stopwords;
};

/// Built-in profiles (data/languages/*.txt), sorted by code.
std::vector<LanguageProfile> default_profiles();
/// Every <code>.txt in `dir`, sorted by code. Throws when none are found.
std::vector<LanguageProfile> load_profiles(const std::filesystem::path& dir);

struct DetectConfig {
  std::size_t min_hits = 2;
  double min_rate = 0.1;
};

struct Detection {
  std::string code;  // "und" when undetermined
  double confidence = 0.0;
};

/// Profile with the highest stop-word hit rate; ties go to the earlier
/// profile. Confidence is the rate margin over the runner-up.
Detection detect_language(std::string_view text, const std::vector<LanguageProfile>& profiles,
                          const DetectConfig& cfg = {});

/// Descending by fraction, ties by code. Throws when `label` has no records.
std::vector<std::pair<std::string, double>> language_distribution(
    const std::vector<corpus::CleanComment>& records, MbtiType label,
    const std::vector<LanguageProfile>& profiles, const DetectConfig& cfg = {});

struct TermCount {
  std::string term;  // most frequent surface form of the stem
  std::string stem;
  std::size_t count = 0;
  double share = 0.0;  // of all terms counted for the class
};

struct TermRanking {
  std::string label;
  std::vector<TermCount> terms;
};

struct BowConfig {
  std::size_t top_k = 20;
  /// Keep only documents detected as English before counting.
  bool english_only = true;
  features::TokenizerConfig tokenizer;
};

/// Top terms after stop-word removal and stemming, descending by count, ties
/// by stem.
TermRanking bow_ranking(const std::vector<corpus::CleanComment>& records, MbtiType label,
                        const BowConfig& cfg, const std::vector<LanguageProfile>& profiles);

std::string distribution_csv(const std::vector<std::pair<std::string, double>>& dist);
std::string ranking_csv(const TermRanking& r);
/// Horizontal bar chart.
std::string bar_chart_svg(const std::vector<std::pair<std::string, double>>& bars,
                          std::string_view title);

}  // namespace mbti::analysis
