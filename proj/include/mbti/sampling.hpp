#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbti/corpus.hpp"

namespace mbti::sampling {

enum class Subset { Total, MbtiOnly, NoMbti };
enum class Strategy { Balanced, Proportionate };

std::string_view subset_name(Subset s);
std::string_view strategy_name(Strategy s);
Subset parse_subset(std::string_view s);
Strategy parse_strategy(std::string_view s);

struct SampleSpec {
  Subset subset = Subset::Total;
  Strategy strategy = Strategy::Balanced;
  std::size_t total_size = 0;
  std::optional<std::size_t> per_class_cap;
  std::uint64_t seed = 0;

  /// Balanced needs total_size divisible by 16 or an explicit per-class cap.
  void validate() const;
  nlohmann::json to_json() const;
};

struct AuthorStats {
  double mean = 0.0;
  std::size_t median = 0;
};

struct Sample {
  SampleSpec spec;
  std::vector<corpus::CleanComment> records;
  std::array<std::size_t, 16> class_counts{};  // indexed by MbtiType::index()
  AuthorStats author_stats;
};

/// Per-class targets summing exactly to `total`, by largest remainder; ties in
/// the remainder go to the earlier class.
std::array<std::size_t, 16> largest_remainder(const std::array<std::size_t, 16>& available,
                                              std::size_t total);

/// Throws Error(Capacity) naming every class that falls short.
Sample draw_sample(const std::vector<corpus::CleanComment>& corpus, const SampleSpec& spec);

/// mean = records / authors; median of per-author counts, lower middle for
/// even counts. Throws Error(EmptySample).
AuthorStats author_stats(const std::vector<corpus::CleanComment>& records);

struct Proportions {
  double train = 0.64;
  double dev = 0.16;
  double test = 0.20;
  void validate() const;
};

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;
  Proportions proportions;
  std::uint64_t seed = 0;

  friend bool operator==(const Split& a, const Split& b) {
    return a.train == b.train && a.dev == b.dev && a.test == b.test && a.seed == b.seed;
  }
};

/// Shuffled split; stratified by label for Balanced samples.
Split split(const Sample& s, const Proportions& p, std::uint64_t seed);

/// Sizes for n items: floors plus largest remainder, in train/dev/test order.
std::array<std::size_t, 3> split_sizes(std::size_t n, const Proportions& p);

/// Writes sample.json, records.jsonl and, when given, train.ids/dev.ids/test.ids.
void write_sample(const std::filesystem::path& dir, const Sample& s, const Split* split = nullptr);

struct LoadedSample {
  nlohmann::json manifest;
  std::vector<corpus::CleanComment> records;
};
LoadedSample read_sample(const std::filesystem::path& dir);
std::vector<std::string> read_ids(const std::filesystem::path& path);

nlohmann::json sample_manifest(const Sample& s);

}  // namespace mbti::sampling
