#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbti/classify.hpp"
#include "mbti/label_algebra.hpp"

namespace mbti::evaluate {

struct ConfusionMatrix {
  Granularity space = Granularity::Full16;
  std::vector<std::vector<std::size_t>> counts;  // gold x predicted

  explicit ConfusionMatrix(Granularity g = Granularity::Full16);

  std::size_t size() const { return counts.size(); }
  std::size_t total() const;
  void add(std::size_t gold, std::size_t predicted, std::size_t n = 1) { counts[gold][predicted] += n; }
  void merge(const ConfusionMatrix& other);

  std::string to_csv() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  bool precision_undefined = false;
  bool recall_undefined = false;
};

struct MetricsReport {
  Granularity space = Granularity::Full16;
  std::vector<ClassMetrics> per_class;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double accuracy = 0.0;
  double chance = 0.0;
  std::size_t total = 0;
  std::string merge_mode;  // empty unless produced by merging

  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& j);
};

/// Undefined precision or recall counts as 0 and is flagged.
MetricsReport metrics(const ConfusionMatrix& cm);

struct Scored {
  ConfusionMatrix confusion;
  MetricsReport report;
};

/// Throws Error(LabelOutsideSpace) with the record id when a record has no
/// gold label or a label index outside the space.
Scored score(const classify::PredictionSet& predictions);

enum class MergeMode { ArgmaxMap, ScoreSum };
std::string_view merge_mode_name(MergeMode m);
MergeMode parse_merge_mode(std::string_view s);

/// Projects Full16 predictions into a coarser space. Scores are summed per
/// target group in both modes; ArgmaxMap projects the 16-type prediction,
/// ScoreSum takes the argmax of the merged scores.
classify::PredictionSet merge_predictions(const classify::PredictionSet& full16, Granularity target,
                                          MergeMode mode = MergeMode::ArgmaxMap);

/// Sums Full16 confusion blocks into the target space.
ConfusionMatrix block_sum(const ConfusionMatrix& full16, Granularity target);

struct ComparisonRow {
  std::string label;  // "macro-F1", "accuracy", or a class label (F1 row)
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;  // b - a
};

struct Comparison {
  Granularity space = Granularity::Full16;
  std::string name_a;
  std::string name_b;
  std::vector<ComparisonRow> rows;

  nlohmann::json to_json() const;
  std::string to_markdown() const;
};

/// Side-by-side metrics; throws Error(SpaceMismatch) on different spaces.
Comparison compare(const MetricsReport& a, const MetricsReport& b, std::string name_a = "A",
                   std::string name_b = "B");

enum class Normalize { None, Row };

/// Row-normalized grids leave all-zero rows at zero.
std::vector<std::vector<double>> heatmap_grid(const ConfusionMatrix& cm, Normalize n);
std::string heatmap_csv(const ConfusionMatrix& cm, Normalize n);
std::string heatmap_svg(const ConfusionMatrix& cm, Normalize n, std::string_view title = "");

}  // namespace mbti::evaluate
