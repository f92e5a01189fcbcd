#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbti/corpus.hpp"
#include "mbti/features.hpp"
#include "mbti/label_algebra.hpp"

namespace mbti::classify {

using features::SparseVector;

/// Index of the largest score; ties go to the earliest label.
std::size_t argmax(std::span<const double> scores);

/// Softmax over log-scores, shifted by the max for stability.
std::vector<double> softmax(std::span<const double> logits);

struct NbModel {
  Granularity space = Granularity::Full16;
  double alpha = 1.0;
  std::size_t dim = 0;
  std::vector<double> log_prior;                    // per label
  std::vector<std::vector<double>> log_likelihood;  // label x term
};

/// Multinomial naive Bayes with Laplace smoothing. Throws Error(MissingClass)
/// listing every label without training examples.
NbModel train_nb(std::span<const SparseVector> x, std::span<const int> y, Granularity space,
                 double alpha = 1.0);
std::vector<double> nb_scores(const NbModel& m, const SparseVector& v);

struct LogRegConfig {
  double lr = 0.1;
  int epochs = 20;
  std::size_t batch = 32;
  std::uint64_t seed = 0;
};

struct LogRegModel {
  Granularity space = Granularity::Full16;
  std::size_t dim = 0;
  std::vector<double> weights;  // labels x dim, row-major
  std::vector<double> bias;
  LogRegConfig config;
  std::vector<double> train_loss;  // per epoch
  std::vector<double> dev_loss;    // per epoch, when a dev set was given
};

struct DevSet {
  std::span<const SparseVector> x;
  std::span<const int> y;
};

/// Mini-batch gradient descent on mean multinomial cross-entropy, examples
/// visited in a seeded shuffle each epoch. Throws Error(Divergence) naming the
/// epoch when the loss stops being finite.
LogRegModel train_logreg(std::span<const SparseVector> x, std::span<const int> y,
                         Granularity space, const LogRegConfig& cfg,
                         std::optional<DevSet> dev = std::nullopt);

/// Mean cross-entropy of (weights, bias) on the examples, optionally with its
/// analytic gradient.
double logreg_objective(std::span<const double> weights, std::span<const double> bias,
                        std::size_t dim, std::span<const SparseVector> x, std::span<const int> y,
                        std::vector<double>* grad_w = nullptr,
                        std::vector<double>* grad_b = nullptr);

std::vector<double> logreg_scores(const LogRegModel& m, const SparseVector& v);

struct PredictionRecord {
  std::string id;
  int gold = -1;  // -1 when unknown
  int predicted = 0;
  std::vector<double> scores;
};

/// Predictions over one label space; the CSV form is the exchange format shared
/// with external trainers.
struct PredictionSet {
  Granularity space = Granularity::Full16;
  std::vector<PredictionRecord> records;

  /// id,gold,predicted,<one score column per label>
  std::string to_csv() const;
  /// Validates header, labels and score rows (finite, non-negative, sum 1
  /// within 1e-6). `space` may be left unset to infer it from the header.
  static PredictionSet from_csv(std::string_view text,
                                std::optional<Granularity> space = std::nullopt);
  static PredictionSet read(const std::filesystem::path& path,
                            std::optional<Granularity> space = std::nullopt);
};

/// A trained model together with the text pipeline and vocabulary it expects.
class Model {
 public:
  using Impl = std::variant<NbModel, LogRegModel>;

  Model(Impl impl, features::TextPipeline pipeline, features::Vocabulary vocab,
        nlohmann::json manifest = nlohmann::json::object());

  Granularity space() const;
  std::string_view kind() const;
  const features::Vocabulary& vocabulary() const { return vocab_; }
  const features::TextPipeline& pipeline() const { return pipeline_; }
  const Impl& impl() const { return impl_; }
  const nlohmann::json& manifest() const { return manifest_; }

  /// Throws Error(DimensionMismatch) when v.dim differs from the vocabulary.
  std::vector<double> scores(const SparseVector& v) const;
  SparseVector featurize(std::string_view text) const;
  PredictionRecord predict(std::string id, int gold, const SparseVector& v) const;

  std::string to_json_text() const;
  static Model from_json_text(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Model load(const std::filesystem::path& path);

 private:
  Impl impl_;
  features::TextPipeline pipeline_;
  features::Vocabulary vocab_;
  nlohmann::json manifest_;
};

/// Predicts every listed record (all records when `ids` is empty).
PredictionSet predict_batch(const Model& model, const std::vector<corpus::CleanComment>& records,
                            const std::vector<std::string>& ids = {});

/// 16-type scores as the renormalized product of the four axis scores; the
/// predicted type is the concatenation of the per-axis argmaxes.
/// axis_scores are in AxisIE, AxisNS, AxisTF, AxisPJ order.
PredictionRecord compose_axis_scores(std::string id, int gold,
                                     const std::array<std::vector<double>, 4>& axis_scores);

/// Requires exactly one model per axis (any order). Throws Error(MissingClass)
/// naming the missing axes.
PredictionRecord compose_binary_ensemble(std::span<const Model* const> models, std::string id,
                                         int gold, std::string_view text);

PredictionSet predict_ensemble(std::span<const Model* const> models,
                               const std::vector<corpus::CleanComment>& records,
                               const std::vector<std::string>& ids = {});

}  // namespace mbti::classify
