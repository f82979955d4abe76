#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "edcr_spike/dataset.hpp"
#include "edcr_spike/label.hpp"
#include "edcr_spike/parallel.hpp"

namespace edcr_spike::pool {

// Binary predictions of every named model on every sample. Row-major: one row per model.
class PredictionMatrix {
 public:
  PredictionMatrix() = default;
  // Throws ValidationError on duplicate names, duplicate sample indices or a non-rectangular value block.
  PredictionMatrix(std::vector<std::string> models, std::vector<std::size_t> samples,
                   std::vector<Label> values);

  const std::vector<std::string>& models() const { return models_; }
  const std::vector<std::size_t>& samples() const { return samples_; }
  std::size_t n_models() const { return models_.size(); }
  std::size_t n_samples() const { return samples_.size(); }

  Label at(std::size_t model, std::size_t sample) const { return values_[model * samples_.size() + sample]; }
  std::span<const Label> row(std::size_t model) const;
  std::optional<std::size_t> find(std::string_view name) const;
  // Throws ValidationError for an unknown model.
  std::span<const Label> row(std::string_view name) const;

  // Models sorted by name, samples ascending.
  PredictionMatrix canonical() const;
  // Columns for exactly `indices`, in that order. Throws if any is missing.
  PredictionMatrix select_samples(std::span<const std::size_t> indices) const;
  PredictionMatrix without_models(std::span<const std::string> names) const;

  bool operator==(const PredictionMatrix&) const = default;

 private:
  std::vector<std::string> models_;
  std::vector<std::size_t> samples_;
  std::vector<Label> values_;
};

// Union of two pools over the same samples. Throws ValidationError on a
// duplicate model name or differing sample sets.
PredictionMatrix merge(const PredictionMatrix& a, const PredictionMatrix& b);

// ---- built-in predictors -------------------------------------------------

struct LogisticParams {
  double lr = 0.1;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  double feature_fraction = 1.0;  // < 1 trains on a seeded random feature subset
  double positive_weight = 1.0;   // loss weight on spike samples

  bool operator==(const LogisticParams&) const = default;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<std::uint8_t> active;  // per-feature mask; inactive weights stay 0

  double probability(std::span<const double> x) const;
  Label predict(std::span<const double> x) const;  // spike iff probability > 0.5
};

namespace logistic {

// Weighted mean binary cross-entropy.
double loss(const LogisticModel& m, const dataset::LabeledDataset& ds, double positive_weight = 1.0);

struct Gradient {
  std::vector<double> weights;
  double bias = 0.0;
};

Gradient gradient(const LogisticModel& m, const dataset::LabeledDataset& ds, double positive_weight = 1.0);

}  // namespace logistic

struct TrainResult {
  LogisticModel model;
  std::vector<double> loss_history;  // loss before each epoch, plus the final loss
};

// Full-batch gradient descent from zero weights. Throws ValidationError when the loss becomes non-finite.
TrainResult train_logistic(const dataset::LabeledDataset& train, const LogisticParams& params);

// Fires when the last return in the sample window deviates from the preceding
// `window` returns by more than `threshold` sample stds.
struct ZScoreDetector {
  std::size_t window = 10;
  double threshold = 2.0;

  Label predict(std::span<const double> features) const;
  std::size_t min_dimension() const;
};

struct ConstantPredictor {
  Label value = Label::no;
};

enum class PredictorKind { logistic, zdetector, constant };

struct Predictor {
  std::string name;
  std::variant<LogisticModel, ZScoreDetector, ConstantPredictor> model;

  PredictorKind kind() const;
  Label predict(std::span<const double> features) const;
  // Throws ValidationError when the predictor cannot read `dimension` features.
  void check_dimension(std::size_t dimension) const;
};

struct ZScoreGridPoint {
  std::size_t window = 10;
  double threshold = 2.0;

  bool operator==(const ZScoreGridPoint&) const = default;
};

std::string zscore_name(const ZScoreGridPoint& p);

std::vector<Predictor> make_zscore_detectors(std::span<const ZScoreGridPoint> grid);

// Trains LOGIT-1..LOGIT-k in order of `variants`.
std::vector<Predictor> train_logistic_pool(const dataset::LabeledDataset& train,
                                           std::span<const LogisticParams> variants);

PredictionMatrix predict_matrix(std::span<const Predictor> pool, const dataset::LabeledDataset& ds,
                                Exec exec = Exec::parallel);

// CSV: header `sample_index,<model1>,...`, cells 0/1, sample_index ascending.
PredictionMatrix import_predictions(const std::filesystem::path& path);
// Canonical form: models alphabetical, samples ascending.
void export_predictions(const PredictionMatrix& m, const std::filesystem::path& path);
std::string predictions_to_csv(const PredictionMatrix& m);

// Leading alphabetic run of a model name, upper-cased ("ZDET-10-1.5" -> "ZDET", "cnn12" -> "CNN").
std::string family_of(std::string_view model_name);

}  // namespace edcr_spike::pool
