#include "edcr_spike/model_pool.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "edcr_spike/csv.hpp"
#include "edcr_spike/errors.hpp"

namespace edcr_spike::pool {

// ---- PredictionMatrix ------------------------------------------------------

PredictionMatrix::PredictionMatrix(std::vector<std::string> models, std::vector<std::size_t> samples,
                                   std::vector<Label> values)
    : models_(std::move(models)), samples_(std::move(samples)), values_(std::move(values)) {
  if (values_.size() != models_.size() * samples_.size()) {
    throw ValidationError("prediction matrix is not rectangular: " + std::to_string(values_.size()) +
                          " values for " + std::to_string(models_.size()) + " models x " +
                          std::to_string(samples_.size()) + " samples");
  }
  std::set<std::string_view> seen;
  for (const auto& m : models_) {
    if (m.empty()) throw ValidationError("empty model name");
    if (!seen.insert(m).second) throw ValidationError("duplicate model name '" + m + "'");
  }
  std::set<std::size_t> seen_samples(samples_.begin(), samples_.end());
  if (seen_samples.size() != samples_.size()) throw ValidationError("duplicate sample index in prediction matrix");
}

std::span<const Label> PredictionMatrix::row(std::size_t model) const {
  return std::span<const Label>(values_).subspan(model * samples_.size(), samples_.size());
}

std::optional<std::size_t> PredictionMatrix::find(std::string_view name) const {
  const auto it = std::find(models_.begin(), models_.end(), name);
  if (it == models_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - models_.begin());
}

std::span<const Label> PredictionMatrix::row(std::string_view name) const {
  const auto m = find(name);
  if (!m) throw ValidationError("unknown model '" + std::string(name) + "'");
  return row(*m);
}

PredictionMatrix PredictionMatrix::canonical() const {
  std::vector<std::size_t> morder(models_.size());
  std::iota(morder.begin(), morder.end(), 0);
  std::sort(morder.begin(), morder.end(), [&](auto a, auto b) { return models_[a] < models_[b]; });
  std::vector<std::size_t> sorder(samples_.size());
  std::iota(sorder.begin(), sorder.end(), 0);
  std::sort(sorder.begin(), sorder.end(), [&](auto a, auto b) { return samples_[a] < samples_[b]; });

  std::vector<std::string> models;
  std::vector<std::size_t> samples;
  std::vector<Label> values;
  values.reserve(values_.size());
  for (auto m : morder) models.push_back(models_[m]);
  for (auto s : sorder) samples.push_back(samples_[s]);
  for (auto m : morder) {
    for (auto s : sorder) values.push_back(at(m, s));
  }
  return PredictionMatrix(std::move(models), std::move(samples), std::move(values));
}

PredictionMatrix PredictionMatrix::select_samples(std::span<const std::size_t> indices) const {
  std::unordered_map<std::size_t, std::size_t> pos;
  for (std::size_t s = 0; s < samples_.size(); ++s) pos.emplace(samples_[s], s);
  std::vector<std::size_t> cols;
  cols.reserve(indices.size());
  for (auto idx : indices) {
    const auto it = pos.find(idx);
    if (it == pos.end()) throw ValidationError("predictions missing sample index " + std::to_string(idx));
    cols.push_back(it->second);
  }
  std::vector<Label> values;
  values.reserve(models_.size() * cols.size());
  for (std::size_t m = 0; m < models_.size(); ++m) {
    for (auto c : cols) values.push_back(at(m, c));
  }
  return PredictionMatrix(models_, std::vector<std::size_t>(indices.begin(), indices.end()), std::move(values));
}

PredictionMatrix PredictionMatrix::without_models(std::span<const std::string> names) const {
  const std::set<std::string_view> drop(names.begin(), names.end());
  std::vector<std::string> models;
  std::vector<Label> values;
  for (std::size_t m = 0; m < models_.size(); ++m) {
    if (drop.contains(models_[m])) continue;
    models.push_back(models_[m]);
    const auto r = row(m);
    values.insert(values.end(), r.begin(), r.end());
  }
  return PredictionMatrix(std::move(models), samples_, std::move(values));
}

PredictionMatrix merge(const PredictionMatrix& a, const PredictionMatrix& b) {
  if (a.n_models() == 0) return b;
  if (b.n_models() == 0) return a;
  auto sa = a.samples();
  auto sb = b.samples();
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa != sb) throw ValidationError("cannot merge prediction matrices over different samples");
  const auto bb = b.select_samples(a.samples());
  auto models = a.models();
  models.insert(models.end(), bb.models().begin(), bb.models().end());
  std::vector<Label> values;
  values.reserve(models.size() * a.n_samples());
  for (std::size_t m = 0; m < a.n_models(); ++m) {
    const auto r = a.row(m);
    values.insert(values.end(), r.begin(), r.end());
  }
  for (std::size_t m = 0; m < bb.n_models(); ++m) {
    const auto r = bb.row(m);
    values.insert(values.end(), r.begin(), r.end());
  }
  return PredictionMatrix(std::move(models), a.samples(), std::move(values));
}

// ---- logistic regression ---------------------------------------------------

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z))
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double logit(const LogisticModel& m, std::span<const double> x) {
  double z = m.bias;
  for (std::size_t j = 0; j < x.size(); ++j) z += m.weights[j] * x[j];
  return z;
}

double sample_weight(Label y, double positive_weight) { return y == Label::spike ? positive_weight : 1.0; }

void check_features(const LogisticModel& m, const dataset::LabeledDataset& ds) {
  for (const auto& s : ds.samples) {
    if (s.features.size() != m.weights.size()) {
      throw ValidationError("feature length " + std::to_string(s.features.size()) + " does not match model width " +
                            std::to_string(m.weights.size()));
    }
  }
}

}  // namespace

double LogisticModel::probability(std::span<const double> x) const { return sigmoid(logit(*this, x)); }

Label LogisticModel::predict(std::span<const double> x) const {
  return probability(x) > 0.5 ? Label::spike : Label::no;
}

namespace logistic {

double loss(const LogisticModel& m, const dataset::LabeledDataset& ds, double positive_weight) {
  check_features(m, ds);
  double total = 0.0;
  double weight = 0.0;
  for (const auto& s : ds.samples) {
    const double z = logit(m, s.features);
    const double y = s.label == Label::spike ? 1.0 : 0.0;
    const double w = sample_weight(s.label, positive_weight);
    total += w * (softplus(z) - y * z);
    weight += w;
  }
  return weight > 0.0 ? total / weight : 0.0;
}

Gradient gradient(const LogisticModel& m, const dataset::LabeledDataset& ds, double positive_weight) {
  check_features(m, ds);
  Gradient g;
  g.weights.assign(m.weights.size(), 0.0);
  double weight = 0.0;
  for (const auto& s : ds.samples) {
    const double y = s.label == Label::spike ? 1.0 : 0.0;
    const double w = sample_weight(s.label, positive_weight);
    const double r = w * (sigmoid(logit(m, s.features)) - y);
    for (std::size_t j = 0; j < g.weights.size(); ++j) g.weights[j] += r * s.features[j];
    g.bias += r;
    weight += w;
  }
  if (weight > 0.0) {
    for (auto& v : g.weights) v /= weight;
    g.bias /= weight;
  }
  for (std::size_t j = 0; j < g.weights.size(); ++j) {
    if (!m.active.empty() && m.active[j] == 0) g.weights[j] = 0.0;
  }
  return g;
}

}  // namespace logistic

TrainResult train_logistic(const dataset::LabeledDataset& train, const LogisticParams& params) {
  if (train.empty()) throw ValidationError("logistic training set is empty");
  if (!(params.lr > 0.0)) throw ValidationError("learning rate must be positive");
  if (!(params.feature_fraction > 0.0 && params.feature_fraction <= 1.0)) {
    throw ValidationError("feature_fraction must lie in (0, 1]");
  }
  if (!(params.positive_weight > 0.0)) throw ValidationError("positive_weight must be positive");

  const std::size_t d = train.samples.front().features.size();
  TrainResult res;
  res.model.weights.assign(d, 0.0);
  res.model.active.assign(d, 1);
  if (params.feature_fraction < 1.0) {
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(params.seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(params.feature_fraction * static_cast<double>(d))));
    std::fill(res.model.active.begin(), res.model.active.end(), 0);
    for (std::size_t j = 0; j < keep; ++j) res.model.active[order[j]] = 1;
  }

  res.loss_history.reserve(params.epochs + 1);
  for (std::size_t epoch = 0; epoch <= params.epochs; ++epoch) {
    const double l = logistic::loss(res.model, train, params.positive_weight);
    if (!std::isfinite(l)) throw ValidationError("logistic loss became non-finite at epoch " + std::to_string(epoch));
    res.loss_history.push_back(l);
    if (epoch == params.epochs) break;
    const auto g = logistic::gradient(res.model, train, params.positive_weight);
    for (std::size_t j = 0; j < d; ++j) res.model.weights[j] -= params.lr * g.weights[j];
    res.model.bias -= params.lr * g.bias;
  }
  return res;
}

// ---- z-score detectors -----------------------------------------------------

std::size_t ZScoreDetector::min_dimension() const { return 2 * (window + 2) - 1; }

Label ZScoreDetector::predict(std::span<const double> features) const {
  const std::size_t n = (features.size() + 1) / 2;
  const auto returns = features.subspan(n, n - 1);
  const double last = returns.back();
  const auto prior = returns.subspan(returns.size() - 1 - window, window);
  double sum = 0.0;
  for (double r : prior) sum += r;
  const double mean = sum / static_cast<double>(window);
  double ss = 0.0;
  for (double r : prior) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / static_cast<double>(window - 1));
  return std::abs(last - mean) > threshold * sd ? Label::spike : Label::no;
}

std::string zscore_name(const ZScoreGridPoint& p) {
  std::ostringstream os;
  os << "ZDET-" << p.window << '-' << csv::format_double(p.threshold);
  return os.str();
}

std::vector<Predictor> make_zscore_detectors(std::span<const ZScoreGridPoint> grid) {
  std::vector<Predictor> out;
  std::set<std::string> names;
  for (const auto& p : grid) {
    if (p.window < 2) throw ValidationError("z-score detector window must be >= 2");
    if (!(p.threshold > 0.0)) throw ValidationError("z-score detector threshold must be positive");
    auto name = zscore_name(p);
    if (!names.insert(name).second) throw ValidationError("duplicate detector '" + name + "'");
    out.push_back({std::move(name), ZScoreDetector{p.window, p.threshold}});
  }
  return out;
}

// ---- pool ------------------------------------------------------------------

PredictorKind Predictor::kind() const {
  switch (model.index()) {
    case 0: return PredictorKind::logistic;
    case 1: return PredictorKind::zdetector;
    default: return PredictorKind::constant;
  }
}

Label Predictor::predict(std::span<const double> features) const {
  return std::visit(
      [&](const auto& m) -> Label {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ConstantPredictor>) {
          return m.value;
        } else {
          return m.predict(features);
        }
      },
      model);
}

void Predictor::check_dimension(std::size_t dimension) const {
  if (const auto* lm = std::get_if<LogisticModel>(&model); lm && lm->weights.size() != dimension) {
    throw ValidationError("predictor '" + name + "' expects " + std::to_string(lm->weights.size()) +
                          " features, dataset has " + std::to_string(dimension));
  }
  if (const auto* zd = std::get_if<ZScoreDetector>(&model)) {
    if (dimension % 2 == 0 || dimension < zd->min_dimension()) {
      throw ValidationError("predictor '" + name + "' needs an odd feature width >= " +
                            std::to_string(zd->min_dimension()) + ", dataset has " + std::to_string(dimension));
    }
  }
}

std::vector<Predictor> train_logistic_pool(const dataset::LabeledDataset& train,
                                           std::span<const LogisticParams> variants) {
  std::vector<Predictor> out;
  out.reserve(variants.size());
  for (std::size_t v = 0; v < variants.size(); ++v) {
    out.push_back({"LOGIT-" + std::to_string(v + 1), train_logistic(train, variants[v]).model});
  }
  return out;
}

PredictionMatrix predict_matrix(std::span<const Predictor> pool, const dataset::LabeledDataset& ds, Exec exec) {
  if (pool.empty()) throw ValidationError("predictor pool is empty");
  const std::size_t d = ds.spec.dimension();
  for (const auto& s : ds.samples) {
    if (s.features.size() != d) {
      throw ValidationError("sample " + std::to_string(s.index) + " has " + std::to_string(s.features.size()) +
                            " features, expected " + std::to_string(d));
    }
  }
  for (const auto& p : pool) p.check_dimension(d);

  const std::size_t ns = ds.size();
  std::vector<Label> values(pool.size() * ns);
  const auto total = static_cast<std::ptrdiff_t>(values.size());
  if (exec == Exec::serial) {
    for (std::ptrdiff_t k = 0; k < total; ++k) {
      values[k] = pool[k / ns].predict(ds.samples[k % ns].features);
    }
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < total; ++k) {
      values[k] = pool[k / ns].predict(ds.samples[k % ns].features);
    }
  }
  std::vector<std::string> names;
  names.reserve(pool.size());
  for (const auto& p : pool) names.push_back(p.name);
  return PredictionMatrix(std::move(names), ds.indices(), std::move(values));
}

// ---- interchange CSV -------------------------------------------------------

PredictionMatrix import_predictions(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw ValidationError(path.string() + ": missing header");
  const auto header = csv::split_line(lines.front());
  if (header.size() < 2 || header[0] != "sample_index") {
    throw ValidationError(path.string() + ": header must be sample_index,<model1>,...");
  }
  std::vector<std::string> models(header.begin() + 1, header.end());
  const std::size_t nm = models.size();
  std::vector<std::size_t> samples;
  std::vector<std::vector<Label>> rows(nm);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = csv::split_line(lines[r]);
    const std::string where = path.string() + " row " + std::to_string(r + 1);
    if (fields.size() != header.size()) {
      throw ValidationError(where + ": ragged row (" + std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(header.size()) + ")");
    }
    const auto idx = csv::parse_int(fields[0], where);
    if (idx < 0) throw ValidationError(where + ": negative sample index");
    if (!samples.empty() && static_cast<std::size_t>(idx) <= samples.back()) {
      throw ValidationError(where + ": sample_index must be strictly ascending");
    }
    samples.push_back(static_cast<std::size_t>(idx));
    for (std::size_t m = 0; m < nm; ++m) {
      const auto& cell = fields[m + 1];
      if (cell != "0" && cell != "1") {
        throw ValidationError(where + ": invalid prediction '" + cell + "' for model " + models[m] +
                              " (expected 0 or 1)");
      }
      rows[m].push_back(cell == "1" ? Label::spike : Label::no);
    }
  }
  std::vector<Label> values;
  values.reserve(nm * samples.size());
  for (auto& r : rows) values.insert(values.end(), r.begin(), r.end());
  return PredictionMatrix(std::move(models), std::move(samples), std::move(values));
}

std::string predictions_to_csv(const PredictionMatrix& m) {
  if (m.n_models() == 0) throw ValidationError("cannot export a prediction matrix without models");
  const auto c = m.canonical();
  std::string out = "sample_index";
  for (const auto& name : c.models()) out += "," + name;
  out += '\n';
  for (std::size_t s = 0; s < c.n_samples(); ++s) {
    out += std::to_string(c.samples()[s]);
    for (std::size_t k = 0; k < c.n_models(); ++k) out += c.at(k, s) == Label::spike ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

void export_predictions(const PredictionMatrix& m, const std::filesystem::path& path) {
  csv::write_file(path, predictions_to_csv(m));
}

std::string family_of(std::string_view model_name) {
  std::string out;
  for (char ch : model_name) {
    if (!std::isalpha(static_cast<unsigned char>(ch))) break;
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  }
  if (out.empty()) {
    for (char ch : model_name) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  }
  return out;
}

}  // namespace edcr_spike::pool
