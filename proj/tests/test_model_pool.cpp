#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "edcr_spike/errors.hpp"
#include "edcr_spike/model_pool.hpp"
#include "fixtures.hpp"

using namespace edcr_spike;
using namespace edcr_spike::pool;
using dataset::LabeledDataset;
namespace fs = std::filesystem;

namespace {

LabeledDataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t d, bool balanced) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  LabeledDataset ds;
  ds.spec.n = (d + 1) / 2;
  for (std::size_t i = 0; i < n; ++i) {
    dataset::Sample s;
    s.index = i;
    for (std::size_t j = 0; j < d; ++j) s.features.push_back(z(rng));
    s.label = balanced ? (i % 2 ? Label::spike : Label::no) : (s.features[0] + 0.5 * z(rng) > 0.8 ? Label::spike : Label::no);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

fs::path temp_file(const std::string& name, const std::string& content) {
  const auto dir = fs::temp_directory_path() / "edcr_test_pool";
  fs::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p) << content;
  return p;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)}); }

}  // namespace

TEST_CASE("initial logistic loss is ln 2") {
  const auto ds = random_dataset(1, 40, 9, true);
  LogisticModel m{std::vector<double>(9, 0.0), 0.0, std::vector<std::uint8_t>(9, 1)};
  CHECK(std::abs(logistic::loss(m, ds) - std::log(2.0)) < 1e-9);
}

TEST_CASE("analytic gradient matches central differences") {
  const auto ds = random_dataset(2, 60, 9, false);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0.0, 0.5);
  for (double pw : {1.0, 3.0}) {
    LogisticModel m{std::vector<double>(9), z(rng), std::vector<std::uint8_t>(9, 1)};
    for (auto& w : m.weights) w = z(rng);
    const auto g = logistic::gradient(m, ds, pw);
    const double h = 1e-6;
    for (std::size_t j = 0; j < m.weights.size(); ++j) {
      auto up = m, dn = m;
      up.weights[j] += h;
      dn.weights[j] -= h;
      const double fd = (logistic::loss(up, ds, pw) - logistic::loss(dn, ds, pw)) / (2 * h);
      CHECK(rel_err(g.weights[j], fd) < 1e-5);
    }
    auto up = m, dn = m;
    up.bias += h;
    dn.bias -= h;
    CHECK(rel_err(g.bias, (logistic::loss(up, ds, pw) - logistic::loss(dn, ds, pw)) / (2 * h)) < 1e-5);
  }
}

TEST_CASE("training separates a separable set and never increases the loss at small lr") {
  LabeledDataset ds;
  ds.spec.n = 1;
  for (int i = 0; i < 20; ++i) {
    const double x = i < 10 ? -1.0 - 0.1 * i : 1.0 + 0.1 * i;
    ds.samples.push_back({static_cast<std::size_t>(i), {x}, i < 10 ? Label::no : Label::spike});
  }
  const auto fit = train_logistic(ds, {.lr = 0.5, .epochs = 200});
  for (const auto& s : ds.samples) CHECK(fit.model.predict(s.features) == s.label);

  const auto slow = train_logistic(random_dataset(4, 80, 9, false), {.lr = 1e-3, .epochs = 100});
  for (std::size_t e = 1; e < slow.loss_history.size(); ++e) {
    CHECK(slow.loss_history[e] <= slow.loss_history[e - 1]);
  }
}

TEST_CASE("divergent training reports the epoch") {
  auto ds = random_dataset(5, 20, 3, true);
  for (auto& s : ds.samples) s.features[0] *= 1e300;
  CHECK_THROWS_AS(train_logistic(ds, {.lr = 1e10, .epochs = 50}), ValidationError);
}

TEST_CASE("z-score detectors") {
  const std::vector<ZScoreGridPoint> grid{{5, 1.5}, {5, 2.0}, {10, 1.5}, {10, 2.0}, {10, 2.5}, {15, 2.0}};
  const auto dets = make_zscore_detectors(grid);
  std::set<std::string> names;
  for (const auto& d : dets) names.insert(d.name);
  CHECK(names.size() == 6);
  CHECK(zscore_name({10, 1.5}) == "ZDET-10-1.5");

  const auto flat = dataset::window_features(std::vector<double>(20, 50.0));
  for (const auto& d : dets) CHECK(d.predict(flat) == Label::no);

  std::vector<double> w;
  for (int i = 0; i < 20; ++i) w.push_back(100.0 + 0.1 * ((i * 7) % 5));
  w.back() = 130.0;
  for (const auto& d : dets) CHECK(d.predict(dataset::window_features(w)) == Label::spike);

  CHECK_THROWS_AS(Predictor({"ZDET-18-2.5", ZScoreDetector{18, 2.5}}).check_dimension(9), ValidationError);
}

TEST_CASE("constant predictor matrix") {
  const auto ds = random_dataset(6, 12, 5, true);
  const std::vector<Predictor> pool{{"CONST-NO", ConstantPredictor{Label::no}}};
  const auto m = predict_matrix(pool, ds);
  CHECK(m.n_models() == 1);
  CHECK(m.n_samples() == 12);
  for (auto v : m.row(0)) CHECK(v == Label::no);
}

TEST_CASE("prediction import, export and canonical order") {
  const auto p = temp_file("preds.csv",
                           "sample_index,RNN4,CNN1\n"
                           "3,1,0\n4,0,0\n5,1,1\n6,0,1\n7,0,0\n");
  const auto m = import_predictions(p);
  CHECK(m.n_models() == 2);
  CHECK(m.n_samples() == 5);
  CHECK(m.row("CNN1")[2] == Label::spike);

  const auto out = fs::temp_directory_path() / "edcr_test_pool" / "out.csv";
  export_predictions(m, out);
  const auto back = import_predictions(out);
  CHECK(back == m.canonical());
  CHECK(back.models() == std::vector<std::string>{"CNN1", "RNN4"});

  CHECK_THROWS_AS(import_predictions(temp_file("bad_cell.csv", "sample_index,A\n1,2\n")), ValidationError);
  CHECK_THROWS_AS(import_predictions(temp_file("ragged.csv", "sample_index,A,B\n1,0\n")), ValidationError);
  CHECK_THROWS_AS(import_predictions(temp_file("order.csv", "sample_index,A\n2,0\n1,0\n")), ValidationError);
  CHECK_THROWS_AS(export_predictions(PredictionMatrix{}, out), ValidationError);
}

TEST_CASE("merge rejects duplicate model names") {
  const PredictionMatrix a({"A"}, {1, 2}, {Label::no, Label::spike});
  const PredictionMatrix b({"B"}, {1, 2}, {Label::spike, Label::spike});
  CHECK(merge(a, b).n_models() == 2);
  CHECK_THROWS_AS(merge(a, a), ValidationError);
}

TEST_CASE("family names") {
  CHECK(family_of("ZDET-10-1.5") == "ZDET");
  CHECK(family_of("cnn12") == "CNN");
  CHECK(family_of("LOGIT-3") == "LOGIT");
}

TEST_CASE("prediction matrix is identical serial and parallel") {
  const auto ds = random_dataset(8, 200, 39, false);
  auto pool = train_logistic_pool(ds, std::vector<LogisticParams>{{.epochs = 30, .seed = 1}, {.epochs = 30, .seed = 2, .feature_fraction = 0.5}});
  const std::vector<ZScoreGridPoint> grid{{5, 1.5}, {10, 2.0}};
  for (auto& d : make_zscore_detectors(grid)) pool.push_back(d);
  CHECK(predict_matrix(pool, ds, Exec::serial) == predict_matrix(pool, ds, Exec::parallel));
}
