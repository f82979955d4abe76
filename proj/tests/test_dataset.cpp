#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "edcr_spike/dataset.hpp"
#include "edcr_spike/errors.hpp"
#include "fixtures.hpp"

using namespace edcr_spike;
using namespace edcr_spike::dataset;
namespace fs = std::filesystem;

namespace {

market::PriceSeries synthetic(std::size_t length, std::uint64_t seed = 7) {
  market::SyntheticSpec spec;
  spec.length = length;
  spec.seed = seed;
  return market::generate_synthetic(spec);
}

}  // namespace

TEST_CASE("sample count follows label window and sample window") {
  const auto s = synthetic(30);
  const auto ls = market::label_spikes(s, 20, 2.0);
  const auto ds = build_samples(s, ls, 5);
  CHECK(ds.size() == 10);
  CHECK(ds.samples.front().index == 20);
  CHECK(ds.samples.back().index == 29);
  for (const auto& smp : ds.samples) CHECK(smp.features.size() == 9);
  CHECK(ds.spec.dimension() == 9);
}

TEST_CASE("window features: z-normalized opens then simple returns") {
  SUBCASE("constant window gives zeros") {
    const std::vector<double> w(5, 7.0);
    for (double f : window_features(w)) CHECK(f == 0.0);
  }
  SUBCASE("hand computed values") {
    const std::vector<double> w{1, 2, 3, 4};
    const auto f = window_features(w);
    REQUIRE(f.size() == 7);
    // mean 2.5, sample std sqrt(5/3)
    const double sd = std::sqrt(5.0 / 3.0);
    CHECK(f[0] == doctest::Approx(-1.5 / sd));
    CHECK(f[3] == doctest::Approx(1.5 / sd));
    CHECK(f[4] == doctest::Approx(1.0));
    CHECK(f[5] == doctest::Approx(0.5));
    CHECK(f[6] == doctest::Approx(1.0 / 3.0));
  }
}

TEST_CASE("chronological split") {
  const auto s = synthetic(30);
  const auto ds = build_samples(s, market::label_spikes(s, 20, 2.0), 5);
  const auto sp = chronological_split(ds, 0.6);
  CHECK(sp.train.size() == 6);
  CHECK(sp.test.size() == 4);
  CHECK(sp.train.samples.back().index < sp.test.samples.front().index);
  CHECK_THROWS_AS(chronological_split(ds, 1.5), ValidationError);
}

TEST_CASE("features never read the predicted day or later") {
  const auto s = synthetic(200, 5);
  const auto ls = market::label_spikes(s, 20, 2.0);
  const auto ds = build_samples(s, ls, 20);
  const std::size_t t = 120;
  auto pts = s.points();
  for (std::size_t i = t; i < pts.size(); ++i) pts[i].open *= 3.0;
  const market::PriceSeries perturbed(s.symbol(), pts);
  const auto ds2 = build_samples(perturbed, ls, 20);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.samples[i].index <= t) CHECK(ds.samples[i].features == ds2.samples[i].features);
  }
}

TEST_CASE("dataset export/import round trips") {
  const auto s = synthetic(120);
  const auto ds = build_samples(s, market::label_spikes(s, 20, 2.0), 10);
  const auto p = fs::temp_directory_path() / "edcr_test_dataset" / "ds.csv";
  export_dataset(ds, p);
  CHECK(import_dataset(p) == ds);
}
