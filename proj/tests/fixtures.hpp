#pragma once

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "edcr_spike/edcr.hpp"
#include "edcr_spike/market_data.hpp"
#include "edcr_spike/model_pool.hpp"
#include "oracle/naive_edcr.hpp"

namespace fixtures {

using edcr_spike::Label;

inline Label lab(int v) { return v ? Label::spike : Label::no; }

inline edcr_spike::LabelVec labels(const std::vector<int>& v) {
  edcr_spike::LabelVec out;
  for (int x : v) out.push_back(lab(x));
  return out;
}

inline std::vector<int> indicator(std::size_t n, std::initializer_list<std::size_t> on) {
  std::vector<int> v(n, 0);
  for (auto i : on) v[i] = 1;
  return v;
}

inline std::string cond_name(std::size_t c) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "c%02zu", c);
  return buf;
}

// Prediction matrix with a "primary" row plus one row per condition named c00, c01, ...
// so condition ids equal their position in `in.cond`.
inline edcr_spike::pool::PredictionMatrix matrix_of(const oracle::Instance& in, std::size_t first_index = 0) {
  std::vector<std::string> names{"primary"};
  std::vector<Label> values;
  for (int b : in.base) values.push_back(lab(b));
  for (std::size_t c = 0; c < in.cond.size(); ++c) {
    names.push_back(cond_name(c));
    for (int v : in.cond[c]) values.push_back(lab(v));
  }
  std::vector<std::size_t> samples(in.base.size());
  for (std::size_t s = 0; s < samples.size(); ++s) samples[s] = first_index + s;
  return {names, samples, values};
}

inline edcr_spike::edcr::RuleData rule_data(const oracle::Instance& in) {
  return edcr_spike::edcr::RuleData::from_matrix(matrix_of(in), "primary", labels(in.truth));
}

// F1: 10 samples, primary predicts no everywhere, spikes at {0,1,2};
// c1 (id 0) fires on {0,1,5}, c2 (id 1) fires on {2}.
inline oracle::Instance f1_fixture() {
  oracle::Instance in;
  in.base = std::vector<int>(10, 0);
  in.truth = indicator(10, {0, 1, 2});
  in.cond = {indicator(10, {0, 1, 5}), indicator(10, {2})};
  return in;
}

// F2: F1 with the primary predicting spike on {0,5}.
inline oracle::Instance f2_fixture() {
  auto in = f1_fixture();
  in.base = indicator(10, {0, 5});
  return in;
}

// Random instance; conditions are noisy copies of the truth with varying quality.
inline oracle::Instance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t n_cond) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  oracle::Instance in;
  const double prevalence = 0.1 + 0.3 * u(rng);
  const double base_tpr = u(rng);
  const double base_fpr = 0.3 * u(rng);
  for (std::size_t s = 0; s < n; ++s) {
    const int t = u(rng) < prevalence ? 1 : 0;
    in.truth.push_back(t);
    in.base.push_back(u(rng) < (t ? base_tpr : base_fpr) ? 1 : 0);
  }
  // Guarantee both classes occur in the truth.
  in.truth[0] = 1;
  in.truth[1] = 0;
  for (std::size_t c = 0; c < n_cond; ++c) {
    const double tpr = u(rng);
    const double fpr = 0.4 * u(rng);
    std::vector<int> col;
    for (std::size_t s = 0; s < n; ++s) col.push_back(u(rng) < (in.truth[s] ? tpr : fpr) ? 1 : 0);
    in.cond.push_back(std::move(col));
  }
  return in;
}

inline edcr_spike::market::PriceSeries series_of(const std::vector<double>& opens, int day_offset = 0) {
  using namespace std::chrono;
  std::vector<edcr_spike::market::PricePoint> pts;
  const sys_days origin{year{2021} / 1 / 1};
  for (std::size_t i = 0; i < opens.size(); ++i) {
    pts.push_back({year_month_day{origin + days{static_cast<long>(i) + day_offset}}, opens[i], opens[i] * 1.01,
                   opens[i] * 0.99});
  }
  return {"TEST", pts};
}

}  // namespace fixtures
