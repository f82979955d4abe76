#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "edcr_spike/label.hpp"
#include "edcr_spike/market_data.hpp"

namespace edcr_spike::dataset {

// Predicts the label of series day `index` from the n opens before it.
struct Sample {
  std::size_t index = 0;
  std::vector<double> features;
  Label label = Label::no;

  bool operator==(const Sample&) const = default;
};

// Feature layout: n z-normalized opens followed by n-1 one-day simple returns.
struct FeatureSpec {
  std::size_t n = 20;

  std::size_t dimension() const { return 2 * n - 1; }
  std::size_t returns_offset() const { return n; }
  std::string describe() const;

  bool operator==(const FeatureSpec&) const = default;
};

struct LabeledDataset {
  std::vector<Sample> samples;  // strictly increasing index
  FeatureSpec spec;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::vector<std::size_t> indices() const;
  LabelVec labels() const;

  bool operator==(const LabeledDataset&) const = default;
};

struct Split {
  LabeledDataset train;
  LabeledDataset test;
  double ratio = 0.6;
};

// Features for the day after `window` (the n opens preceding the predicted day).
std::vector<double> window_features(std::span<const double> window);

LabeledDataset build_samples(const market::PriceSeries& series, const market::LabelSeries& labels,
                             std::size_t n);

// First floor(ratio * |ds|) samples train, the rest test; no shuffling.
Split chronological_split(const LabeledDataset& ds, double ratio);

// CSV with columns index,label,f0..f{d-1}.
void export_dataset(const LabeledDataset& ds, const std::filesystem::path& path);
LabeledDataset import_dataset(const std::filesystem::path& path);

}  // namespace edcr_spike::dataset
