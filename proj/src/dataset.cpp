#include "edcr_spike/dataset.hpp"

#include <cmath>
#include <sstream>

#include "edcr_spike/csv.hpp"
#include "edcr_spike/errors.hpp"

namespace edcr_spike::dataset {

std::string FeatureSpec::describe() const {
  return "zscore_opens(n=" + std::to_string(n) + ")+returns(n-1=" + std::to_string(n - 1) + ")";
}

std::vector<std::size_t> LabeledDataset::indices() const {
  std::vector<std::size_t> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.index);
  return out;
}

LabelVec LabeledDataset::labels() const {
  LabelVec out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

std::vector<double> window_features(std::span<const double> window) {
  const std::size_t n = window.size();
  std::vector<double> f(2 * n - 1, 0.0);

  double sum = 0.0;
  for (double v : window) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : window) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd > 0.0) {
    for (std::size_t i = 0; i < n; ++i) f[i] = (window[i] - mean) / sd;
  }
  for (std::size_t i = 1; i < n; ++i) {
    f[n + i - 1] = window[i - 1] != 0.0 ? window[i] / window[i - 1] - 1.0 : 0.0;
  }
  return f;
}

LabeledDataset build_samples(const market::PriceSeries& series, const market::LabelSeries& labels, std::size_t n) {
  if (n < 2) throw ValidationError("sample window n must be >= 2");
  if (labels.labels.size() != series.size()) {
    throw ValidationError("label series length " + std::to_string(labels.labels.size()) +
                          " does not match price series length " + std::to_string(series.size()));
  }
  const auto opens = series.opens();
  LabeledDataset ds;
  ds.spec.n = n;
  for (std::size_t t = n; t < opens.size(); ++t) {
    if (!labels.labels[t]) continue;
    ds.samples.push_back({t, window_features(std::span<const double>(opens).subspan(t - n, n)), *labels.labels[t]});
  }
  if (ds.samples.empty()) throw ValidationError("no eligible samples (series too short for the windows)");
  return ds;
}

Split chronological_split(const LabeledDataset& ds, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("split ratio must lie in (0, 1)");
  if (ds.size() < 2) throw ValidationError("need at least 2 samples to split");
  const auto cut = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(ds.size()) + 1e-9));
  if (cut == 0 || cut >= ds.size()) {
    throw ValidationError("split ratio " + csv::format_double(ratio) + " leaves an empty side for " +
                          std::to_string(ds.size()) + " samples");
  }
  Split s;
  s.ratio = ratio;
  s.train.spec = ds.spec;
  s.test.spec = ds.spec;
  s.train.samples.assign(ds.samples.begin(), ds.samples.begin() + static_cast<std::ptrdiff_t>(cut));
  s.test.samples.assign(ds.samples.begin() + static_cast<std::ptrdiff_t>(cut), ds.samples.end());
  return s;
}

void export_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "index,label";
  const std::size_t d = ds.spec.dimension();
  for (std::size_t j = 0; j < d; ++j) out << ",f" << j;
  out << '\n';
  for (const auto& s : ds.samples) {
    out << s.index << ',' << (s.label == Label::spike ? 1 : 0);
    for (double v : s.features) out << ',' << csv::format_double(v);
    out << '\n';
  }
  csv::write_file(path, out.str());
}

LabeledDataset import_dataset(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw ValidationError(path.string() + ": missing header");
  const auto header = csv::split_line(lines.front());
  if (header.size() < 5 || header[0] != "index" || header[1] != "label" || (header.size() - 2) % 2 == 0) {
    throw ValidationError(path.string() + ": expected header index,label,f0..f{2n-2}");
  }
  LabeledDataset ds;
  ds.spec.n = (header.size() - 2 + 1) / 2;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = csv::split_line(lines[r]);
    const std::string where = path.string() + " row " + std::to_string(r + 1);
    if (fields.size() != header.size()) throw ValidationError(where + ": ragged row");
    Sample s;
    const auto idx = csv::parse_int(fields[0], where);
    if (idx < 0) throw ValidationError(where + ": negative index");
    s.index = static_cast<std::size_t>(idx);
    const auto label = parse_label(fields[1]);
    if (!label) throw ValidationError(where + ": unknown label '" + fields[1] + "'");
    s.label = *label;
    for (std::size_t j = 2; j < fields.size(); ++j) s.features.push_back(csv::parse_double(fields[j], where));
    if (!ds.samples.empty() && ds.samples.back().index >= s.index) {
      throw ValidationError(where + ": sample indices must be strictly increasing");
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace edcr_spike::dataset
