#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "edcr_spike/label.hpp"
#include "edcr_spike/parallel.hpp"

namespace edcr_spike::market {

using Date = std::chrono::year_month_day;

// One trading day. high >= open >= low is not enforced; raw data is kept as-is.
struct PricePoint {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;

  bool operator==(const PricePoint&) const = default;
};

// Daily prices of one commodity, strictly ascending by date, never empty.
class PriceSeries {
 public:
  // Throws ValidationError on an empty list or non-ascending / duplicate dates.
  PriceSeries(std::string symbol, std::vector<PricePoint> points);

  const std::string& symbol() const { return symbol_; }
  const std::vector<PricePoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  std::vector<double> opens() const;

  bool operator==(const PriceSeries&) const = default;

 private:
  std::string symbol_;
  std::vector<PricePoint> points_;
};

// Trailing statistics: entry t covers opens[t-window .. t-1]; undefined for t < window.
struct RollingStats {
  std::size_t window = 20;
  std::vector<std::optional<double>> means;
  std::vector<std::optional<double>> stds;  // sample std, divisor window-1
};

struct LabelSeries {
  std::vector<std::optional<Label>> labels;  // nullopt: not enough history
  std::size_t window = 20;
  double k = 2.0;
};

Date parse_date(std::string_view text);
std::string format_date(const Date& d);

// Reads a `date,open,high,low` CSV (column order taken from the header) and
// sorts rows ascending. Throws ValidationError naming the offending row.
PriceSeries load_price_csv(const std::filesystem::path& path, const std::string& symbol);

void write_price_csv(const PriceSeries& series, const std::filesystem::path& path);

struct Jump {
  std::size_t index = 0;
  double sigmas = 0.0;
};

// Geometric random walk on the open price with one-day additive bumps.
struct SyntheticSpec {
  std::uint64_t seed = 7;
  std::size_t length = 1000;
  double start = 100.0;
  double drift = 0.0;   // per-day log drift
  double vol = 0.01;    // per-day log volatility
  std::vector<Jump> jumps;
  // A jump of `sigmas` moves the open that many trailing sample stds (over
  // this many prior opens) away from the trailing mean.
  std::size_t jump_reference_window = 20;
  double band = 0.005;  // high/low = open * (1 +/- band)
  std::string symbol = "SYNTH";
};

PriceSeries generate_synthetic(const SyntheticSpec& spec);

RollingStats rolling_stats(const PriceSeries& series, std::size_t window, Exec exec = Exec::parallel);
RollingStats rolling_stats(std::span<const double> opens, std::size_t window, Exec exec = Exec::parallel);

// spike iff |open[t] - mean[t]| > k * std[t] (strict).
LabelSeries label_spikes(const PriceSeries& series, std::size_t window, double k,
                         Exec exec = Exec::parallel);

}  // namespace edcr_spike::market
