#include "edcr_spike/market_data.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "edcr_spike/csv.hpp"
#include "edcr_spike/errors.hpp"
#include "edcr_spike/kernels.hpp"

namespace edcr_spike::market {

PriceSeries::PriceSeries(std::string symbol, std::vector<PricePoint> points)
    : symbol_(std::move(symbol)), points_(std::move(points)) {
  if (points_.empty()) throw ValidationError("price series '" + symbol_ + "' is empty");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(std::chrono::sys_days{points_[i - 1].date} < std::chrono::sys_days{points_[i].date})) {
      throw ValidationError("price series '" + symbol_ + "': dates not strictly ascending at position " +
                            std::to_string(i) + " (" + format_date(points_[i].date) + ")");
    }
  }
}

std::vector<double> PriceSeries::opens() const {
  std::vector<double> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.open);
  return out;
}

Date parse_date(std::string_view text) {
  text = csv::trim(text);
  const bool shape = text.size() == 10 && text[4] == '-' && text[7] == '-';
  auto digits = [&](std::size_t b, std::size_t n) {
    for (std::size_t i = b; i < b + n; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
    }
    return true;
  };
  if (!shape || !digits(0, 4) || !digits(5, 2) || !digits(8, 2)) {
    throw ValidationError("malformed date '" + std::string(text) + "' (expected YYYY-MM-DD)");
  }
  const int y = std::stoi(std::string(text.substr(0, 4)));
  const unsigned m = static_cast<unsigned>(std::stoi(std::string(text.substr(5, 2))));
  const unsigned d = static_cast<unsigned>(std::stoi(std::string(text.substr(8, 2))));
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) throw ValidationError("invalid calendar date '" + std::string(text) + "'");
  return date;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

PriceSeries load_price_csv(const std::filesystem::path& path, const std::string& symbol) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw ValidationError(path.string() + ": missing header row");

  const auto header = csv::split_line(lines.front());
  std::array<std::size_t, 4> col{};
  const std::array<std::string_view, 4> names{"date", "open", "high", "low"};
  for (std::size_t k = 0; k < names.size(); ++k) {
    std::size_t found = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
      std::string lower = header[c];
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      if (lower == names[k]) found = c;
    }
    if (found == header.size()) {
      throw ValidationError(path.string() + ": header lacks column '" + std::string(names[k]) + "'");
    }
    col[k] = found;
  }

  std::vector<PricePoint> points;
  points.reserve(lines.size() - 1);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = csv::split_line(lines[r]);
    const std::string where = path.string() + " row " + std::to_string(r + 1);
    if (fields.size() != header.size()) {
      throw ValidationError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    try {
      points.push_back({parse_date(fields[col[0]]), csv::parse_double(fields[col[1]], "open"),
                        csv::parse_double(fields[col[2]], "high"), csv::parse_double(fields[col[3]], "low")});
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  if (points.empty()) throw ValidationError(path.string() + ": no data rows");

  std::stable_sort(points.begin(), points.end(), [](const PricePoint& a, const PricePoint& b) {
    return std::chrono::sys_days{a.date} < std::chrono::sys_days{b.date};
  });
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i - 1].date == points[i].date) {
      throw ValidationError(path.string() + ": duplicate date " + format_date(points[i].date));
    }
  }
  return PriceSeries(symbol, std::move(points));
}

void write_price_csv(const PriceSeries& series, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "date,open,high,low\n";
  for (const auto& p : series.points()) {
    out << format_date(p.date) << ',' << csv::format_double(p.open) << ',' << csv::format_double(p.high) << ','
        << csv::format_double(p.low) << '\n';
  }
  csv::write_file(path, out.str());
}

PriceSeries generate_synthetic(const SyntheticSpec& spec) {
  if (spec.length == 0) throw ValidationError("synthetic series length must be >= 1");
  if (!(spec.start > 0.0)) throw ValidationError("synthetic start price must be positive");
  for (const auto& j : spec.jumps) {
    if (j.index >= spec.length) {
      throw ValidationError("jump index " + std::to_string(j.index) + " outside series of length " +
                            std::to_string(spec.length));
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> opens(spec.length);
  opens[0] = spec.start;
  const double step_drift = spec.drift - 0.5 * spec.vol * spec.vol;
  for (std::size_t t = 1; t < spec.length; ++t) {
    opens[t] = opens[t - 1] * std::exp(step_drift + spec.vol * gauss(rng));
  }

  auto jumps = spec.jumps;
  std::stable_sort(jumps.begin(), jumps.end(), [](const Jump& a, const Jump& b) { return a.index < b.index; });
  for (const auto& j : jumps) {
    const std::size_t t = j.index;
    const std::size_t w = std::min(spec.jump_reference_window, t);
    double sigma = 0.0;
    double mean = opens[t];
    if (w >= 2) {
      double sum = 0.0;
      for (std::size_t i = t - w; i < t; ++i) sum += opens[i];
      mean = sum / static_cast<double>(w);
      double ss = 0.0;
      for (std::size_t i = t - w; i < t; ++i) ss += (opens[i] - mean) * (opens[i] - mean);
      sigma = std::sqrt(ss / static_cast<double>(w - 1));
    }
    if (!(sigma > 0.0)) sigma = std::max(spec.vol, 0.01) * opens[t];
    const double up = opens[t] >= mean ? 1.0 : -1.0;
    // Anchor the bump at the trailing mean so the deviation is at least `sigmas` stds.
    double bumped = mean + up * (std::abs(opens[t] - mean) + j.sigmas * sigma);
    if (!(bumped > 0.0)) bumped = mean + std::abs(opens[t] - mean) + j.sigmas * sigma;
    opens[t] = bumped;
  }

  std::vector<PricePoint> points(spec.length);
  const std::chrono::sys_days origin{std::chrono::year{2020} / 1 / 1};
  for (std::size_t t = 0; t < spec.length; ++t) {
    points[t] = {Date{origin + std::chrono::days{static_cast<long>(t)}}, opens[t], opens[t] * (1.0 + spec.band),
                 opens[t] * (1.0 - spec.band)};
  }
  return PriceSeries(spec.symbol, std::move(points));
}

RollingStats rolling_stats(std::span<const double> opens, std::size_t window, Exec exec) {
  if (window < 2) throw ValidationError("rolling window must be >= 2");
  if (opens.size() <= window) {
    throw ValidationError("series of length " + std::to_string(opens.size()) + " too short for window " +
                          std::to_string(window));
  }
  std::vector<double> means(opens.size(), 0.0);
  std::vector<double> stds(opens.size(), 0.0);
  kernels::rolling_mean_std(opens, window, means, stds, exec);

  RollingStats out;
  out.window = window;
  out.means.resize(opens.size());
  out.stds.resize(opens.size());
  for (std::size_t t = window; t < opens.size(); ++t) {
    out.means[t] = means[t];
    out.stds[t] = stds[t];
  }
  return out;
}

RollingStats rolling_stats(const PriceSeries& series, std::size_t window, Exec exec) {
  const auto opens = series.opens();
  return rolling_stats(opens, window, exec);
}

LabelSeries label_spikes(const PriceSeries& series, std::size_t window, double k, Exec exec) {
  const auto opens = series.opens();
  const auto stats = rolling_stats(opens, window, exec);
  LabelSeries out;
  out.window = window;
  out.k = k;
  out.labels.resize(opens.size());
  for (std::size_t t = window; t < opens.size(); ++t) {
    const double dev = std::abs(opens[t] - *stats.means[t]);
    out.labels[t] = dev > k * *stats.stds[t] ? Label::spike : Label::no;
  }
  return out;
}

}  // namespace edcr_spike::market
