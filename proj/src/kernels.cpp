#include "edcr_spike/kernels.hpp"

#include <cassert>
#include <cmath>

namespace edcr_spike::kernels {

namespace {

inline void count_column(Column col, Column mask_a, Column mask_b, std::size_t& a, std::size_t& b) {
  std::size_t ca = 0;
  std::size_t cb = 0;
  const std::size_t n = col.size();
  const std::uint8_t* c = col.data();
  const std::uint8_t* ma = mask_a.data();
  const std::uint8_t* mb = mask_b.data();
#pragma omp simd reduction(+ : ca, cb)
  for (std::size_t s = 0; s < n; ++s) {
    ca += static_cast<std::size_t>(c[s] & ma[s]);
    cb += static_cast<std::size_t>(c[s] & mb[s]);
  }
  a = ca;
  b = cb;
}

inline void window_stats(const double* values, std::size_t t, std::size_t window, double& mean, double& sd) {
  const double* w = values + (t - window);
  double sum = 0.0;
  for (std::size_t j = 0; j < window; ++j) sum += w[j];
  const double m = sum / static_cast<double>(window);
  double ss = 0.0;
  for (std::size_t j = 0; j < window; ++j) {
    const double d = w[j] - m;
    ss += d * d;
  }
  mean = m;
  sd = std::sqrt(ss / static_cast<double>(window - 1));
}

inline bool hit(Label l, Label positive) { return l == positive; }

}  // namespace

void masked_counts_serial(std::span<const Column> columns, Column mask_a, Column mask_b,
                          std::span<std::size_t> out_a, std::span<std::size_t> out_b) {
  assert(out_a.size() == columns.size() && out_b.size() == columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    std::size_t a = 0;
    std::size_t b = 0;
    for (std::size_t s = 0; s < columns[j].size(); ++s) {
      if (columns[j][s] != 0 && mask_a[s] != 0) ++a;
      if (columns[j][s] != 0 && mask_b[s] != 0) ++b;
    }
    out_a[j] = a;
    out_b[j] = b;
  }
}

void masked_counts_parallel(std::span<const Column> columns, Column mask_a, Column mask_b,
                            std::span<std::size_t> out_a, std::span<std::size_t> out_b) {
  assert(out_a.size() == columns.size() && out_b.size() == columns.size());
  const auto n = static_cast<std::ptrdiff_t>(columns.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    count_column(columns[j], mask_a, mask_b, out_a[j], out_b[j]);
  }
}

void masked_counts(std::span<const Column> columns, Column mask_a, Column mask_b, std::span<std::size_t> out_a,
                   std::span<std::size_t> out_b, Exec exec) {
  if (exec == Exec::serial) {
    masked_counts_serial(columns, mask_a, mask_b, out_a, out_b);
  } else {
    masked_counts_parallel(columns, mask_a, mask_b, out_a, out_b);
  }
}

void rolling_mean_std_serial(std::span<const double> values, std::size_t window, std::span<double> means,
                             std::span<double> stds) {
  for (std::size_t t = window; t < values.size(); ++t) {
    window_stats(values.data(), t, window, means[t], stds[t]);
  }
}

void rolling_mean_std_parallel(std::span<const double> values, std::size_t window, std::span<double> means,
                               std::span<double> stds) {
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  const auto w = static_cast<std::ptrdiff_t>(window);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = w; t < n; ++t) {
    window_stats(values.data(), static_cast<std::size_t>(t), window, means[t], stds[t]);
  }
}

void rolling_mean_std(std::span<const double> values, std::size_t window, std::span<double> means,
                      std::span<double> stds, Exec exec) {
  if (exec == Exec::serial) {
    rolling_mean_std_serial(values, window, means, stds);
  } else {
    rolling_mean_std_parallel(values, window, means, stds);
  }
}

Confusion confusion_serial(std::span<const Label> preds, std::span<const Label> truths, Label positive) {
  Confusion c;
  for (std::size_t s = 0; s < preds.size(); ++s) {
    const bool p = hit(preds[s], positive);
    const bool t = hit(truths[s], positive);
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Confusion confusion_parallel(std::span<const Label> preds, std::span<const Label> truths, Label positive) {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  const auto n = static_cast<std::ptrdiff_t>(preds.size());
#pragma omp parallel for schedule(static) reduction(+ : tp, fp, fn)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    const bool p = hit(preds[s], positive);
    const bool t = hit(truths[s], positive);
    tp += static_cast<std::size_t>(p && t);
    fp += static_cast<std::size_t>(p && !t);
    fn += static_cast<std::size_t>(!p && t);
  }
  return {tp, fp, fn, preds.size() - tp - fp - fn};
}

Confusion confusion(std::span<const Label> preds, std::span<const Label> truths, Label positive, Exec exec) {
  return exec == Exec::serial ? confusion_serial(preds, truths, positive)
                              : confusion_parallel(preds, truths, positive);
}

}  // namespace edcr_spike::kernels
