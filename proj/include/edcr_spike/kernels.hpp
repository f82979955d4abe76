#pragma once

// Data-parallel inner loops. Each kernel has a serial reference and an OpenMP
// version; both produce identical results (integer reductions, or per-index
// independent floating-point work).

#include <cstddef>
#include <cstdint>
#include <span>

#include "edcr_spike/label.hpp"
#include "edcr_spike/parallel.hpp"

namespace edcr_spike::kernels {

using Column = std::span<const std::uint8_t>;

// For every column j: out_a[j] = #{s : col_j[s] && mask_a[s]}, out_b[j] = #{s : col_j[s] && mask_b[s]}.
// Masks and columns hold 0/1 bytes and share one length.
void masked_counts_serial(std::span<const Column> columns, Column mask_a, Column mask_b,
                          std::span<std::size_t> out_a, std::span<std::size_t> out_b);
void masked_counts_parallel(std::span<const Column> columns, Column mask_a, Column mask_b,
                            std::span<std::size_t> out_a, std::span<std::size_t> out_b);
void masked_counts(std::span<const Column> columns, Column mask_a, Column mask_b,
                   std::span<std::size_t> out_a, std::span<std::size_t> out_b, Exec exec);

// Trailing mean / sample std over values[t-window .. t-1] for t >= window; two-pass per index.
// means/stds must have values.size() entries; entries t < window are left untouched.
void rolling_mean_std_serial(std::span<const double> values, std::size_t window,
                             std::span<double> means, std::span<double> stds);
void rolling_mean_std_parallel(std::span<const double> values, std::size_t window,
                               std::span<double> means, std::span<double> stds);
void rolling_mean_std(std::span<const double> values, std::size_t window, std::span<double> means,
                      std::span<double> stds, Exec exec);

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const Confusion&) const = default;
};

Confusion confusion_serial(std::span<const Label> preds, std::span<const Label> truths, Label positive);
Confusion confusion_parallel(std::span<const Label> preds, std::span<const Label> truths, Label positive);
Confusion confusion(std::span<const Label> preds, std::span<const Label> truths, Label positive, Exec exec);

}  // namespace edcr_spike::kernels
