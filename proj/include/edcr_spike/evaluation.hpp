#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edcr_spike/edcr.hpp"
#include "edcr_spike/kernels.hpp"
#include "edcr_spike/label.hpp"

namespace edcr_spike::eval {

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  kernels::Confusion counts;

  bool operator==(const Metrics&) const = default;
};

// Precision is 0 without positive predictions, recall 0 without positive
// truths, F1 is 0 when P + R = 0. Throws ValidationError on length mismatch or empty input.
Metrics prf1(std::span<const Label> preds, std::span<const Label> truths, Label positive = Label::spike,
             Exec exec = Exec::parallel);

// (after - before) / before * 100 on unrounded values; nullopt when before == 0.
std::optional<double> percent_delta(double before, double after);

// "(+29.41%)", "(-2.15%)", "(0.0%)" for an exact zero, "(n/a)" when undefined.
std::string render_delta(std::optional<double> pct);

struct RuleFiring {
  std::string rule;  // "DC" or "CC"
  std::string condition;
  std::size_t count = 0;

  bool operator==(const RuleFiring&) const = default;
};

struct EvalRow {
  std::string variant;
  std::string family;
  Metrics base;
  Metrics corrected;
  std::size_t flips = 0;
  std::vector<RuleFiring> firings;  // sorted by rule, then condition name

  std::optional<double> delta_precision() const { return percent_delta(base.precision, corrected.precision); }
  std::optional<double> delta_recall() const { return percent_delta(base.recall, corrected.recall); }
  std::optional<double> delta_f1() const { return percent_delta(base.f1, corrected.f1); }
};

struct Provenance {
  std::string dataset;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double split_ratio = 0.6;
  double epsilon = 0.1;
  std::optional<std::size_t> top_k;
  std::uint64_t seed = 0;
};

struct EvalReport {
  Provenance provenance;
  std::vector<EvalRow> rows;
};

// Base vs corrected spike-class metrics for one primary model. Firing counts
// come from `explanations` when given.
EvalRow evaluate(std::string variant, std::span<const Label> base, std::span<const Label> corrected,
                 std::span<const Label> truths, std::span<const edcr::Explanation> explanations = {});

// ---- ablation ---------------------------------------------------------------

// A member matches a model when it equals the model name or its family prefix.
struct Family {
  std::string label;
  std::vector<std::string> members;
};

bool family_matches(const Family& f, std::string_view model_name);

// One family per distinct name prefix, sorted.
std::vector<Family> default_families(std::span<const std::string> model_names);

struct AblationRow {
  std::string family;
  std::size_t removed = 0;
  std::string warning;
  std::vector<std::string> detection;
  std::size_t correction_size = 0;
  Metrics train;
  Metrics test;
  Metrics train_detection_only;
  Metrics test_detection_only;

  bool operator==(const AblationRow&) const = default;
};

struct AblationReport {
  std::string primary;
  Metrics base_train;
  Metrics base_test;
  AblationRow full;  // every condition available
  std::vector<AblationRow> rows;
};

// Removes each family's conditions from C, re-learns and re-evaluates. The
// full-pool run is computed once.
AblationReport ablate(std::span<const Family> families, const edcr::LearnOptions& opts, const edcr::RuleData& train,
                      const edcr::RuleData& test, const std::string& primary);

// ---- rendering --------------------------------------------------------------

std::string report_csv(const EvalReport& r);
std::string report_markdown(const EvalReport& r);
// Writes <stem>.csv and <stem>.md under `dir`; returns the paths.
std::vector<std::filesystem::path> emit_report(const EvalReport& r, const std::filesystem::path& dir,
                                               const std::string& stem = "report");

std::string ablation_csv(const AblationReport& r);
std::string ablation_markdown(const AblationReport& r);
std::vector<std::filesystem::path> emit_ablation(const AblationReport& r, const std::filesystem::path& dir,
                                                 const std::string& stem);

// Grouped precision/recall bars, one group per ablated family; empty string when there are no rows.
std::string ablation_svg(const AblationReport& r);
// One SVG per report with at least one family; returns the files written.
std::vector<std::filesystem::path> emit_plots(std::span<const AblationReport> reports,
                                              const std::filesystem::path& dir);

// Filesystem-safe form of a model name.
std::string file_stem(std::string_view model_name);

}  // namespace edcr_spike::eval
