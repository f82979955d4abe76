#pragma once

// Error detection and correction rules (EDCR) for a binary spike classifier.
//
// A primary model's predictions are corrected using the predictions of other
// models as conditions: cond_M(w) holds iff model M predicted spike on w.
// Both learned rules only ever flip a primary `no` to `spike`:
//
//   corr_spike(w) <- pred_no(w) AND OR_{c in DC} cond_c(w)         (detection)
//   corr_spike(w) <- OR_{(c,no) in CC} (pred_no(w) AND cond_c(w))  (correction)

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edcr_spike/label.hpp"
#include "edcr_spike/model_pool.hpp"
#include "edcr_spike/parallel.hpp"

namespace edcr_spike::edcr {

using ConditionId = std::uint32_t;

struct Condition {
  ConditionId id = 0;
  std::string model_name;
};

// Condition columns over one set of samples. Ids follow ascending model name,
// so they do not depend on the in-memory model order of the source matrix.
class ConditionTable {
 public:
  ConditionTable() = default;
  // Every model of `m` except `exclude` becomes a condition.
  explicit ConditionTable(const pool::PredictionMatrix& m, std::string_view exclude = {});

  std::span<const Condition> conditions() const { return conditions_; }
  std::vector<ConditionId> ids() const;
  std::size_t size() const { return conditions_.size(); }
  std::size_t n_samples() const { return samples_.size(); }
  const std::vector<std::size_t>& samples() const { return samples_; }

  // Throws ValidationError for an unknown id / name.
  std::span<const std::uint8_t> column(ConditionId id) const;
  const std::string& name(ConditionId id) const;
  ConditionId id_of(std::string_view name) const;
  std::optional<ConditionId> find(std::string_view name) const;

 private:
  std::vector<Condition> conditions_;
  std::vector<std::size_t> samples_;
  std::vector<std::vector<std::uint8_t>> columns_;
};

// Everything the learners read: primary predictions, ground truth and condition columns.
struct RuleData {
  LabelVec base;
  LabelVec truth;
  ConditionTable table;

  // Splits `m` into the primary row and the remaining conditions. Throws on an
  // unknown primary or a truth vector that does not match the sample count.
  static RuleData from_matrix(const pool::PredictionMatrix& m, std::string_view primary, LabelVec truth);
};

struct ClassStats {
  Label cls = Label::no;
  std::size_t n_predicted = 0;   // N_i
  std::size_t true_positives = 0;
  std::size_t ground_truth = 0;  // equals N_i * P_i / R_i
  double precision = 0.0;        // P_i, 0 when N_i = 0
  double recall = 0.0;           // R_i

  bool operator==(const ClassStats&) const = default;
};

// Throws ValidationError when `cls` never occurs in `truths` (recall undefined).
ClassStats class_stats(std::span<const Label> base, std::span<const Label> truths, Label cls);

// TP/N for class `cls`, 0 when the class is never predicted.
double class_precision(std::span<const Label> base, std::span<const Label> truths, Label cls);

struct DetectionCounts {
  std::size_t pos = 0;
  std::size_t neg = 0;
  std::size_t bod = 0;

  bool operator==(const DetectionCounts&) const = default;
};

// Over samples predicted `cls`: POS = covered errors, NEG = covered correct predictions.
DetectionCounts det_counters(std::span<const ConditionId> dc, const RuleData& data, Label cls);

// Greedy selection under NEG_DC <= epsilon * N*P/R. Returns conditions in the
// order they were added; ties go to the lowest id.
std::vector<ConditionId> det_rule_learn(Label cls, double epsilon, std::span<const ConditionId> candidates,
                                        const RuleData& data, Exec exec = Exec::parallel);

struct ConditionClassPair {
  ConditionId condition = 0;
  Label prior = Label::no;

  auto operator<=>(const ConditionClassPair&) const = default;
};

struct CorrectionCounts {
  std::size_t pos = 0;
  std::size_t bod = 0;

  double ratio() const { return bod == 0 ? 0.0 : static_cast<double>(pos) / static_cast<double>(bod); }
  bool operator==(const CorrectionCounts&) const = default;
};

// Body: samples where some pair (c, j) has c firing and base prediction j. POS counts body samples of class `target`.
CorrectionCounts corr_counters(std::span<const ConditionClassPair> cc, const RuleData& data, Label target);

// Ratio-sorted marginal selection of condition-class pairs. Returns pairs in
// acceptance order, or nothing when the final precision does not beat P_target.
std::vector<ConditionClassPair> corr_rule_learn(Label target, std::span<const ConditionClassPair> all,
                                                const RuleData& data, Exec exec = Exec::parallel);

// F1 of a condition read as a standalone spike classifier; 0 when P + R = 0.
double condition_f1(ConditionId c, const RuleData& data);

// The k highest-F1 conditions, ties by ascending id, returned in ascending id order.
std::vector<ConditionId> top_f1_filter(std::span<const ConditionId> candidates, std::size_t k,
                                       const RuleData& data, Exec exec = Exec::parallel);

struct CorrectionStats {
  std::size_t n_predicted = 0;
  double precision = 0.0;

  bool operator==(const CorrectionStats&) const = default;
};

struct RuleSet {
  Label target_class = Label::spike;
  std::string primary_model;
  double epsilon = 0.1;
  std::optional<std::size_t> top_k;  // nullopt: no filtering
  std::vector<std::string> detection;  // DC, in selection order
  std::vector<std::pair<std::string, Label>> correction;  // CC, in acceptance order
  ClassStats stats;  // primary's stats on the detection class (no)
  CorrectionStats correction_stats;  // primary's N/P on the target class

  bool empty() const { return detection.empty() && correction.empty(); }
  bool operator==(const RuleSet&) const = default;
};

struct LearnOptions {
  double epsilon = 0.1;
  std::optional<std::size_t> top_k = 200;
  Exec exec = Exec::parallel;
};

RuleSet mpsc_rule_learn(std::span<const ConditionId> candidates, const RuleData& data,
                        std::string primary_model, const LearnOptions& opts);

struct Explanation {
  std::size_t sample_index = 0;
  Label base = Label::no;
  Label corrected = Label::no;
  bool flipped = false;
  std::vector<std::string> detection_fired;
  std::vector<std::string> correction_fired;

  bool operator==(const Explanation&) const = default;
};

enum class RuleScope { all, detection_only };

struct Application {
  LabelVec corrected;
  std::vector<Explanation> explanations;  // one per sample
};

// Flips base `no` predictions to spike when a DC condition or a CC pair fires.
// Conditions are resolved by name in `table`; unknown names throw ValidationError.
Application apply_rules(const RuleSet& rs, std::span<const Label> base, const ConditionTable& table,
                        RuleScope scope = RuleScope::all);

std::string rule_line(std::string_view condition_name);

// Header line followed by one line per learned condition.
std::string render_rules(const RuleSet& rs);

std::string render_explanation(const Explanation& e);

}  // namespace edcr_spike::edcr
