#include "edcr_spike/edcr.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "edcr_spike/csv.hpp"
#include "edcr_spike/errors.hpp"
#include "edcr_spike/kernels.hpp"

namespace edcr_spike::edcr {

namespace {

using Mask = std::vector<std::uint8_t>;

double ratio(std::size_t pos, std::size_t bod) {
  return bod == 0 ? 0.0 : static_cast<double>(pos) / static_cast<double>(bod);
}

double f1_from_counts(std::size_t tp, std::size_t predicted, std::size_t actual) {
  const double p = ratio(tp, predicted);
  const double r = ratio(tp, actual);
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

void check_aligned(const RuleData& data) {
  if (data.base.size() != data.truth.size() || data.base.size() != data.table.n_samples()) {
    throw ValidationError("rule data misaligned: " + std::to_string(data.base.size()) + " base predictions, " +
                          std::to_string(data.truth.size()) + " truths, " +
                          std::to_string(data.table.n_samples()) + " condition samples");
  }
}

std::vector<ConditionId> unique_sorted(std::span<const ConditionId> ids) {
  std::vector<ConditionId> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

// ---- ConditionTable ---------------------------------------------------------

ConditionTable::ConditionTable(const pool::PredictionMatrix& m, std::string_view exclude) : samples_(m.samples()) {
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < m.n_models(); ++k) {
    if (m.models()[k] != exclude) order.push_back(k);
  }
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return m.models()[a] < m.models()[b]; });
  for (std::size_t k = 0; k < order.size(); ++k) {
    conditions_.push_back({static_cast<ConditionId>(k), m.models()[order[k]]});
    const auto row = m.row(order[k]);
    std::vector<std::uint8_t> col(row.size());
    for (std::size_t s = 0; s < row.size(); ++s) col[s] = row[s] == Label::spike ? 1 : 0;
    columns_.push_back(std::move(col));
  }
}

std::vector<ConditionId> ConditionTable::ids() const {
  std::vector<ConditionId> out(conditions_.size());
  std::iota(out.begin(), out.end(), ConditionId{0});
  return out;
}

std::span<const std::uint8_t> ConditionTable::column(ConditionId id) const {
  if (id >= columns_.size()) throw ValidationError("unknown condition id " + std::to_string(id));
  return columns_[id];
}

const std::string& ConditionTable::name(ConditionId id) const {
  if (id >= conditions_.size()) throw ValidationError("unknown condition id " + std::to_string(id));
  return conditions_[id].model_name;
}

std::optional<ConditionId> ConditionTable::find(std::string_view name) const {
  const auto it = std::lower_bound(conditions_.begin(), conditions_.end(), name,
                                   [](const Condition& c, std::string_view n) { return c.model_name < n; });
  if (it == conditions_.end() || it->model_name != name) return std::nullopt;
  return it->id;
}

ConditionId ConditionTable::id_of(std::string_view name) const {
  const auto id = find(name);
  if (!id) throw ValidationError("unknown condition '" + std::string(name) + "'");
  return *id;
}

RuleData RuleData::from_matrix(const pool::PredictionMatrix& m, std::string_view primary, LabelVec truth) {
  const auto row = m.row(primary);
  if (truth.size() != row.size()) {
    throw ValidationError("truth has " + std::to_string(truth.size()) + " labels for " +
                          std::to_string(row.size()) + " samples");
  }
  return RuleData{LabelVec(row.begin(), row.end()), std::move(truth), ConditionTable(m, primary)};
}

// ---- statistics -------------------------------------------------------------

ClassStats class_stats(std::span<const Label> base, std::span<const Label> truths, Label cls) {
  if (base.size() != truths.size() || base.empty()) {
    throw ValidationError("class_stats needs equal-length, non-empty prediction and truth vectors");
  }
  ClassStats st;
  st.cls = cls;
  for (std::size_t s = 0; s < base.size(); ++s) {
    const bool p = base[s] == cls;
    const bool t = truths[s] == cls;
    st.n_predicted += p;
    st.ground_truth += t;
    st.true_positives += p && t;
  }
  if (st.ground_truth == 0) {
    throw ValidationError("recall undefined: class '" + std::string(to_string(cls)) + "' never occurs in the truth");
  }
  st.precision = ratio(st.true_positives, st.n_predicted);
  st.recall = ratio(st.true_positives, st.ground_truth);
  return st;
}

double class_precision(std::span<const Label> base, std::span<const Label> truths, Label cls) {
  if (base.size() != truths.size()) throw ValidationError("prediction/truth length mismatch");
  std::size_t n = 0;
  std::size_t tp = 0;
  for (std::size_t s = 0; s < base.size(); ++s) {
    n += base[s] == cls;
    tp += base[s] == cls && truths[s] == cls;
  }
  return ratio(tp, n);
}

// ---- detection --------------------------------------------------------------

DetectionCounts det_counters(std::span<const ConditionId> dc, const RuleData& data, Label cls) {
  check_aligned(data);
  std::vector<std::span<const std::uint8_t>> cols;
  for (auto id : dc) cols.push_back(data.table.column(id));
  DetectionCounts out;
  for (std::size_t s = 0; s < data.base.size(); ++s) {
    if (data.base[s] != cls) continue;
    const bool fires = std::any_of(cols.begin(), cols.end(), [s](const auto& c) { return c[s] != 0; });
    if (!fires) continue;
    ++out.bod;
    if (data.truth[s] != cls) ++out.pos;
    else ++out.neg;
  }
  return out;
}

std::vector<ConditionId> det_rule_learn(Label cls, double epsilon, std::span<const ConditionId> candidates,
                                        const RuleData& data, Exec exec) {
  if (!(epsilon >= 0.0)) throw ValidationError("epsilon must be >= 0");
  check_aligned(data);
  auto remaining = unique_sorted(candidates);
  for (auto id : remaining) (void)data.table.column(id);
  if (remaining.empty()) return {};

  const auto stats = class_stats(data.base, data.truth, cls);
  // N*P/R is the ground-truth count of the class.
  const double budget = epsilon * static_cast<double>(stats.ground_truth);

  const std::size_t n = data.base.size();
  Mask live_err(n);
  Mask live_ok(n);
  for (std::size_t s = 0; s < n; ++s) {
    live_err[s] = data.base[s] == cls && data.truth[s] != cls;
    live_ok[s] = data.base[s] == cls && data.truth[s] == cls;
  }

  std::vector<ConditionId> selected;
  std::size_t neg = 0;
  std::vector<kernels::Column> cols;
  std::vector<std::size_t> gain_pos;
  std::vector<std::size_t> gain_neg;
  while (!remaining.empty()) {
    cols.clear();
    for (auto id : remaining) cols.push_back(data.table.column(id));
    gain_pos.assign(remaining.size(), 0);
    gain_neg.assign(remaining.size(), 0);
    // Gains over samples the current disjunction does not cover yet.
    kernels::masked_counts(cols, live_err, live_ok, gain_pos, gain_neg, exec);

    std::ptrdiff_t best = -1;
    for (std::size_t j = 0; j < remaining.size(); ++j) {
      if (static_cast<double>(neg + gain_neg[j]) > budget) continue;
      if (best < 0 || gain_pos[j] > gain_pos[static_cast<std::size_t>(best)]) best = static_cast<std::ptrdiff_t>(j);
    }
    if (best < 0) break;

    const auto b = static_cast<std::size_t>(best);
    neg += gain_neg[b];
    const auto col = cols[b];
    for (std::size_t s = 0; s < n; ++s) {
      const std::uint8_t keep = col[s] ^ 1U;
      live_err[s] &= keep;
      live_ok[s] &= keep;
    }
    selected.push_back(remaining[b]);
    remaining.erase(remaining.begin() + best);
  }
  return selected;
}

// ---- correction -------------------------------------------------------------

CorrectionCounts corr_counters(std::span<const ConditionClassPair> cc, const RuleData& data, Label target) {
  check_aligned(data);
  std::vector<std::pair<std::span<const std::uint8_t>, Label>> body;
  for (const auto& p : cc) body.emplace_back(data.table.column(p.condition), p.prior);
  CorrectionCounts out;
  for (std::size_t s = 0; s < data.base.size(); ++s) {
    const bool in = std::any_of(body.begin(), body.end(),
                                [&](const auto& b) { return b.first[s] != 0 && data.base[s] == b.second; });
    if (!in) continue;
    ++out.bod;
    if (data.truth[s] == target) ++out.pos;
  }
  return out;
}

std::vector<ConditionClassPair> corr_rule_learn(Label target, std::span<const ConditionClassPair> all,
                                                const RuleData& data, Exec exec) {
  check_aligned(data);
  std::vector<ConditionClassPair> pairs(all.begin(), all.end());
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  for (const auto& p : pairs) (void)data.table.column(p.condition);
  if (pairs.empty()) return {};

  const double p_target = class_precision(data.base, data.truth, target);
  const std::size_t n = data.base.size();

  // Single-pair POS/BOD, grouped by prior class so each group is one kernel call.
  std::vector<CorrectionCounts> single(pairs.size());
  for (Label prior : {Label::no, Label::spike}) {
    std::vector<std::size_t> members;
    std::vector<kernels::Column> cols;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (pairs[k].prior != prior) continue;
      members.push_back(k);
      cols.push_back(data.table.column(pairs[k].condition));
    }
    if (members.empty()) continue;
    Mask pos_mask(n);
    Mask bod_mask(n);
    for (std::size_t s = 0; s < n; ++s) {
      bod_mask[s] = data.base[s] == prior;
      pos_mask[s] = bod_mask[s] && data.truth[s] == target;
    }
    std::vector<std::size_t> pos(members.size());
    std::vector<std::size_t> bod(members.size());
    kernels::masked_counts(cols, pos_mask, bod_mask, pos, bod, exec);
    for (std::size_t m = 0; m < members.size(); ++m) single[members[m]] = {pos[m], bod[m]};
  }

  auto in_body = [&](const ConditionClassPair& p, std::size_t s) {
    return data.table.column(p.condition)[s] != 0 && data.base[s] == p.prior;
  };

  // CC' starts as every pair; cover[s] counts the CC' pairs whose body holds s.
  std::vector<std::uint32_t> cover(n, 0);
  for (const auto& p : pairs) {
    const auto col = data.table.column(p.condition);
    for (std::size_t s = 0; s < n; ++s) cover[s] += col[s] != 0 && data.base[s] == p.prior;
  }
  std::size_t pos_prime = 0;
  std::size_t bod_prime = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (cover[s] == 0) continue;
    ++bod_prime;
    pos_prime += data.truth[s] == target;
  }

  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (single[k].ratio() > p_target) order.push_back(k);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return single[a].ratio() > single[b].ratio(); });

  std::vector<ConditionClassPair> cc;
  Mask covered(n, 0);
  std::size_t pos_cc = 0;
  std::size_t bod_cc = 0;
  for (auto k : order) {
    const auto& p = pairs[k];
    std::size_t add_pos = 0;
    std::size_t add_bod = 0;
    std::size_t lose_pos = 0;
    std::size_t lose_bod = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (!in_body(p, s)) continue;
      const bool hit = data.truth[s] == target;
      if (!covered[s]) {
        ++add_bod;
        add_pos += hit;
      }
      if (cover[s] == 1) {
        ++lose_bod;
        lose_pos += hit;
      }
    }
    const double a = ratio(pos_cc + add_pos, bod_cc + add_bod) - ratio(pos_cc, bod_cc);
    const double b = ratio(pos_prime - lose_pos, bod_prime - lose_bod) - ratio(pos_prime, bod_prime);
    if (a >= b) {
      cc.push_back(p);
      pos_cc += add_pos;
      bod_cc += add_bod;
      for (std::size_t s = 0; s < n; ++s) covered[s] |= static_cast<std::uint8_t>(in_body(p, s));
    } else {
      pos_prime -= lose_pos;
      bod_prime -= lose_bod;
      for (std::size_t s = 0; s < n; ++s) cover[s] -= static_cast<std::uint32_t>(in_body(p, s));
    }
  }

  if (ratio(pos_cc, bod_cc) <= p_target) cc.clear();
  return cc;
}

// ---- filtering --------------------------------------------------------------

double condition_f1(ConditionId c, const RuleData& data) {
  check_aligned(data);
  const auto col = data.table.column(c);
  std::size_t tp = 0;
  std::size_t predicted = 0;
  std::size_t actual = 0;
  for (std::size_t s = 0; s < col.size(); ++s) {
    const bool t = data.truth[s] == Label::spike;
    predicted += col[s];
    actual += t;
    tp += col[s] != 0 && t;
  }
  return f1_from_counts(tp, predicted, actual);
}

std::vector<ConditionId> top_f1_filter(std::span<const ConditionId> candidates, std::size_t k, const RuleData& data,
                                       Exec exec) {
  if (k == 0) throw ValidationError("top-F1 filter needs k >= 1");
  check_aligned(data);
  std::vector<ConditionId> ids(candidates.begin(), candidates.end());
  if (k >= ids.size()) return ids;

  const std::size_t n = data.truth.size();
  Mask truth_mask(n);
  Mask ones(n, 1);
  std::size_t actual = 0;
  for (std::size_t s = 0; s < n; ++s) {
    truth_mask[s] = data.truth[s] == Label::spike;
    actual += truth_mask[s];
  }
  std::vector<kernels::Column> cols;
  for (auto id : ids) cols.push_back(data.table.column(id));
  std::vector<std::size_t> tp(ids.size());
  std::vector<std::size_t> predicted(ids.size());
  kernels::masked_counts(cols, truth_mask, ones, tp, predicted, exec);

  std::vector<double> f1(ids.size());
  for (std::size_t j = 0; j < ids.size(); ++j) f1[j] = f1_from_counts(tp[j], predicted[j], actual);
  std::vector<std::size_t> rank(ids.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::sort(rank.begin(), rank.end(), [&](auto a, auto b) {
    if (f1[a] != f1[b]) return f1[a] > f1[b];
    return ids[a] < ids[b];
  });
  std::vector<std::uint8_t> keep(ids.size(), 0);
  for (std::size_t r = 0; r < k; ++r) keep[rank[r]] = 1;
  std::vector<ConditionId> out;
  out.reserve(k);
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (keep[j]) out.push_back(ids[j]);
  }
  return out;
}

// ---- MPSC pipeline ----------------------------------------------------------

RuleSet mpsc_rule_learn(std::span<const ConditionId> candidates, const RuleData& data, std::string primary_model,
                        const LearnOptions& opts) {
  check_aligned(data);
  RuleSet rs;
  rs.target_class = Label::spike;
  rs.primary_model = std::move(primary_model);
  rs.epsilon = opts.epsilon;
  rs.top_k = opts.top_k;
  rs.stats = class_stats(data.base, data.truth, Label::no);
  for (Label b : data.base) rs.correction_stats.n_predicted += b == Label::spike;
  rs.correction_stats.precision = class_precision(data.base, data.truth, Label::spike);

  const std::vector<ConditionId> filtered =
      opts.top_k ? top_f1_filter(candidates, *opts.top_k, data, opts.exec)
                 : std::vector<ConditionId>(candidates.begin(), candidates.end());
  std::vector<ConditionClassPair> cc_all;
  cc_all.reserve(filtered.size());
  for (auto c : filtered) cc_all.push_back({c, Label::no});

  for (auto c : det_rule_learn(Label::no, opts.epsilon, filtered, data, opts.exec)) {
    rs.detection.push_back(data.table.name(c));
  }
  for (const auto& p : corr_rule_learn(Label::spike, cc_all, data, opts.exec)) {
    rs.correction.emplace_back(data.table.name(p.condition), p.prior);
  }
  return rs;
}

// ---- application ------------------------------------------------------------

Application apply_rules(const RuleSet& rs, std::span<const Label> base, const ConditionTable& table, RuleScope scope) {
  if (base.size() != table.n_samples()) {
    throw ValidationError("apply_rules: " + std::to_string(base.size()) + " base predictions for " +
                          std::to_string(table.n_samples()) + " condition samples");
  }
  struct Resolved {
    const std::string* name;
    std::span<const std::uint8_t> col;
    Label prior;
  };
  std::vector<Resolved> det;
  std::vector<Resolved> corr;
  for (const auto& name : rs.detection) det.push_back({&name, table.column(table.id_of(name)), Label::no});
  if (scope == RuleScope::all) {
    for (const auto& [name, prior] : rs.correction) corr.push_back({&name, table.column(table.id_of(name)), prior});
  }

  Application out;
  out.corrected.assign(base.begin(), base.end());
  out.explanations.resize(base.size());
  for (std::size_t s = 0; s < base.size(); ++s) {
    auto& e = out.explanations[s];
    e.sample_index = table.samples()[s];
    e.base = base[s];
    if (base[s] == Label::no) {
      for (const auto& d : det) {
        if (d.col[s] != 0) e.detection_fired.push_back(*d.name);
      }
      for (const auto& c : corr) {
        if (c.col[s] != 0 && base[s] == c.prior) e.correction_fired.push_back(*c.name);
      }
      e.flipped = !e.detection_fired.empty() || !e.correction_fired.empty();
    }
    if (e.flipped) out.corrected[s] = rs.target_class;
    e.corrected = out.corrected[s];
  }
  return out;
}

std::string rule_line(std::string_view condition_name) {
  return "corr_spike(w) <- assign_no(w) AND cond_" + std::string(condition_name) + "(w)";
}

std::string render_rules(const RuleSet& rs) {
  std::ostringstream os;
  os << "# EDCR rules: primary=" << rs.primary_model << " target=" << to_string(rs.target_class)
     << " epsilon=" << csv::format_double(rs.epsilon)
     << " filter=" << (rs.top_k ? "top_f1:" + std::to_string(*rs.top_k) : std::string("none")) << '\n';
  if (!rs.detection.empty()) {
    os << "# detection (DC)\n";
    for (const auto& c : rs.detection) os << rule_line(c) << '\n';
  }
  if (!rs.correction.empty()) {
    os << "# correction (CC)\n";
    for (const auto& [c, prior] : rs.correction) {
      os << "corr_spike(w) <- assign_" << to_string(prior) << "(w) AND cond_" << c << "(w)\n";
    }
  }
  return os.str();
}

std::string render_explanation(const Explanation& e) {
  std::ostringstream os;
  os << "sample " << e.sample_index << ": base=" << to_string(e.base) << " corrected=" << to_string(e.corrected);
  if (!e.flipped) {
    os << (e.base == Label::spike ? " (primary already predicts spike)\n" : " (no rule fired)\n");
    return os.str();
  }
  os << " (flipped)\n";
  for (const auto& c : e.detection_fired) os << "  [detection]  " << rule_line(c) << '\n';
  for (const auto& c : e.correction_fired) os << "  [correction] " << rule_line(c) << '\n';
  return os.str();
}

}  // namespace edcr_spike::edcr
