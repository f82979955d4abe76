#include "edcr_spike/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "edcr_spike/csv.hpp"
#include "edcr_spike/errors.hpp"
#include "edcr_spike/model_pool.hpp"

namespace edcr_spike::eval {

Metrics prf1(std::span<const Label> preds, std::span<const Label> truths, Label positive, Exec exec) {
  if (preds.size() != truths.size()) {
    throw ValidationError("prf1: " + std::to_string(preds.size()) + " predictions vs " +
                          std::to_string(truths.size()) + " truths");
  }
  if (preds.empty()) throw ValidationError("prf1: empty input");
  Metrics m;
  m.counts = kernels::confusion(preds, truths, positive, exec);
  const auto& c = m.counts;
  m.precision = c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  m.recall = c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

std::optional<double> percent_delta(double before, double after) {
  if (before == 0.0) return std::nullopt;
  return (after - before) / before * 100.0;
}

std::string render_delta(std::optional<double> pct) {
  if (!pct) return "(n/a)";
  if (*pct == 0.0) return "(0.0%)";
  char buf[32];
  std::snprintf(buf, sizeof buf, "(%+.2f%%)", *pct);
  return buf;
}

namespace {

std::string delta_cell(std::optional<double> pct) { return pct ? csv::format_fixed(*pct, 2) : std::string(); }

std::string two(double v) { return csv::format_fixed(v, 2); }

}  // namespace

EvalRow evaluate(std::string variant, std::span<const Label> base, std::span<const Label> corrected,
                 std::span<const Label> truths, std::span<const edcr::Explanation> explanations) {
  if (base.size() != corrected.size() || base.size() != truths.size()) {
    throw ValidationError("evaluate: base, corrected and truth vectors differ in length");
  }
  EvalRow row;
  row.family = pool::family_of(variant);
  row.variant = std::move(variant);
  row.base = prf1(base, truths);
  row.corrected = prf1(corrected, truths);
  for (std::size_t s = 0; s < base.size(); ++s) row.flips += base[s] != corrected[s];

  std::map<std::pair<std::string, std::string>, std::size_t> counts;
  for (const auto& e : explanations) {
    for (const auto& c : e.detection_fired) ++counts[{"DC", c}];
    for (const auto& c : e.correction_fired) ++counts[{"CC", c}];
  }
  for (const auto& [key, n] : counts) row.firings.push_back({key.first, key.second, n});
  return row;
}

// ---- ablation ---------------------------------------------------------------

bool family_matches(const Family& f, std::string_view model_name) {
  const auto fam = pool::family_of(model_name);
  return std::any_of(f.members.begin(), f.members.end(),
                     [&](const std::string& m) { return m == model_name || m == fam; });
}

std::vector<Family> default_families(std::span<const std::string> model_names) {
  std::set<std::string> prefixes;
  for (const auto& n : model_names) prefixes.insert(pool::family_of(n));
  std::vector<Family> out;
  for (const auto& p : prefixes) out.push_back({p, {p}});
  return out;
}

namespace {

AblationRow run_ablation(std::string label, std::span<const edcr::ConditionId> candidates,
                         const edcr::LearnOptions& opts, const edcr::RuleData& train, const edcr::RuleData& test,
                         const std::string& primary) {
  AblationRow row;
  row.family = std::move(label);
  const auto rs = edcr::mpsc_rule_learn(candidates, train, primary, opts);
  row.detection = rs.detection;
  row.correction_size = rs.correction.size();
  const auto tr = edcr::apply_rules(rs, train.base, train.table);
  const auto te = edcr::apply_rules(rs, test.base, test.table);
  const auto tr_det = edcr::apply_rules(rs, train.base, train.table, edcr::RuleScope::detection_only);
  const auto te_det = edcr::apply_rules(rs, test.base, test.table, edcr::RuleScope::detection_only);
  row.train = prf1(tr.corrected, train.truth);
  row.test = prf1(te.corrected, test.truth);
  row.train_detection_only = prf1(tr_det.corrected, train.truth);
  row.test_detection_only = prf1(te_det.corrected, test.truth);
  return row;
}

}  // namespace

AblationReport ablate(std::span<const Family> families, const edcr::LearnOptions& opts, const edcr::RuleData& train,
                      const edcr::RuleData& test, const std::string& primary) {
  AblationReport rep;
  rep.primary = primary;
  rep.base_train = prf1(train.base, train.truth);
  rep.base_test = prf1(test.base, test.truth);
  const auto all = train.table.ids();
  rep.full = run_ablation("(full)", all, opts, train, test, primary);

  for (const auto& fam : families) {
    std::vector<edcr::ConditionId> kept;
    std::size_t removed = 0;
    for (auto id : all) {
      if (family_matches(fam, train.table.name(id))) {
        ++removed;
      } else {
        kept.push_back(id);
      }
    }
    if (removed == 0) {
      AblationRow row = rep.full;
      row.family = fam.label;
      row.removed = 0;
      row.warning = "family matched no conditions";
      rep.rows.push_back(std::move(row));
      continue;
    }
    auto row = run_ablation(fam.label, kept, opts, train, test, primary);
    row.removed = removed;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

// ---- report rendering -------------------------------------------------------

std::string report_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "model,variant,stage,precision,recall,f1,delta_p_pct,delta_r_pct,delta_f1_pct\n";
  for (const auto& row : r.rows) {
    os << row.family << ',' << row.variant << ",base," << csv::format_double(row.base.precision) << ','
       << csv::format_double(row.base.recall) << ',' << csv::format_double(row.base.f1) << ",,,\n";
    os << row.family << ',' << row.variant << ",edcr," << csv::format_double(row.corrected.precision) << ','
       << csv::format_double(row.corrected.recall) << ',' << csv::format_double(row.corrected.f1) << ','
       << delta_cell(row.delta_precision()) << ',' << delta_cell(row.delta_recall()) << ','
       << delta_cell(row.delta_f1()) << '\n';
  }
  return os.str();
}

std::string report_markdown(const EvalReport& r) {
  const auto& p = r.provenance;
  std::ostringstream os;
  os << "# Spike classification with EDCR\n\n";
  os << "- dataset: " << p.dataset << "\n- train/test samples: " << p.train_size << " / " << p.test_size
     << " (split ratio " << csv::format_double(p.split_ratio) << ")\n- epsilon: " << csv::format_double(p.epsilon)
     << "\n- condition filter: " << (p.top_k ? "top F1, k = " + std::to_string(*p.top_k) : std::string("none"))
     << "\n- seed: " << p.seed << "\n\n";
  os << "| Model Variant | Precision | Recall | F1 |\n|---|---|---|---|\n";
  for (const auto& row : r.rows) {
    os << "| " << row.variant << " | " << two(row.base.precision) << " | " << two(row.base.recall) << " | "
       << two(row.base.f1) << " |\n";
  }
  for (const auto& row : r.rows) {
    os << "| " << row.variant << " (EDCR) | " << two(row.corrected.precision) << ' '
       << render_delta(row.delta_precision()) << " | " << two(row.corrected.recall) << ' '
       << render_delta(row.delta_recall()) << " | " << two(row.corrected.f1) << ' ' << render_delta(row.delta_f1())
       << " |\n";
  }
  for (const auto& row : r.rows) {
    os << "\n## " << row.variant << ": " << row.flips << " predictions flipped to spike\n";
    if (row.firings.empty()) {
      os << "\nNo rule fired.\n";
      continue;
    }
    os << "\n| Rule | Condition | Fired |\n|---|---|---|\n";
    for (const auto& f : row.firings) os << "| " << f.rule << " | " << f.condition << " | " << f.count << " |\n";
  }
  return os.str();
}

std::vector<std::filesystem::path> emit_report(const EvalReport& r, const std::filesystem::path& dir,
                                               const std::string& stem) {
  const auto csv_path = dir / (stem + ".csv");
  const auto md_path = dir / (stem + ".md");
  csv::write_file(csv_path, report_csv(r));
  csv::write_file(md_path, report_markdown(r));
  return {csv_path, md_path};
}

namespace {

void ablation_csv_row(std::ostringstream& os, const std::string& primary, const AblationRow& row,
                      const AblationRow& full) {
  auto abs_d = [](double a, double b) { return csv::format_fixed(b - a, 4); };
  os << primary << ',' << row.family << ',' << row.removed << ',' << row.detection.size() << ','
     << row.correction_size << ',' << csv::format_double(row.test.precision) << ','
     << csv::format_double(row.test.recall) << ',' << csv::format_double(row.test.f1) << ','
     << abs_d(full.test.precision, row.test.precision) << ',' << abs_d(full.test.recall, row.test.recall) << ','
     << abs_d(full.test.f1, row.test.f1) << ',' << delta_cell(percent_delta(full.test.precision, row.test.precision))
     << ',' << delta_cell(percent_delta(full.test.recall, row.test.recall)) << ','
     << delta_cell(percent_delta(full.test.f1, row.test.f1)) << ','
     << csv::format_double(row.test_detection_only.precision) << ','
     << csv::format_double(row.test_detection_only.recall) << ','
     << csv::format_double(row.train.recall) << ',' << row.warning << '\n';
}

}  // namespace

std::string ablation_csv(const AblationReport& r) {
  std::ostringstream os;
  os << "primary,family,removed,dc_size,cc_size,precision,recall,f1,delta_p_abs,delta_r_abs,delta_f1_abs,"
        "delta_p_pct,delta_r_pct,delta_f1_pct,det_only_precision,det_only_recall,train_recall,warning\n";
  ablation_csv_row(os, r.primary, r.full, r.full);
  for (const auto& row : r.rows) ablation_csv_row(os, r.primary, row, r.full);
  return os.str();
}

std::string ablation_markdown(const AblationReport& r) {
  std::ostringstream os;
  os << "# Ablation for primary " << r.primary << "\n\n";
  os << "Base model on test: precision " << two(r.base_test.precision) << ", recall " << two(r.base_test.recall)
     << ", F1 " << two(r.base_test.f1) << ".\n\n";
  os << "| Conditions removed | # | Precision | Recall | F1 | dP (pts) | dR (pts) | dP | dR |\n"
        "|---|---|---|---|---|---|---|---|---|\n";
  auto line = [&](const AblationRow& row) {
    os << "| " << row.family << " | " << row.removed << " | " << two(row.test.precision) << " | "
       << two(row.test.recall) << " | " << two(row.test.f1) << " | "
       << csv::format_fixed(100.0 * (row.test.precision - r.full.test.precision), 1) << " | "
       << csv::format_fixed(100.0 * (row.test.recall - r.full.test.recall), 1) << " | "
       << render_delta(percent_delta(r.full.test.precision, row.test.precision)) << " | "
       << render_delta(percent_delta(r.full.test.recall, row.test.recall)) << " |";
    if (!row.warning.empty()) os << " " << row.warning;
    os << '\n';
  };
  line(r.full);
  for (const auto& row : r.rows) line(row);
  return os.str();
}

std::vector<std::filesystem::path> emit_ablation(const AblationReport& r, const std::filesystem::path& dir,
                                                 const std::string& stem) {
  const auto csv_path = dir / (stem + ".csv");
  const auto md_path = dir / (stem + ".md");
  csv::write_file(csv_path, ablation_csv(r));
  csv::write_file(md_path, ablation_markdown(r));
  return {csv_path, md_path};
}

std::string file_stem(std::string_view model_name) {
  std::string out;
  for (char ch : model_name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
    out.push_back(ok ? ch : '_');
  }
  return out.empty() ? std::string("_") : out;
}

std::string ablation_svg(const AblationReport& r) {
  if (r.rows.empty()) return {};
  const int group_w = 120;
  const int bar_w = 36;
  const int left = 60;
  const int top = 40;
  const int plot_h = 240;
  const int width = left + group_w * static_cast<int>(r.rows.size()) + 140;
  const int height = top + plot_h + 70;
  auto y_of = [&](double v) { return top + plot_h - v * plot_h; };
  auto fmt = [](double v) { return csv::format_fixed(v, 2); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">Ablation of conditions, primary "
     << r.primary << " (test set)</text>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = tick / 4.0;
    os << "<line x1=\"" << left << "\" y1=\"" << fmt(y_of(v)) << "\" x2=\"" << width - 140 << "\" y2=\""
       << fmt(y_of(v)) << "\" stroke=\"#dddddd\"/>\n"
       << "<text x=\"" << left - 8 << "\" y=\"" << fmt(y_of(v) + 4) << "\" font-family=\"sans-serif\" font-size=\"10\" "
       << "text-anchor=\"end\">" << fmt(v) << "</text>\n";
  }
  const double full_p = r.full.test.precision;
  const double full_r = r.full.test.recall;
  for (std::size_t g = 0; g < r.rows.size(); ++g) {
    const auto& row = r.rows[g];
    const int x0 = left + group_w * static_cast<int>(g) + 20;
    os << "<g class=\"family\" data-family=\"" << row.family << "\">\n";
    os << "<rect class=\"precision\" x=\"" << x0 << "\" y=\"" << fmt(y_of(row.test.precision)) << "\" width=\""
       << bar_w << "\" height=\"" << fmt(row.test.precision * plot_h) << "\" fill=\"#4e79a7\"/>\n";
    os << "<rect class=\"recall\" x=\"" << x0 + bar_w + 4 << "\" y=\"" << fmt(y_of(row.test.recall))
       << "\" width=\"" << bar_w << "\" height=\"" << fmt(row.test.recall * plot_h) << "\" fill=\"#f28e2b\"/>\n";
    os << "<text x=\"" << x0 + bar_w + 2 << "\" y=\"" << top + plot_h + 16
       << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">-" << row.family << "</text>\n";
    os << "</g>\n";
  }
  const int x_end = width - 140;
  os << "<line x1=\"" << left << "\" y1=\"" << fmt(y_of(full_p)) << "\" x2=\"" << x_end << "\" y2=\""
     << fmt(y_of(full_p)) << "\" stroke=\"#4e79a7\" stroke-dasharray=\"4 3\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << fmt(y_of(full_r)) << "\" x2=\"" << x_end << "\" y2=\""
     << fmt(y_of(full_r)) << "\" stroke=\"#f28e2b\" stroke-dasharray=\"4 3\"/>\n";
  const int lx = x_end + 16;
  os << "<rect x=\"" << lx << "\" y=\"" << top << "\" width=\"12\" height=\"12\" fill=\"#4e79a7\"/>\n"
     << "<text x=\"" << lx + 18 << "\" y=\"" << top + 10 << "\" font-family=\"sans-serif\" font-size=\"11\">precision</text>\n"
     << "<rect x=\"" << lx << "\" y=\"" << top + 20 << "\" width=\"12\" height=\"12\" fill=\"#f28e2b\"/>\n"
     << "<text x=\"" << lx + 18 << "\" y=\"" << top + 30 << "\" font-family=\"sans-serif\" font-size=\"11\">recall</text>\n"
     << "<text x=\"" << lx << "\" y=\"" << top + 52 << "\" font-family=\"sans-serif\" font-size=\"10\">dashed: full pool</text>\n"
     << "<text x=\"" << left << "\" y=\"" << height - 12 << "\" font-family=\"sans-serif\" font-size=\"10\">"
     << "groups: condition families removed from C</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::vector<std::filesystem::path> emit_plots(std::span<const AblationReport> reports,
                                              const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& r : reports) {
    const auto svg = ablation_svg(r);
    if (svg.empty()) continue;
    auto path = dir / ("ablation_" + file_stem(r.primary) + ".svg");
    csv::write_file(path, svg);
    out.push_back(std::move(path));
  }
  return out;
}

}  // namespace edcr_spike::eval
