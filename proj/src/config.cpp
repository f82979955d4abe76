#include "edcr_spike/config.hpp"

#include <sstream>

#include "edcr_spike/csv.hpp"
#include "edcr_spike/errors.hpp"

namespace edcr_spike::cli {

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(sep, start);
    const auto piece = csv::trim(text.substr(start, pos == std::string_view::npos ? text.npos : pos - start));
    if (!piece.empty()) out.emplace_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::size_t parse_count(std::string_view v, std::string_view key) {
  const auto n = csv::parse_int(v, key);
  if (n < 0) throw ValidationError(std::string(key) + " must be non-negative");
  return static_cast<std::size_t>(n);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

}  // namespace

RunConfig::RunConfig() {
  logit_variants = {{0.1, 300, 0, 1.0, 1.0},  {0.1, 300, 0, 1.0, 4.0},  {0.1, 300, 0, 1.0, 10.0},
                    {0.1, 300, 0, 0.5, 4.0},  {0.1, 300, 0, 0.5, 10.0}, {0.05, 300, 0, 0.3, 8.0}};
  zdet_grid = {{5, 1.5}, {5, 2.0}, {10, 1.5}, {10, 2.0}, {10, 2.5}, {15, 2.0}, {18, 2.5}};
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  const std::string k(csv::trim(key));
  const std::string_view v = csv::trim(value);
  if (k == "data") cfg.data = v;
  else if (k == "symbol") cfg.symbol = v;
  else if (k == "seed") cfg.seed = static_cast<std::uint64_t>(parse_count(v, k));
  else if (k == "synthetic_length") cfg.synthetic_length = parse_count(v, k);
  else if (k == "synthetic_start") cfg.synthetic_start = csv::parse_double(v, k);
  else if (k == "synthetic_drift") cfg.synthetic_drift = csv::parse_double(v, k);
  else if (k == "synthetic_vol") cfg.synthetic_vol = csv::parse_double(v, k);
  else if (k == "synthetic_jumps") cfg.synthetic_jumps = v;
  else if (k == "label_window") cfg.label_window = parse_count(v, k);
  else if (k == "label_k") cfg.label_k = csv::parse_double(v, k);
  else if (k == "sample_window") cfg.sample_window = parse_count(v, k);
  else if (k == "split_ratio") cfg.split_ratio = csv::parse_double(v, k);
  else if (k == "logit_variants") {
    cfg.logit_variants.clear();
    for (const auto& item : split(v, ',')) {
      const auto f = split(item, ':');
      if (f.size() != 4) throw ValidationError("logit_variants entry '" + item + "' needs lr:epochs:fraction:weight");
      cfg.logit_variants.push_back({csv::parse_double(f[0], "lr"), parse_count(f[1], "epochs"), 0,
                                    csv::parse_double(f[2], "feature_fraction"),
                                    csv::parse_double(f[3], "positive_weight")});
    }
  } else if (k == "zdet_grid") {
    cfg.zdet_grid.clear();
    for (const auto& item : split(v, ',')) {
      const auto f = split(item, ':');
      if (f.size() != 2) throw ValidationError("zdet_grid entry '" + item + "' needs window:threshold");
      cfg.zdet_grid.push_back({parse_count(f[0], "window"), csv::parse_double(f[1], "threshold")});
    }
  } else if (k == "import_preds") cfg.import_preds = split(v, ',');
  else if (k == "primary") cfg.primary = split(v, ',');
  else if (k == "epsilon") {
    cfg.epsilon = csv::parse_double(v, k);
    if (cfg.epsilon < 0.0) throw ValidationError("epsilon must be >= 0");
  } else if (k == "topk") {
    if (v == "all" || v == "none") {
      cfg.topk.reset();
    } else {
      cfg.topk = parse_count(v, k);
      if (*cfg.topk == 0) throw ValidationError("topk must be >= 1 (or 'all')");
    }
  } else if (k == "families") cfg.families = split(v, ',');
  else if (k == "out") cfg.out = v;
  else throw ValidationError("unknown config key '" + k + "'");
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const auto body = csv::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      set_config_value(cfg, body.substr(0, eq), body.substr(eq + 1));
    } catch (const ValidationError& e) {
      throw ValidationError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  const auto lines = csv::read_lines(path);
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  return parse_config(text);
}

std::string serialize_config(const RunConfig& cfg, bool include_output_dir) {
  std::ostringstream os;
  auto num = [](double v) { return csv::format_double(v); };
  os << "data = " << cfg.data << '\n'
     << "symbol = " << cfg.symbol << '\n'
     << "seed = " << cfg.seed << '\n'
     << "synthetic_length = " << cfg.synthetic_length << '\n'
     << "synthetic_start = " << num(cfg.synthetic_start) << '\n'
     << "synthetic_drift = " << num(cfg.synthetic_drift) << '\n'
     << "synthetic_vol = " << num(cfg.synthetic_vol) << '\n'
     << "synthetic_jumps = " << cfg.synthetic_jumps << '\n'
     << "label_window = " << cfg.label_window << '\n'
     << "label_k = " << num(cfg.label_k) << '\n'
     << "sample_window = " << cfg.sample_window << '\n'
     << "split_ratio = " << num(cfg.split_ratio) << '\n';
  os << "logit_variants = ";
  for (std::size_t i = 0; i < cfg.logit_variants.size(); ++i) {
    const auto& p = cfg.logit_variants[i];
    os << (i ? "," : "") << num(p.lr) << ':' << p.epochs << ':' << num(p.feature_fraction) << ':'
       << num(p.positive_weight);
  }
  os << "\nzdet_grid = ";
  for (std::size_t i = 0; i < cfg.zdet_grid.size(); ++i) {
    os << (i ? "," : "") << cfg.zdet_grid[i].window << ':' << num(cfg.zdet_grid[i].threshold);
  }
  os << "\nimport_preds = " << join(cfg.import_preds) << '\n'
     << "primary = " << join(cfg.primary) << '\n'
     << "epsilon = " << num(cfg.epsilon) << '\n'
     << "topk = " << (cfg.topk ? std::to_string(*cfg.topk) : std::string("all")) << '\n'
     << "families = " << join(cfg.families) << '\n';
  if (include_output_dir) os << "out = " << cfg.out << '\n';
  return os.str();
}

}  // namespace edcr_spike::cli
