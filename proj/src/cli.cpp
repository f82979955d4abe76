#include "edcr_spike/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "edcr_spike/csv.hpp"
#include "edcr_spike/dataset.hpp"
#include "edcr_spike/edcr.hpp"
#include "edcr_spike/errors.hpp"
#include "edcr_spike/evaluation.hpp"
#include "edcr_spike/market_data.hpp"
#include "edcr_spike/model_pool.hpp"
#include "edcr_spike/parallel.hpp"
#include "edcr_spike/rules_io.hpp"

namespace edcr_spike::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kSubcommands = {"label", "featurize", "train",   "import-preds", "learn",
                                               "apply", "eval",      "ablate",  "explain",      "demo"};

fs::path out_path(const RunConfig& cfg, const std::string& name) { return fs::path(cfg.out) / name; }

std::vector<market::Jump> auto_jumps(std::uint64_t seed, std::size_t length, std::size_t warmup) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<int> cluster_size(2, 4);
  std::uniform_int_distribution<int> spacing(1, 3);
  std::uniform_int_distribution<int> gap(30, 70);
  std::uniform_real_distribution<double> magnitude(3.0, 6.0);
  std::vector<market::Jump> out;
  std::size_t t = warmup + 5;
  while (t < length) {
    const int n = cluster_size(rng);
    for (int i = 0; i < n && t < length; ++i) {
      out.push_back({t, magnitude(rng)});
      t += static_cast<std::size_t>(spacing(rng));
    }
    t += static_cast<std::size_t>(gap(rng));
  }
  return out;
}

std::vector<market::Jump> parse_jumps(const RunConfig& cfg) {
  if (cfg.synthetic_jumps == "auto") return auto_jumps(cfg.seed, cfg.synthetic_length, cfg.label_window);
  std::vector<market::Jump> out;
  if (cfg.synthetic_jumps == "none" || cfg.synthetic_jumps.empty()) return out;
  for (const auto& item : csv::split_line(cfg.synthetic_jumps)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ValidationError("synthetic_jumps entry '" + item + "' needs index:sigmas");
    const auto idx = csv::parse_int(item.substr(0, colon), "jump index");
    if (idx < 0) throw ValidationError("negative jump index");
    out.push_back({static_cast<std::size_t>(idx), csv::parse_double(item.substr(colon + 1), "jump sigmas")});
  }
  return out;
}

market::PriceSeries source_series(const RunConfig& cfg) {
  if (!cfg.data.empty()) {
    if (!fs::exists(cfg.data)) throw IoError("price file not found: " + cfg.data);
    return market::load_price_csv(cfg.data, cfg.symbol);
  }
  market::SyntheticSpec spec;
  spec.seed = cfg.seed;
  spec.length = cfg.synthetic_length;
  spec.start = cfg.synthetic_start;
  spec.drift = cfg.synthetic_drift;
  spec.vol = cfg.synthetic_vol;
  spec.jumps = parse_jumps(cfg);
  spec.jump_reference_window = cfg.label_window;
  spec.symbol = cfg.symbol;
  return market::generate_synthetic(spec);
}

std::string dataset_name(const RunConfig& cfg) {
  if (!cfg.data.empty()) return cfg.symbol + " (" + fs::path(cfg.data).filename().string() + ")";
  return cfg.symbol + " (synthetic, seed " + std::to_string(cfg.seed) + ", length " +
         std::to_string(cfg.synthetic_length) + ")";
}

fs::path require(const fs::path& p, const char* producer) {
  if (!fs::exists(p)) throw IoError(p.string() + " not found (run `" + producer + "` first)");
  return p;
}

struct PoolData {
  dataset::LabeledDataset train;
  dataset::LabeledDataset test;
  pool::PredictionMatrix train_preds;  // columns aligned with `train`
  pool::PredictionMatrix test_preds;
};

dataset::LabeledDataset read_split(const RunConfig& cfg, const char* which) {
  return dataset::import_dataset(require(out_path(cfg, std::string("dataset_") + which + ".csv"), "featurize"));
}

PoolData load_pool(const RunConfig& cfg) {
  PoolData d;
  d.train = read_split(cfg, "train");
  d.test = read_split(cfg, "test");
  auto train_m = pool::import_predictions(require(out_path(cfg, "predictions_train.csv"), "train"));
  auto test_m = pool::import_predictions(require(out_path(cfg, "predictions_test.csv"), "train"));
  if (fs::exists(out_path(cfg, "imported_train.csv"))) {
    train_m = pool::merge(train_m, pool::import_predictions(out_path(cfg, "imported_train.csv")));
    test_m = pool::merge(test_m, pool::import_predictions(require(out_path(cfg, "imported_test.csv"), "import-preds")));
  }
  const auto tri = d.train.indices();
  const auto tei = d.test.indices();
  d.train_preds = train_m.select_samples(tri);
  d.test_preds = test_m.select_samples(tei);
  return d;
}

std::vector<std::string> resolve_primaries(const RunConfig& cfg, const PoolData& d) {
  if (cfg.primary.empty()) throw ValidationError("no primary model designated (use --primary NAME or --primary auto)");
  if (!(cfg.primary.size() == 1 && cfg.primary.front() == "auto")) {
    for (const auto& p : cfg.primary) {
      if (!d.train_preds.find(p)) throw ValidationError("primary model '" + p + "' is not in the prediction pool");
    }
    return cfg.primary;
  }
  // Best training F1, recall and precision, in that order; ties to the smaller name.
  const auto truth = d.train.labels();
  std::vector<std::pair<std::string, eval::Metrics>> scored;
  for (const auto& name : d.train_preds.models()) scored.emplace_back(name, eval::prf1(d.train_preds.row(name), truth));
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> out;
  for (auto metric : {&eval::Metrics::f1, &eval::Metrics::recall, &eval::Metrics::precision}) {
    const auto best = std::max_element(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
      return a.second.*metric < b.second.*metric;
    });
    if (best != scored.end() && std::find(out.begin(), out.end(), best->first) == out.end()) {
      out.push_back(best->first);
    }
  }
  return out;
}

edcr::LearnOptions learn_options(const RunConfig& cfg) {
  edcr::LearnOptions o;
  o.epsilon = cfg.epsilon;
  o.top_k = cfg.topk;
  return o;
}

std::vector<eval::Family> resolve_families(const RunConfig& cfg, const pool::PredictionMatrix& m,
                                           const std::string& primary) {
  if (cfg.families.empty()) {
    std::vector<std::string> names;
    for (const auto& n : m.models()) {
      if (n != primary) names.push_back(n);
    }
    return eval::default_families(names);
  }
  std::vector<eval::Family> out;
  for (const auto& entry : cfg.families) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      out.push_back({entry, {entry}});
      continue;
    }
    eval::Family f{entry.substr(0, eq), {}};
    std::string members = entry.substr(eq + 1);
    std::size_t start = 0;
    while (start <= members.size()) {
      const auto bar = members.find('|', start);
      auto m = std::string(csv::trim(members.substr(start, bar == std::string::npos ? bar : bar - start)));
      if (!m.empty()) f.members.push_back(std::move(m));
      if (bar == std::string::npos) break;
      start = bar + 1;
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::string corrected_csv(const dataset::LabeledDataset& train, const dataset::LabeledDataset& test,
                          const edcr::Application& tr, const edcr::Application& te) {
  std::ostringstream os;
  os << "sample_index,split,truth,base,corrected\n";
  auto emit = [&](const dataset::LabeledDataset& ds, const edcr::Application& a, const char* split) {
    for (std::size_t s = 0; s < ds.size(); ++s) {
      os << ds.samples[s].index << ',' << split << ',' << (ds.samples[s].label == Label::spike) << ','
         << (a.explanations[s].base == Label::spike) << ',' << (a.corrected[s] == Label::spike) << '\n';
    }
  };
  emit(train, tr, "train");
  emit(test, te, "test");
  return os.str();
}

}  // namespace

std::string usage() {
  return "usage: edcr_spike <subcommand> [options]\n"
         "subcommands: label featurize train import-preds learn apply eval ablate explain demo\n"
         "options: --config PATH --seed N --epsilon F --topk N|all --primary NAME[,NAME..]|auto --out DIR\n"
         "         --import-preds PATH (repeatable) --data PATH --symbol NAME --sample INDEX (explain)\n"
         "env:     EDCR_SPIKE_THREADS caps the worker count\n";
}

void cmd_label(const RunConfig& cfg, std::ostream& out) {
  const auto series = source_series(cfg);
  const auto stats = market::rolling_stats(series, cfg.label_window);
  const auto labels = market::label_spikes(series, cfg.label_window, cfg.label_k);
  market::write_price_csv(series, out_path(cfg, "prices.csv"));

  std::ostringstream os;
  os << "index,date,open,rolling_mean,rolling_std,label\n";
  std::size_t spikes = 0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    const auto& p = series.points()[t];
    os << t << ',' << market::format_date(p.date) << ',' << csv::format_double(p.open) << ',';
    if (labels.labels[t]) {
      os << csv::format_double(*stats.means[t]) << ',' << csv::format_double(*stats.stds[t]) << ','
         << to_string(*labels.labels[t]);
      spikes += *labels.labels[t] == Label::spike;
    } else {
      os << ",,";
    }
    os << '\n';
  }
  csv::write_file(out_path(cfg, "labels.csv"), os.str());
  out << "label: " << series.size() << " days, " << spikes << " spikes (window " << cfg.label_window << ", k "
      << csv::format_double(cfg.label_k) << ")\n";
}

void cmd_featurize(const RunConfig& cfg, std::ostream& out) {
  const auto series = market::load_price_csv(require(out_path(cfg, "prices.csv"), "label"), cfg.symbol);
  const auto lines = csv::read_lines(require(out_path(cfg, "labels.csv"), "label"));
  market::LabelSeries labels;
  labels.window = cfg.label_window;
  labels.k = cfg.label_k;
  labels.labels.resize(series.size());
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto f = csv::split_line(lines[r]);
    if (f.size() != 6) throw ValidationError("labels.csv row " + std::to_string(r + 1) + ": expected 6 fields");
    const auto t = static_cast<std::size_t>(csv::parse_int(f[0], "labels.csv index"));
    if (t >= series.size()) throw ValidationError("labels.csv index " + f[0] + " outside the price series");
    if (!f[5].empty()) {
      const auto l = parse_label(f[5]);
      if (!l) throw ValidationError("labels.csv row " + std::to_string(r + 1) + ": unknown label '" + f[5] + "'");
      labels.labels[t] = *l;
    }
  }
  const auto ds = dataset::build_samples(series, labels, cfg.sample_window);
  const auto split = dataset::chronological_split(ds, cfg.split_ratio);
  dataset::export_dataset(split.train, out_path(cfg, "dataset_train.csv"));
  dataset::export_dataset(split.test, out_path(cfg, "dataset_test.csv"));
  out << "featurize: " << ds.size() << " samples -> " << split.train.size() << " train / " << split.test.size()
      << " test (" << ds.spec.describe() << ")\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
  const auto train = read_split(cfg, "train");
  const auto test = read_split(cfg, "test");
  auto variants = cfg.logit_variants;
  for (std::size_t v = 0; v < variants.size(); ++v) variants[v].seed = cfg.seed * 1000003ULL + v + 1;
  auto predictors = pool::train_logistic_pool(train, variants);
  auto detectors = pool::make_zscore_detectors(cfg.zdet_grid);
  predictors.insert(predictors.end(), std::make_move_iterator(detectors.begin()),
                    std::make_move_iterator(detectors.end()));
  if (predictors.empty()) throw ValidationError("built-in pool is empty (no logit_variants and no zdet_grid)");
  pool::export_predictions(pool::predict_matrix(predictors, train), out_path(cfg, "predictions_train.csv"));
  pool::export_predictions(pool::predict_matrix(predictors, test), out_path(cfg, "predictions_test.csv"));
  out << "train: " << predictors.size() << " built-in predictors over " << train.size() << " + " << test.size()
      << " samples\n";
}

void cmd_import_preds(const RunConfig& cfg, std::ostream& out) {
  if (cfg.import_preds.empty()) throw ValidationError("import-preds needs at least one --import-preds PATH");
  const auto train = read_split(cfg, "train");
  const auto test = read_split(cfg, "test");
  pool::PredictionMatrix merged;
  for (const auto& p : cfg.import_preds) {
    if (!fs::exists(p)) throw IoError("prediction file not found: " + p);
    merged = pool::merge(merged, pool::import_predictions(p));
  }
  const auto builtin = pool::import_predictions(require(out_path(cfg, "predictions_train.csv"), "train"));
  for (const auto& m : merged.models()) {
    if (builtin.find(m)) throw ValidationError("imported model '" + m + "' collides with a built-in predictor");
  }
  const auto tri = train.indices();
  const auto tei = test.indices();
  pool::export_predictions(merged.select_samples(tri), out_path(cfg, "imported_train.csv"));
  pool::export_predictions(merged.select_samples(tei), out_path(cfg, "imported_test.csv"));
  out << "import-preds: " << merged.n_models() << " imported models\n";
}

void cmd_learn(const RunConfig& cfg, std::ostream& out) {
  if (cfg.primary.empty()) throw ValidationError("no primary model designated (use --primary NAME or --primary auto)");
  const auto d = load_pool(cfg);
  for (const auto& primary : resolve_primaries(cfg, d)) {
    const auto data = edcr::RuleData::from_matrix(d.train_preds, primary, d.train.labels());
    const auto rs = edcr::mpsc_rule_learn(data.table.ids(), data, primary, learn_options(cfg));
    const auto stem = eval::file_stem(primary);
    edcr::write_rules(rs, out_path(cfg, "rules_" + stem + ".json"));
    csv::write_file(out_path(cfg, "rules_" + stem + ".txt"), edcr::render_rules(rs));
    out << edcr::render_rules(rs);
  }
}

void cmd_apply(const RunConfig& cfg, std::ostream& out) {
  if (cfg.primary.empty()) throw ValidationError("no primary model designated (use --primary NAME or --primary auto)");
  const auto d = load_pool(cfg);
  for (const auto& primary : resolve_primaries(cfg, d)) {
    const auto stem = eval::file_stem(primary);
    const auto rs = edcr::read_rules(require(out_path(cfg, "rules_" + stem + ".json"), "learn"));
    const auto tr_data = edcr::RuleData::from_matrix(d.train_preds, primary, d.train.labels());
    const auto te_data = edcr::RuleData::from_matrix(d.test_preds, primary, d.test.labels());
    const auto tr = edcr::apply_rules(rs, tr_data.base, tr_data.table);
    const auto te = edcr::apply_rules(rs, te_data.base, te_data.table);
    csv::write_file(out_path(cfg, "corrected_" + stem + ".csv"), corrected_csv(d.train, d.test, tr, te));
    auto all = tr.explanations;
    all.insert(all.end(), te.explanations.begin(), te.explanations.end());
    edcr::write_explanations(all, out_path(cfg, "explanations_" + stem + ".json"));
    const auto flips = std::count_if(all.begin(), all.end(), [](const auto& e) { return e.flipped; });
    out << "apply: " << primary << ": " << flips << " predictions flipped to spike\n";
  }
}

void cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const auto d = load_pool(cfg);
  eval::EvalReport report;
  report.provenance = {dataset_name(cfg), d.train.size(), d.test.size(), cfg.split_ratio, cfg.epsilon, cfg.topk,
                       cfg.seed};
  for (const auto& primary : resolve_primaries(cfg, d)) {
    const auto tr_data = edcr::RuleData::from_matrix(d.train_preds, primary, d.train.labels());
    const auto te_data = edcr::RuleData::from_matrix(d.test_preds, primary, d.test.labels());
    const auto rs = edcr::mpsc_rule_learn(tr_data.table.ids(), tr_data, primary, learn_options(cfg));
    const auto te = edcr::apply_rules(rs, te_data.base, te_data.table);
    report.rows.push_back(eval::evaluate(primary, te_data.base, te.corrected, te_data.truth, te.explanations));
  }
  eval::emit_report(report, cfg.out);
  out << eval::report_markdown(report);
}

void cmd_ablate(const RunConfig& cfg, std::ostream& out) {
  const auto d = load_pool(cfg);
  std::vector<eval::AblationReport> reports;
  for (const auto& primary : resolve_primaries(cfg, d)) {
    const auto tr_data = edcr::RuleData::from_matrix(d.train_preds, primary, d.train.labels());
    const auto te_data = edcr::RuleData::from_matrix(d.test_preds, primary, d.test.labels());
    const auto families = resolve_families(cfg, d.train_preds, primary);
    reports.push_back(eval::ablate(families, learn_options(cfg), tr_data, te_data, primary));
    eval::emit_ablation(reports.back(), cfg.out, "ablation_" + eval::file_stem(primary));
    out << eval::ablation_markdown(reports.back()) << '\n';
  }
  for (const auto& p : eval::emit_plots(reports, cfg.out)) out << "wrote " << p.filename().string() << '\n';
}

void cmd_explain(const RunConfig& cfg, long long sample, std::ostream& out) {
  if (sample < 0) throw ValidationError("explain needs --sample INDEX");
  if (cfg.primary.empty()) throw ValidationError("no primary model designated (use --primary NAME or --primary auto)");
  std::vector<std::string> primaries = cfg.primary;
  if (primaries.size() == 1 && primaries.front() == "auto") primaries = resolve_primaries(cfg, load_pool(cfg));
  for (const auto& primary : primaries) {
    const auto es = edcr::read_explanations(
        require(out_path(cfg, "explanations_" + eval::file_stem(primary) + ".json"), "apply"));
    const auto it = std::find_if(es.begin(), es.end(),
                                 [&](const auto& e) { return e.sample_index == static_cast<std::size_t>(sample); });
    if (it == es.end()) throw ValidationError("sample " + std::to_string(sample) + " has no explanation");
    out << "primary " << primary << ", " << edcr::render_explanation(*it);
  }
}

void cmd_demo(RunConfig cfg, std::ostream& out) {
  if (cfg.primary.empty()) cfg.primary = {"auto"};
  csv::write_file(out_path(cfg, "config.txt"), serialize_config(cfg, false));
  cmd_label(cfg, out);
  cmd_featurize(cfg, out);
  cmd_train(cfg, out);
  if (!cfg.import_preds.empty()) cmd_import_preds(cfg, out);
  cmd_learn(cfg, out);
  cmd_apply(cfg, out);
  cmd_eval(cfg, out);
  cmd_ablate(cfg, out);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || std::find(kSubcommands.begin(), kSubcommands.end(), args.front()) == kSubcommands.end()) {
    if (!args.empty()) err << "unknown subcommand '" << args.front() << "'\n";
    err << usage();
    return kExitUsage;
  }
  const std::string sub = args.front();

  CLI::App app{"EDCR metal-price spike classification", "edcr_spike " + sub};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  std::string topk;
  std::string primary;
  std::string out_dir;
  std::string data;
  std::string symbol;
  std::vector<std::string> imports;
  long long sample = -1;
  app.add_option("--config", config_path);
  app.add_option("--seed", seed);
  app.add_option("--epsilon", epsilon);
  app.add_option("--topk", topk);
  app.add_option("--primary", primary);
  app.add_option("--out", out_dir);
  app.add_option("--data", data);
  app.add_option("--symbol", symbol);
  app.add_option("--import-preds", imports)->take_all();
  app.add_option("--sample", sample);

  try {
    std::vector<std::string> rest(args.begin() + 1, args.end());
    std::reverse(rest.begin(), rest.end());
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << usage();
    return kExitValidation;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (epsilon) set_config_value(cfg, "epsilon", csv::format_double(*epsilon));
    if (!topk.empty()) set_config_value(cfg, "topk", topk);
    if (!primary.empty()) set_config_value(cfg, "primary", primary);
    if (!out_dir.empty()) cfg.out = out_dir;
    if (!data.empty()) cfg.data = data;
    if (!symbol.empty()) cfg.symbol = symbol;
    if (!imports.empty()) cfg.import_preds = imports;

    set_thread_cap(thread_cap_from_env());

    if (sub == "label") cmd_label(cfg, out);
    else if (sub == "featurize") cmd_featurize(cfg, out);
    else if (sub == "train") cmd_train(cfg, out);
    else if (sub == "import-preds") cmd_import_preds(cfg, out);
    else if (sub == "learn") cmd_learn(cfg, out);
    else if (sub == "apply") cmd_apply(cfg, out);
    else if (sub == "eval") cmd_eval(cfg, out);
    else if (sub == "ablate") cmd_ablate(cfg, out);
    else if (sub == "explain") cmd_explain(cfg, sample, out);
    else cmd_demo(cfg, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace edcr_spike::cli
