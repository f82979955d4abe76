#include <random>

#include "doctest.h"
#include "edcr_spike/errors.hpp"
#include "edcr_spike/evaluation.hpp"
#include "fixtures.hpp"
#include "oracle/naive_edcr.hpp"

using namespace edcr_spike;
using namespace edcr_spike::eval;

TEST_CASE("prf1 matches brute-force counts") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len(1, 300);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = len(rng);
    const double pp = u(rng), pt = u(rng);
    std::vector<int> p(n), t(n);
    for (int i = 0; i < n; ++i) {
      p[i] = u(rng) < pp;
      t[i] = u(rng) < pt;
    }
    const auto want = oracle::prf1(p, t);
    const auto got = prf1(fixtures::labels(p), fixtures::labels(t));
    CHECK(std::abs(got.precision - want.precision) <= 1e-12);
    CHECK(std::abs(got.recall - want.recall) <= 1e-12);
    CHECK(std::abs(got.f1 - want.f1) <= 1e-12);
  }
}

TEST_CASE("all-spike predictor precision equals prevalence") {
  std::vector<int> t(200, 0);
  for (int i = 0; i < 30; ++i) t[i * 6] = 1;
  const auto m = prf1(fixtures::labels(std::vector<int>(200, 1)), fixtures::labels(t));
  CHECK(m.precision == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(m.recall == 1.0);
}

TEST_CASE("prf1 edge cases") {
  const auto none = prf1(fixtures::labels({0, 0, 0}), fixtures::labels({1, 0, 0}));
  CHECK(none.precision == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK_THROWS_AS(prf1(fixtures::labels({0}), fixtures::labels({0, 1})), ValidationError);
  CHECK_THROWS_AS(prf1(LabelVec{}, LabelVec{}), ValidationError);
}

TEST_CASE("percent deltas") {
  CHECK(render_delta(percent_delta(0.68, 0.88)) == "(+29.41%)");
  CHECK(render_delta(percent_delta(0.5, 0.5)) == "(0.0%)");
  CHECK(render_delta(percent_delta(0.0, 0.4)) == "(n/a)");
  CHECK(render_delta(percent_delta(0.5, 0.45)).starts_with("(-10.0"));
}

namespace {

struct Pipeline {
  edcr::RuleData train;
  edcr::RuleData test;
};

Pipeline random_pipeline(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return {fixtures::rule_data(fixtures::random_instance(rng, 250, 10)),
          fixtures::rule_data(fixtures::random_instance(rng, 150, 10))};
}

}  // namespace

TEST_CASE("ablating never-selected conditions keeps the detection rule") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto p = random_pipeline(seed);
    const edcr::LearnOptions opts{.epsilon = 0.1, .top_k = std::nullopt};
    const auto full = edcr::mpsc_rule_learn(p.train.table.ids(), p.train, "primary", opts);
    Family unused{"unused", {}};
    for (const auto& c : p.train.table.conditions()) {
      if (std::find(full.detection.begin(), full.detection.end(), c.model_name) == full.detection.end()) {
        unused.members.push_back(c.model_name);
      }
    }
    if (unused.members.empty()) continue;
    const std::vector<Family> fams{unused};
    const auto rep = ablate(fams, opts, p.train, p.test, "primary");
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].detection == rep.full.detection);
    CHECK(rep.rows[0].train_detection_only == rep.full.train_detection_only);
    CHECK(rep.rows[0].test_detection_only == rep.full.test_detection_only);
  }
}

TEST_CASE("ablating the whole pool gives the base metrics") {
  const auto p = random_pipeline(3);
  Family all{"all", {}};
  for (const auto& c : p.train.table.conditions()) all.members.push_back(c.model_name);
  const std::vector<Family> fams{all};
  const auto rep = ablate(fams, {.epsilon = 0.2, .top_k = std::nullopt}, p.train, p.test, "primary");
  CHECK(rep.rows[0].train == rep.base_train);
  CHECK(rep.rows[0].test == rep.base_test);
}

TEST_CASE("an unmatched family is reported with a warning") {
  const auto p = random_pipeline(4);
  const std::vector<Family> fams{{"GHOST", {"GHOST"}}};
  const auto rep = ablate(fams, {}, p.train, p.test, "primary");
  CHECK_FALSE(rep.rows[0].warning.empty());
  CHECK(rep.rows[0].removed == 0);
}

TEST_CASE("family matching and defaults") {
  const Family f{"ZDET", {"ZDET"}};
  CHECK(family_matches(f, "ZDET-10-1.5"));
  CHECK_FALSE(family_matches(f, "LOGIT-1"));
  CHECK(family_matches({"one", {"LOGIT-1"}}, "LOGIT-1"));
  const std::vector<std::string> names{"ZDET-5-2", "LOGIT-2", "LOGIT-1", "ZDET-10-2"};
  const auto fams = default_families(names);
  REQUIRE(fams.size() == 2);
  CHECK(fams[0].label == "LOGIT");
  CHECK(fams[1].label == "ZDET");
}

TEST_CASE("report CSV layout") {
  EvalReport empty;
  CHECK(report_csv(empty) == "model,variant,stage,precision,recall,f1,delta_p_pct,delta_r_pct,delta_f1_pct\n");

  const auto base = fixtures::labels({1, 0, 0, 1});
  const auto corr = fixtures::labels({1, 1, 0, 1});
  const auto truth = fixtures::labels({1, 1, 0, 0});
  EvalReport r;
  r.rows.push_back(evaluate("LOGIT-1", base, corr, truth));
  r.rows.back().family = "LOGIT";
  const auto csv = report_csv(r);
  CHECK(csv.find("LOGIT,LOGIT-1,base,0.5,0.5,0.5,,,\n") != std::string::npos);
  CHECK(csv.find("LOGIT,LOGIT-1,edcr,") != std::string::npos);
  CHECK(r.rows[0].flips == 1);
}

TEST_CASE("ablation SVG is deterministic and empty without rows") {
  const auto p = random_pipeline(6);
  AblationReport none;
  CHECK(ablation_svg(none).empty());
  const std::vector<Family> fams{{"c00", {"c00"}}, {"c01", {"c01"}}};
  const auto a = ablate(fams, {}, p.train, p.test, "primary");
  const auto b = ablate(fams, {}, p.train, p.test, "primary");
  const auto svg = ablation_svg(a);
  CHECK(svg == ablation_svg(b));
  CHECK((svg.starts_with("<?xml") || svg.starts_with("<svg")));
  CHECK(svg.find("</svg>") != std::string::npos);
}
