#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "edcr_spike/cli.hpp"
#include "edcr_spike/config.hpp"
#include "edcr_spike/csv.hpp"
#include "edcr_spike/errors.hpp"

using namespace edcr_spike;
using namespace edcr_spike::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / "edcr_test_cli" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path small_config(const fs::path& dir) {
  const auto p = dir / "small.txt";
  std::ofstream(p) << "synthetic_length = 400\n"
                      "logit_variants = 0.1:40:1:1, 0.1:40:0.5:3\n"
                      "# short run\n";
  return p;
}

}  // namespace

TEST_CASE("usage and exit codes") {
  CHECK(run_cli({}).code == kExitUsage);
  const auto r = run_cli({"frobnicate"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("frobnicate") != std::string::npos);
  CHECK(run_cli({"label", "--epsilon", "abc"}).code == kExitValidation);
}

TEST_CASE("learn without a primary model is a validation error") {
  const auto dir = fresh_dir("noprimary");
  const auto cfg = small_config(dir).string();
  const auto out = (dir / "out").string();
  REQUIRE(run_cli({"label", "--config", cfg, "--out", out}).code == kExitOk);
  REQUIRE(run_cli({"featurize", "--config", cfg, "--out", out}).code == kExitOk);
  REQUIRE(run_cli({"train", "--config", cfg, "--out", out}).code == kExitOk);
  const auto r = run_cli({"learn", "--config", cfg, "--out", out});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("primary") != std::string::npos);
}

TEST_CASE("a missing input is an I/O error") {
  const auto dir = fresh_dir("missing");
  CHECK(run_cli({"featurize", "--out", (dir / "out").string()}).code == kExitIo);
  CHECK(run_cli({"label", "--data", (dir / "nope.csv").string(), "--out", (dir / "o").string()}).code == kExitIo);
}

TEST_CASE("demo is deterministic and explain reads its output") {
  const auto dir = fresh_dir("demo");
  const auto cfg = small_config(dir).string();
  const auto a = (dir / "a").string();
  const auto b = (dir / "b").string();
  REQUIRE(run_cli({"demo", "--config", cfg, "--seed", "7", "--out", a}).code == kExitOk);
  REQUIRE(run_cli({"demo", "--config", cfg, "--seed", "7", "--out", b}).code == kExitOk);

  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto other = fs::path(b) / e.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(slurp(e.path()) == slurp(other));
    ++compared;
  }
  CHECK(compared >= 8);
  CHECK(fs::exists(fs::path(a) / "report.csv"));

  const auto lines = csv::read_lines(fs::path(a) / "dataset_test.csv");
  const auto idx = csv::split_line(lines.at(1)).at(0);
  const auto r = run_cli({"explain", "--config", cfg, "--out", a, "--primary", "auto", "--sample", idx});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("sample") != std::string::npos);
  CHECK(run_cli({"explain", "--config", cfg, "--out", a, "--primary", "auto", "--sample", "999999"}).code ==
        kExitValidation);
}

TEST_CASE("config parse and serialize round trip") {
  RunConfig cfg;
  cfg.seed = 42;
  cfg.epsilon = 0.25;
  cfg.topk.reset();
  cfg.primary = {"LOGIT-1", "ZDET-10-2"};
  cfg.families = {"LOGIT", "ZDET"};
  CHECK(parse_config(serialize_config(cfg)) == cfg);
  CHECK(parse_config(serialize_config(RunConfig{})) == RunConfig{});
  CHECK_THROWS_AS(parse_config("no_such_key = 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("epsilon = -1\n"), ValidationError);
}
