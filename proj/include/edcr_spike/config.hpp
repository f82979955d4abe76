#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edcr_spike/model_pool.hpp"

namespace edcr_spike::cli {

// Flat `key = value` run configuration. Lists are comma separated; `#` starts a comment.
struct RunConfig {
  std::string data;  // price CSV; empty selects the synthetic generator
  std::string symbol = "SYNTH";
  std::uint64_t seed = 7;

  std::size_t synthetic_length = 1000;
  double synthetic_start = 100.0;
  double synthetic_drift = 0.0002;
  double synthetic_vol = 0.01;
  std::string synthetic_jumps = "auto";  // "auto", "none" or index:sigmas list

  std::size_t label_window = 20;
  double label_k = 2.0;
  std::size_t sample_window = 20;
  double split_ratio = 0.6;

  // lr:epochs:feature_fraction:positive_weight; seeds derive from `seed`.
  std::vector<pool::LogisticParams> logit_variants;
  std::vector<pool::ZScoreGridPoint> zdet_grid;
  std::vector<std::string> import_preds;

  std::vector<std::string> primary;  // empty: not designated; {"auto"}: best train F1/recall/precision
  double epsilon = 0.1;
  std::optional<std::size_t> topk = 200;  // nullopt: filtering disabled ("all")
  std::vector<std::string> families;      // empty: one family per model-name prefix
  std::string out = "edcr_out";

  RunConfig();
  bool operator==(const RunConfig&) const = default;
};

// Throws ValidationError on unknown keys or malformed values.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg, bool include_output_dir = true);

// Applies one `key = value` assignment (shared by the parser and flag overrides).
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

}  // namespace edcr_spike::cli
