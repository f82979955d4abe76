#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "edcr_spike/config.hpp"

namespace edcr_spike::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitUsage = 64;

std::string usage();

// Runs one subcommand; args exclude the program name (args[0] is the subcommand).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Subcommands operating on an already resolved configuration.
void cmd_label(const RunConfig& cfg, std::ostream& out);
void cmd_featurize(const RunConfig& cfg, std::ostream& out);
void cmd_train(const RunConfig& cfg, std::ostream& out);
void cmd_import_preds(const RunConfig& cfg, std::ostream& out);
void cmd_learn(const RunConfig& cfg, std::ostream& out);
void cmd_apply(const RunConfig& cfg, std::ostream& out);
void cmd_eval(const RunConfig& cfg, std::ostream& out);
void cmd_ablate(const RunConfig& cfg, std::ostream& out);
void cmd_explain(const RunConfig& cfg, long long sample, std::ostream& out);
void cmd_demo(RunConfig cfg, std::ostream& out);

}  // namespace edcr_spike::cli
