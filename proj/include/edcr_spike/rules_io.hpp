#pragma once

#include <filesystem>
#include <vector>

#include "edcr_spike/edcr.hpp"
#include "json.hpp"

namespace edcr_spike::edcr {

// {target_class, epsilon, primary_model, filter:{method,k}, DC:[...], CC:[[name, prior]], stats:{N,P,R}, ...}
nlohmann::json to_json(const RuleSet& rs);
RuleSet rule_set_from_json(const nlohmann::json& j);

void write_rules(const RuleSet& rs, const std::filesystem::path& path);
RuleSet read_rules(const std::filesystem::path& path);

nlohmann::json to_json(const Explanation& e);
Explanation explanation_from_json(const nlohmann::json& j);

void write_explanations(const std::vector<Explanation>& es, const std::filesystem::path& path);
std::vector<Explanation> read_explanations(const std::filesystem::path& path);

}  // namespace edcr_spike::edcr
