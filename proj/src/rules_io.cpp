#include "edcr_spike/rules_io.hpp"

#include <fstream>

#include "edcr_spike/csv.hpp"
#include "edcr_spike/errors.hpp"

namespace edcr_spike::edcr {

namespace {

Label label_field(const nlohmann::json& j, const char* what) {
  const auto l = parse_label(j.get<std::string>());
  if (!l) throw ValidationError(std::string("invalid class in ") + what + ": " + j.dump());
  return *l;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace

nlohmann::json to_json(const RuleSet& rs) {
  nlohmann::json j;
  j["target_class"] = to_string(rs.target_class);
  j["epsilon"] = rs.epsilon;
  j["primary_model"] = rs.primary_model;
  if (rs.top_k) {
    j["filter"] = {{"method", "top_f1"}, {"k", *rs.top_k}};
  } else {
    j["filter"] = {{"method", "none"}};
  }
  j["DC"] = rs.detection;
  j["CC"] = nlohmann::json::array();
  for (const auto& [name, prior] : rs.correction) j["CC"].push_back({name, to_string(prior)});
  j["stats"] = {{"class", to_string(rs.stats.cls)},
                {"N", rs.stats.n_predicted},
                {"P", rs.stats.precision},
                {"R", rs.stats.recall},
                {"TP", rs.stats.true_positives},
                {"GT", rs.stats.ground_truth}};
  j["correction_stats"] = {{"class", to_string(rs.target_class)},
                           {"N", rs.correction_stats.n_predicted},
                           {"P", rs.correction_stats.precision}};
  return j;
}

RuleSet rule_set_from_json(const nlohmann::json& j) {
  try {
    RuleSet rs;
    rs.target_class = label_field(j.at("target_class"), "target_class");
    rs.epsilon = j.at("epsilon").get<double>();
    rs.primary_model = j.at("primary_model").get<std::string>();
    const auto& f = j.at("filter");
    const auto method = f.at("method").get<std::string>();
    if (method == "top_f1") {
      rs.top_k = f.at("k").get<std::size_t>();
    } else if (method != "none") {
      throw ValidationError("unknown filter method '" + method + "'");
    }
    rs.detection = j.at("DC").get<std::vector<std::string>>();
    for (const auto& p : j.at("CC")) {
      if (!p.is_array() || p.size() != 2) throw ValidationError("CC entries must be [condition, prior_class]");
      rs.correction.emplace_back(p[0].get<std::string>(), label_field(p[1], "CC"));
    }
    const auto& s = j.at("stats");
    rs.stats.cls = s.contains("class") ? label_field(s.at("class"), "stats") : Label::no;
    rs.stats.n_predicted = s.at("N").get<std::size_t>();
    rs.stats.precision = s.at("P").get<double>();
    rs.stats.recall = s.at("R").get<double>();
    rs.stats.true_positives = s.value("TP", std::size_t{0});
    rs.stats.ground_truth = s.value("GT", std::size_t{0});
    if (j.contains("correction_stats")) {
      rs.correction_stats.n_predicted = j["correction_stats"].at("N").get<std::size_t>();
      rs.correction_stats.precision = j["correction_stats"].at("P").get<double>();
    }
    return rs;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed rule set: ") + e.what());
  }
}

void write_rules(const RuleSet& rs, const std::filesystem::path& path) {
  csv::write_file(path, to_json(rs).dump(2) + "\n");
}

RuleSet read_rules(const std::filesystem::path& path) { return rule_set_from_json(read_json(path)); }

nlohmann::json to_json(const Explanation& e) {
  return {{"sample_index", e.sample_index},
          {"base", to_string(e.base)},
          {"corrected", to_string(e.corrected)},
          {"flipped", e.flipped},
          {"fired_detection_conditions", e.detection_fired},
          {"fired_correction_pairs", e.correction_fired}};
}

Explanation explanation_from_json(const nlohmann::json& j) {
  try {
    Explanation e;
    e.sample_index = j.at("sample_index").get<std::size_t>();
    e.base = label_field(j.at("base"), "base");
    e.corrected = label_field(j.at("corrected"), "corrected");
    e.flipped = j.at("flipped").get<bool>();
    e.detection_fired = j.at("fired_detection_conditions").get<std::vector<std::string>>();
    e.correction_fired = j.at("fired_correction_pairs").get<std::vector<std::string>>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("malformed explanation: ") + ex.what());
  }
}

void write_explanations(const std::vector<Explanation>& es, const std::filesystem::path& path) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : es) arr.push_back(to_json(e));
  csv::write_file(path, arr.dump(1) + "\n");
}

std::vector<Explanation> read_explanations(const std::filesystem::path& path) {
  const auto j = read_json(path);
  if (!j.is_array()) throw ValidationError(path.string() + ": expected a JSON array");
  std::vector<Explanation> out;
  for (const auto& e : j) out.push_back(explanation_from_json(e));
  return out;
}

}  // namespace edcr_spike::edcr
