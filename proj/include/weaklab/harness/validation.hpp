#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace weaklab::harness {

// One numeric comparison. `within`: |measured - target| < tolerance, where
// tolerance already includes the per-criterion scale.
// `above`: measured > target (thresholds are not scaled).
struct Check {
  std::string name;
  double measured = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  std::string relation = "within";
  bool pass = false;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  bool pass = false;
  double runtime_s = 0.0;
  nlohmann::json details = nlohmann::json::object();
  std::string error;  // set when the scenario itself threw
};

struct ValidationOptions {
  std::vector<int> criteria;               // empty: all twelve
  std::map<int, double> tolerance_scale;   // default 1
  std::uint64_t seed = 20240611;
};

const std::vector<std::string>& criterion_titles();  // index id - 1

CriterionResult run_criterion(int id, const ValidationOptions& opt = {});
std::vector<CriterionResult> validate_all(const ValidationOptions& opt = {});

nlohmann::json to_json(const CriterionResult& r);
nlohmann::json report_json(const std::vector<CriterionResult>& results);
// "PASS  #3 ideal-weak convergence  slope=-2.01 (target -2 +- 0.2)  0.4 s"
std::string summary_line(const CriterionResult& r);

}  // namespace weaklab::harness
