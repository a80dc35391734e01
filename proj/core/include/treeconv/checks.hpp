#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace treeconv {

struct CheckResult {
  std::string identity;
  bool passed = true;
  double max_error = 0.0;
  double tolerance = 0.0;
  int instances = 0;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  bool passed = true;
  std::vector<CheckResult> checks;
};

std::vector<std::string> suite_names();  // transforms, operad, nevanlinna

// `fault` is a prefix of the identity names whose error is perturbed, to exercise
// the failure path. Throws InvalidSpec on an unknown suite.
SuiteReport run_suite(const std::string& suite, std::uint64_t seed, const std::string& fault = {});

nlohmann::json to_json(const SuiteReport& report);

}  // namespace treeconv
