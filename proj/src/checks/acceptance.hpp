#pragma once

#include <functional>
#include <string>
#include <vector>

namespace gwr::checks {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Criterion {
  int id = 0;
  std::string title;
  bool fast = false;  // part of the default selftest
  std::function<CriterionResult()> run;
};

// Criteria 1..13 in order.
const std::vector<Criterion>& acceptance_criteria();

// Runs one criterion, timing it and turning exceptions into failures.
CriterionResult run_criterion(const Criterion& criterion);

// "PASS  3  title  (1.2 s)  detail"
std::string format_result(const CriterionResult& result);

}  // namespace gwr::checks
