#pragma once

#include <functional>
#include <string>
#include <vector>

namespace dissmps::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string measured;
  std::string expected;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct Options {
  std::vector<int> only;  // empty runs every criterion
  std::function<void(const CriterionResult&)> on_result;
  std::function<void(const std::string&)> log;
};

int criterion_count();
CriterionResult run_criterion(int id, const Options& opt = {});
std::vector<CriterionResult> run_all(const Options& opt = {});

std::string format_line(const CriterionResult& r);

}  // namespace dissmps::acceptance
