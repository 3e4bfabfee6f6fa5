#pragma once

#include <functional>
#include <string>
#include <vector>

namespace gcltlab {

struct CriterionResult {
  int id;
  std::string name;
  bool passed;
  std::string detail;
  double seconds;
  double time_limit_seconds;
};

using CriterionCallback = std::function<void(const CriterionResult&)>;

// Runs the acceptance criteria in order (all ten when `only` is empty) and
// reports each result through `on_result` as soon as it is known.
std::vector<CriterionResult> run_acceptance_suite(const CriterionCallback& on_result = {},
                                                  const std::vector<int>& only = {});

std::string format_criterion(const CriterionResult& result);

}  // namespace gcltlab
