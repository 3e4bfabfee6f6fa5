// Acceptance gate: runs every criterion and prints one PASS/FAIL line each.
#include <iostream>

#include "gcltlab/acceptance.hpp"

int main() {
  int failed = 0;
  gcltlab::run_acceptance_suite([&failed](const gcltlab::CriterionResult& r) {
    std::cout << gcltlab::format_criterion(r) << std::endl;
    if (!r.passed) ++failed;
  });
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion(s) failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
