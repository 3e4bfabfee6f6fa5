#pragma once

#include <stdexcept>
#include <string>

namespace gcltlab {

// Input violates a documented precondition (bad parameters, malformed
// measures, unknown names). The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical guard tripped: state-space or tree size limits, CFL,
// non-finite values, cross-oracle discrepancy. The CLI maps this to exit
// code 3.
class NumericalGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

inline void guard(bool condition, const std::string& message) {
  if (!condition) throw NumericalGuardError(message);
}

}  // namespace gcltlab
