#pragma once

#include <string>
#include <vector>

#include "gcltlab/measure.hpp"

namespace gcltlab {

// Named scalar payoff. Parameters follow a colon, comma separated:
//   identity, square, abs, tent (1 - min(|x|, 1)), one_minus_abs (1 - |x|),
//   const:c, call:k, dtheta:lo,hi, ramp_inner:a,b,eps, ramp_outer:a,b,eps.
// Interval endpoints accept "inf" and "-inf".
struct Payoff {
  std::string spec;
  RealFunction function;
  // Points where the payoff has a kink; used to split quadrature panels.
  std::vector<double> kinks;
};

Payoff parse_payoff(const std::string& spec);

}  // namespace gcltlab
