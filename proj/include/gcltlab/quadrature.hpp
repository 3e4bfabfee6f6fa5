#pragma once

#include <span>

#include "gcltlab/measure.hpp"

namespace gcltlab {

// E[f(sqrt(variance) Z)] for standard normal Z, by adaptive Gauss-Kronrod
// panels on [-12 sd, 12 sd] split at the given kinks. Independent of every
// PDE/tree/DP solver; used as the classical-limit oracle.
double normal_expect(const RealFunction& f, double variance,
                     std::span<const double> kinks = {});

// P(a <= sqrt(variance) Z <= b); endpoints may be infinite.
double normal_interval_probability(double a, double b, double variance);

}  // namespace gcltlab
