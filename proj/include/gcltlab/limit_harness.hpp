#pragma once

#include <span>
#include <string>
#include <vector>

#include "gcltlab/g_limit.hpp"
#include "gcltlab/kernel_dp.hpp"
#include "gcltlab/measure.hpp"

namespace gcltlab {

// One row of a convergence table. K, M and h are 0 when not applicable.
struct ConvergenceRow {
  std::string experiment;
  int n = 0;
  int K = 0;
  int M = 0;
  double h = 0.0;
  double dp_value = 0.0;
  double limit_value = 0.0;
  double abs_error = 0.0;
  double runtime_ms = 0.0;
};

// Distance from x to [lo, hi].
double d_theta(double x, double lo, double hi);

// max of phi over the mean interval, within eps, for phi Lipschitz with the
// given bound: a grid of spacing eps / lipschitz followed by a refinement
// pass around the best node.
double lln_limit(const RealFunction& phi, MeanInterval interval, double lipschitz,
                 double eps = 1e-6);

// Rows pairing sup E[phi(S_n / n)] with the LLN limit, in ascending n.
std::vector<ConvergenceRow> lln_converge(const MeasureSet& base, const RealFunction& phi,
                                         double lipschitz, std::span<const int> n_list,
                                         const std::string& experiment = "lln");

struct CltOptions {
  int M = 100;
  double h = 0.01;
  GExpectOptions limit{};
};

// Rows pairing the centered-sum DP with the G-expectation for
// theta = [lower variance, upper variance], in ascending n.
std::vector<ConvergenceRow> clt_converge(const MeasureSet& base, const RealFunction& phi,
                                         std::span<const int> n_list, CltOptions options,
                                         const std::string& experiment = "clt");

// Builtin measure sets.
MeasureSet example51_set();             // {Bernoulli(1/2)}
MeasureSet example52_set();             // hull{delta_0, delta_1}
MeasureSet example53_set(int K);        // {P_k : 1 <= k <= K}

struct Example53Report {
  // One row per (K, n); dp_value is sup E[phi(S_n / sqrt(n))] over the
  // truncated family, limit_value the classical N(0, 1) value.
  std::vector<ConvergenceRow> rows;
  double classical_value = 0.0;
  // For every n, values are nondecreasing along the ascending K list.
  bool monotone_in_K = true;
};

// phi defaults to 1 - |x|.
Example53Report example_5_3(std::span<const int> K_list, std::span<const int> n_list,
                            const RealFunction& phi = {});

}  // namespace gcltlab
