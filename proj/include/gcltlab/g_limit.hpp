#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "gcltlab/kernel_dp.hpp"
#include "gcltlab/measure.hpp"
#include "gcltlab/value_grid.hpp"

namespace gcltlab {

// Variance uncertainty interval [sigma2_low, sigma2_high].
struct ThetaInterval {
  double sigma2_low;
  double sigma2_high;

  ThetaInterval(double low, double high);
};

// G(a) = (sigma2_high a^+ - sigma2_low a^-) / 2.
double g_function(double a, const ThetaInterval& theta);

struct GHeatConfig {
  ThetaInterval theta;
  double x_radius;
  double h;
  int time_steps;
  RealFunction terminal;

  // Radius 4 sigma_high (1 + margin), at least 1, and the fewest time steps
  // satisfying the CFL bound.
  static GHeatConfig with_defaults(ThetaInterval theta, RealFunction terminal,
                                   double h = 0.01, double margin = 0.25);
};

struct GSolution {
  double value_at_origin;
  ValueGrid grid;
};

// Explicit finite differences for u_t = G(u_xx), u(0, .) = terminal, on
// [-L, L] with boundary nodes held at their terminal values. Returns u(1, 0),
// the G-expectation of terminal(xi) for xi ~ N(0, theta).
GSolution solve_g_heat(const GHeatConfig& config);

struct TreeConfig {
  int steps = 1024;
  // Grid step is sigma_high sqrt(1/steps) / subdivisions.
  int subdivisions = 10;
  // Number of volatility levels between the endpoints (2 = endpoints only).
  int volatility_levels = 2;
  double margin = 0.25;
};

// Independent tree recursion for the same quantity:
// v_k(x) = max over sigma^2 in a volatility grid of
//          (v_{k+1}(x + sigma sqrt(dt)) + v_{k+1}(x - sigma sqrt(dt))) / 2.
double tree_g_expect(const RealFunction& payoff, const ThetaInterval& theta,
                     TreeConfig config = {});

enum class GMethod { pde, tree, both };

struct GExpectation {
  double value;
  std::optional<double> discrepancy;
};

struct GExpectOptions {
  double h = 0.01;
  TreeConfig tree{};
  double tolerance = 0.01;
};

// Dispatch; with `both`, returns the PDE value and fails with
// NumericalGuardError when |pde - tree| exceeds the tolerance.
GExpectation g_expect(const RealFunction& payoff, const ThetaInterval& theta,
                      GMethod method, GExpectOptions options = {});

struct CapacityBracket {
  double lower;
  double upper;
  double epsilon;
};

// Ramp functions squeezing the indicator of [a, b]:
// 1_[a+eps, b-eps] <= inner <= 1_[a, b] <= outer <= 1_[a-eps, b+eps].
// Infinite endpoints are allowed.
double inner_ramp(double x, double a, double b, double eps);
double outer_ramp(double x, double a, double b, double eps);

// Bracket of the capacity of [a, b] under N(0, theta): G-expectations of the
// inner and outer ramps. The PDE step defaults to min(0.01, eps / 4).
CapacityBracket capacity_interval(double a, double b, const ThetaInterval& theta,
                                  double epsilon, double h = 0.0);

// Adapted volatility control: sigma(t, path so far) with path values
// Y_0 = 0, ..., Y_k at times 0, dt, ..., k dt.
using VolatilityControl = std::function<double(double, std::span<const double>)>;

using EmbeddedPathPayoff = std::function<double(const EmbeddedPath&)>;

struct McEstimate {
  double estimate;
  double std_error;
};

struct McConfig {
  std::size_t paths = 100000;
  int steps = 64;
  std::uint64_t seed = 0;
};

// Euler simulation Y_{k+1} = Y_k + sigma(t_k, Y_0..Y_k) sqrt(dt) xi_k. Any
// admissible control gives a statistical lower bound of the G-expectation.
// Path i draws its shocks from an engine seeded by (seed, i), so results do
// not depend on the thread count.
McEstimate control_mc_lower_bound(const EmbeddedPathPayoff& payoff,
                                  const ThetaInterval& theta,
                                  const VolatilityControl& control, McConfig config);

}  // namespace gcltlab
