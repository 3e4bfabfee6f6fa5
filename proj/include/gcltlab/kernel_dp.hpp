#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gcltlab/measure.hpp"

namespace gcltlab {

// i.i.d. kernel model: every step draws from the same hull `base`.
struct HorizonModel {
  MeasureSet base;
  int horizon;

  HorizonModel(MeasureSet base_set, int n);
};

using History = std::span<const double>;

// Functional of a whole realized path (x_1, ..., x_n).
using PathPayoff = std::function<double(History)>;

// History-dependent choice of a measure in the hull. `choose(step, history)`
// gets the 1-based step i and the i - 1 realized points and returns mixture
// weights over base.extremes(). Step 1 with an empty history plays the role of
// the initial law.
class KernelStrategy {
 public:
  using Chooser = std::function<std::vector<double>(int, History)>;

  explicit KernelStrategy(Chooser chooser) : chooser_(std::move(chooser)) {}

  // Weights at (step, history), validated against `extremes`.
  std::vector<double> choose(int step, History history, std::size_t extremes) const;

  // Always the same weights.
  static KernelStrategy constant(std::vector<double> weights);

 private:
  Chooser chooser_;
};

// Exact E_P[payoff(X_1..X_n)] for the law built from the strategy's kernels.
double joint_expect(const HorizonModel& model, const KernelStrategy& strategy,
                    const PathPayoff& payoff);

// Exact sup over all strategies by backward induction on the history tree.
// Guard: (number of distinct support points)^n <= 1e7.
double sup_expect_history(const HorizonModel& model, const PathPayoff& payoff);

// Exact sup over strategies of E[payoff(scaling * S_n)], S_n = X_1 + ... + X_n.
// Partial sums are tracked exactly on the integer lattice generated by the
// support points (which must be rational with denominator <= 1e6).
// Guard: at most 1e7 reachable sums.
double sup_expect_sum(const HorizonModel& model, const RealFunction& payoff,
                      double scaling);

// Independent oracle for sup_expect_history: enumerates the joint
// expectations of every history-dependent assignment of extreme measures
// (n <= 3, at most 3 extremes of at most 3 atoms each) and returns the max.
double brute_force_sup(const HorizonModel& model, const PathPayoff& payoff);

struct NodeViolation {
  int step;
  std::vector<double> history;
  double value;
  double lower;
  double upper;
};

struct CheckReport {
  std::size_t nodes_checked = 0;
  double min_observed = 0.0;
  double max_observed = 0.0;
  std::vector<NodeViolation> violations;

  bool ok() const { return violations.empty(); }
};

// At every reachable node, checks that the conditional expectation of f
// under the chosen kernel lies in [-U(-f), U(f)] (tolerance 1e-12).
CheckReport conditional_range_check(const HorizonModel& model,
                                    const KernelStrategy& strategy,
                                    const RealFunction& f);

// At every reachable node, checks that the conditional variance of the chosen
// kernel lies in [lower variance, upper variance] (tolerance 1e-12).
CheckReport conditional_variance_check(const HorizonModel& model,
                                       const KernelStrategy& strategy);

// Search set of mixtures with weights in {0, 1/M, ..., 1}.
struct MixtureGrid {
  int resolution = 1;
};

struct ValueGridSpec {
  double h = 0.01;
  // Grid radius is 4 sqrt(upper variance) (1 + margin).
  double margin = 0.1;
  // Explicit radius; 0 picks the default above.
  double radius = 0.0;
};

// sup over strategies of E[payoff(sum_i (X_i - E[X_i | past]) / sqrt(n))],
// computed by backward induction on a uniform x-grid with linear
// interpolation, maximizing over the mixture grid at every node. The result
// is a lower-bound approximation of the sup over the full hull that improves
// as M grows and h shrinks.
double centered_sum_sup(const HorizonModel& model, const RealFunction& payoff,
                        MixtureGrid grid, ValueGridSpec spec);

// Exact E_P[payoff(sum_i (X_i - E_P[X_i | past]) / sqrt(n))] for one
// strategy, by enumerating the history tree. Guard as sup_expect_history.
double strategy_centered_expect(const HorizonModel& model,
                                const KernelStrategy& strategy,
                                const RealFunction& payoff);

// Target conditional variance as a function of (step, history).
using VarianceTarget = std::function<double(int, History)>;

// Two-point mixture strategy w * P_down + (1 - w) * P_up with
// w = (V_up - target) / (V_up - V_down); constantly P_up when the variance
// bounds coincide.
class VolatilityMatchingStrategy {
 public:
  VolatilityMatchingStrategy(const HorizonModel& model, VarianceTarget target,
                             HullPoint up, HullPoint down);

  // Weight on P_down for a given target variance.
  double down_weight(double target) const;

  const KernelStrategy& strategy() const { return strategy_; }
  double variance_upper() const { return v_up_; }
  double variance_lower() const { return v_down_; }

  // Realized conditional variance at every reachable node, in depth-first
  // order. The mixture's variance generally differs from the target because
  // variance is not affine in the mixture weights.
  std::vector<double> realized_variances(const HorizonModel& model) const;

 private:
  double v_up_;
  double v_down_;
  HullPoint up_;
  HullPoint down_;
  VarianceTarget target_;
  KernelStrategy strategy_;
};

// Convenience: locate P_up / P_down for the model and build the strategy.
VolatilityMatchingStrategy volatility_matching_strategy(const HorizonModel& model,
                                                        VarianceTarget target);

// Piecewise-linear embedding of (0, x_1, ..., x_n) at times (0, 1/n, ..., 1).
class EmbeddedPath {
 public:
  explicit EmbeddedPath(std::vector<double> knots);

  std::size_t steps() const { return knots_.size() - 1; }
  // Knot values including the leading 0.
  std::span<const double> knots() const { return knots_; }
  double at(double t) const;
  std::vector<double> samples(std::size_t count) const;

 private:
  std::vector<double> knots_;
};

EmbeddedPath path_embed(std::span<const double> x);

enum class PathFunctionalKind { terminal, running_max, time_average, lipschitz_composite };

PathFunctionalKind parse_path_functional_kind(const std::string& name);

// A payoff on embedded paths. For lipschitz_composite, `outer` is applied to
// the `inner` functional (which must not itself be a composite).
struct PathFunctional {
  PathFunctionalKind kind = PathFunctionalKind::terminal;
  PathFunctionalKind inner = PathFunctionalKind::terminal;
  RealFunction outer;
};

double path_functional_eval(const PathFunctional& functional, const EmbeddedPath& path);

}  // namespace gcltlab
