#include "gcltlab/acceptance.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "gcltlab/g_limit.hpp"
#include "gcltlab/kernel_dp.hpp"
#include "gcltlab/limit_harness.hpp"
#include "gcltlab/measure.hpp"
#include "gcltlab/payoff.hpp"
#include "gcltlab/quadrature.hpp"

namespace gcltlab {

namespace {

using Rng = std::mt19937_64;

struct Outcome {
  bool passed;
  std::string detail;
};

DiscreteMeasure random_measure(Rng& rng, int max_support, double radius) {
  std::uniform_int_distribution<int> size_dist(1, max_support);
  std::uniform_real_distribution<double> point(-radius, radius);
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  const int size = size_dist(rng);
  std::vector<Atom> atoms;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    atoms.push_back({point(rng), mass(rng)});
    total += atoms.back().weight;
  }
  for (Atom& a : atoms) a.weight /= total;
  return DiscreteMeasure(std::move(atoms));
}

MeasureSet random_set(Rng& rng, int max_extremes, int max_support, double radius) {
  std::uniform_int_distribution<int> count(1, max_extremes);
  std::vector<DiscreteMeasure> extremes;
  const int k = count(rng);
  for (int j = 0; j < k; ++j) extremes.push_back(random_measure(rng, max_support, radius));
  return MeasureSet(std::move(extremes));
}

// History-dependent pseudo-random strategy: weights are a deterministic
// function of (seed, step, history).
KernelStrategy random_strategy(std::uint64_t seed, std::size_t extremes) {
  return KernelStrategy([seed, extremes](int step, History history) {
    std::vector<std::uint32_t> key{static_cast<std::uint32_t>(seed),
                                   static_cast<std::uint32_t>(seed >> 32),
                                   static_cast<std::uint32_t>(step)};
    for (double x : history) {
      const auto bits = std::bit_cast<std::uint64_t>(x);
      key.push_back(static_cast<std::uint32_t>(bits));
      key.push_back(static_cast<std::uint32_t>(bits >> 32));
    }
    std::seed_seq seq(key.begin(), key.end());
    Rng rng(seq);
    std::vector<double> w(extremes, 0.0);
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.3) {
      w[std::uniform_int_distribution<std::size_t>(0, extremes - 1)(rng)] = 1.0;
      return w;
    }
    double total = 0.0;
    for (double& x : w) total += (x = std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    for (double& x : w) x /= total;
    return w;
  });
}

Outcome variance_duality() {
  Rng rng(20240101);
  double worst_gap = 0.0, worst_below = 0.0, worst_lower = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const MeasureSet set = random_set(rng, 4, 5, 2.0);
    const VarianceBounds bounds = variance_bounds(set);
    const VarianceOracleEstimate est = variance_oracle(set, 0.01);

    double vertex_min = std::numeric_limits<double>::infinity();
    for (const auto& m : set.extremes()) {
      double mean = 0.0, var = 0.0;
      for (const Atom& a : m.atoms()) mean += a.weight * a.point;
      for (const Atom& a : m.atoms()) var += a.weight * (a.point - mean) * (a.point - mean);
      vertex_min = std::min(vertex_min, var);
    }
    worst_gap = std::max(worst_gap, bounds.upper - est.upper);
    worst_below = std::max(worst_below, est.upper - bounds.upper);
    worst_lower = std::max(worst_lower, std::abs(bounds.lower - vertex_min));
  }
  const bool ok = worst_below <= 1e-9 && worst_gap <= 5e-3 && worst_lower <= 1e-12;
  return {ok, fmt::format("max(oracle-Vup)={:.3e} max(Vup-oracle)={:.3e} max|Vlow-vertex|={:.3e}",
                          worst_below, worst_gap, worst_lower)};
}

Outcome dp_oracle_equivalence() {
  Rng rng(777);
  double worst = 0.0;
  std::uniform_int_distribution<int> horizon(1, 3);
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const MeasureSet set = random_set(rng, 3, 3, 2.0);
    const HorizonModel model(set, horizon(rng));
    const double a = coef(rng), b = coef(rng), c = coef(rng);
    std::vector<double> weights(static_cast<std::size_t>(model.horizon));
    for (double& w : weights) w = coef(rng);
    const PathPayoff payoff = [=](History x) {
      double linear = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) linear += weights[i] * x[i];
      return std::sin(a * linear) + b * *std::ranges::max_element(x) +
             c * (x.front() - x.back()) * (x.front() - x.back());
    };
    worst = std::max(worst, std::abs(sup_expect_history(model, payoff) -
                                     brute_force_sup(model, payoff)));
  }
  return {worst <= 1e-12, fmt::format("max |dp - brute force| = {:.3e} over 100 models", worst)};
}

Outcome sandwich_invariants() {
  Rng rng(4242);
  std::uniform_int_distribution<int> horizon(1, 4);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::size_t nodes = 0, violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const MeasureSet set = random_set(rng, 3, 3, 2.0);
    const HorizonModel model(set, horizon(rng));
    const KernelStrategy strategy = random_strategy(rng(), set.size());
    const double a = coef(rng), b = coef(rng);
    const auto range = conditional_range_check(
        model, strategy, [a, b](double x) { return std::sin(a * x) + b * x * x; });
    const auto variance = conditional_variance_check(model, strategy);
    nodes += range.nodes_checked + variance.nodes_checked;
    violations += range.violations.size() + variance.violations.size();
  }
  return {violations == 0, fmt::format("{} violations over {} node checks, 1000 strategies",
                                       violations, nodes)};
}

Outcome lln_example52() {
  const MeasureSet set = example52_set();
  const RealFunction phi = [](double x) { return d_theta(x, 0.0, 1.0); };
  const double v10 = sup_expect_sum(HorizonModel(set, 10), phi, 1.0 / 10);
  const double v200 = sup_expect_sum(HorizonModel(set, 200), phi, 1.0 / 200);
  return {v200 <= 0.05 && v200 < v10,
          fmt::format("value(n=200)={:.6g} (<=0.05: {}), value(n=10)={:.6g} (strict decrease: {})",
                      v200, v200 <= 0.05, v10, v200 < v10)};
}

Outcome clt_classical() {
  const Payoff tent = parse_payoff("tent");
  const double dp = centered_sum_sup(HorizonModel(example51_set(), 512), tent.function,
                                     MixtureGrid{1}, ValueGridSpec{0.01});
  const double exact = normal_expect(tent.function, 0.25, tent.kinks);
  const double err = std::abs(dp - exact);
  return {err <= 0.01, fmt::format("dp={:.6f} quadrature N(0,1/4)={:.6f} |err|={:.3e}", dp, exact, err)};
}

Outcome clt_mean_uncertainty() {
  const Payoff tent = parse_payoff("tent");
  const HorizonModel model(example52_set(), 512);
  std::vector<double> values;
  for (int M : {10, 50, 100})
    values.push_back(centered_sum_sup(model, tent.function, MixtureGrid{M}, ValueGridSpec{0.01}));
  const double limit = g_expect(tent.function, ThetaInterval(0.0, 0.25), GMethod::pde).value;
  const double err = std::abs(values.back() - limit);
  const bool monotone = values[0] <= values[1] && values[1] <= values[2];
  return {err <= 0.02 && monotone,
          fmt::format("dp(M=10,50,100)=({:.6f},{:.6f},{:.6f}) pde={:.6f} |err|={:.3e}",
                      values[0], values[1], values[2], limit, err)};
}

Outcome solver_cross_oracle() {
  const std::vector<std::string> battery{"square", "tent", "ramp_inner:-1,1,0.1",
                                         "ramp_outer:0,inf,0.1"};
  const std::vector<ThetaInterval> thetas{{0.25, 0.25}, {0.0, 0.25}, {1.0, 4.0}};
  double worst = 0.0;
  std::string worst_case;
  for (const auto& spec : battery) {
    const Payoff p = parse_payoff(spec);
    for (const auto& theta : thetas) {
      const double pde = g_expect(p.function, theta, GMethod::pde).value;
      const double tree = g_expect(p.function, theta, GMethod::tree).value;
      if (std::abs(pde - tree) >= worst) {
        worst = std::abs(pde - tree);
        worst_case = fmt::format("{} theta=[{},{}]", spec, theta.sigma2_low, theta.sigma2_high);
      }
    }
  }
  return {worst <= 0.01, fmt::format("max |pde - tree| = {:.3e} ({})", worst, worst_case)};
}

Outcome capacity_bracket() {
  const ThetaInterval theta(0.25, 0.25);
  const double target = normal_interval_probability(-1.0, 1.0, 0.25);
  const CapacityBracket fine = capacity_interval(-1.0, 1.0, theta, 0.01);
  const bool contains = fine.lower <= target && target <= fine.upper;
  const bool narrow = fine.upper - fine.lower <= 0.02;

  std::vector<CapacityBracket> sweep;
  for (double eps : {0.01, 0.05, 0.1}) sweep.push_back(capacity_interval(-1.0, 1.0, theta, eps));
  bool monotone = true;
  for (std::size_t i = 1; i < sweep.size(); ++i)
    monotone = monotone && sweep[i].lower <= sweep[i - 1].lower && sweep[i].upper >= sweep[i - 1].upper;
  return {contains && narrow && monotone,
          fmt::format("eps=0.01 bracket [{:.6f},{:.6f}] target {:.6f}; monotone in eps: {}",
                      fine.lower, fine.upper, target, monotone)};
}

Outcome example53_failure() {
  const std::vector<int> ks{10, 100, 1000};
  const std::vector<int> ns{16};
  const Example53Report report = example_5_3(ks, ns);
  const double v10 = report.rows[0].dp_value;
  const double v100 = report.rows[1].dp_value;
  const double v1000 = report.rows[2].dp_value;
  const bool ok = v1000 >= v100 && v100 >= v10 && v1000 >= 0.9;
  return {ok, fmt::format("K=10,100,1000 -> ({:.6f},{:.6f},{:.6f}); classical {:.6f}", v10, v100,
                          v1000, report.classical_value)};
}

Outcome mc_lower_bound() {
  const ThetaInterval theta(0.0, 0.25);
  const double lo = std::sqrt(theta.sigma2_low), hi = std::sqrt(theta.sigma2_high);
  const RealFunction square = [](double x) { return x * x; };
  const double pde = g_expect(square, theta, GMethod::pde).value;
  const EmbeddedPathPayoff terminal_square = [](const EmbeddedPath& p) {
    const double y = p.knots().back();
    return y * y;
  };

  Rng rng(99);
  std::uniform_real_distribution<double> level(lo, hi);
  std::uniform_real_distribution<double> threshold(-0.3, 0.3);
  std::vector<VolatilityControl> controls;
  controls.push_back([s = level(rng)](double, std::span<const double>) { return s; });
  controls.push_back([a = level(rng), b = level(rng), c = level(rng), d = level(rng)](
                         double t, std::span<const double>) {
    const double pieces[] = {a, b, c, d};
    return pieces[std::min(3, static_cast<int>(t * 4.0))];
  });
  controls.push_back([lo, hi, c = threshold(rng)](double, std::span<const double> path) {
    return path.back() > c ? hi : lo;
  });
  controls.push_back([lo, hi, c = threshold(rng)](double, std::span<const double> path) {
    return *std::ranges::max_element(path) > c ? lo : hi;
  });
  controls.push_back([lo, hi, s = level(rng)](double t, std::span<const double> path) {
    return std::clamp(s + 0.5 * std::abs(path.back()) - 0.1 * t, lo, hi);
  });

  double worst = -std::numeric_limits<double>::infinity();
  std::string summary;
  for (std::size_t i = 0; i < controls.size(); ++i) {
    const McEstimate est = control_mc_lower_bound(terminal_square, theta, controls[i],
                                                  McConfig{100000, 32, 1000 + i});
    worst = std::max(worst, est.estimate - 3.0 * est.std_error - pde);
    summary += fmt::format("{}{:.5f}+-{:.5f}", i ? ", " : "", est.estimate, est.std_error);
  }
  return {worst <= 0.0, fmt::format("pde={:.6f}; estimates {}", pde, summary)};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  Outcome (*run)();
};

constexpr Criterion kCriteria[] = {
    {1, "variance duality", 60.0, variance_duality},
    {2, "DP-oracle equivalence", 30.0, dp_oracle_equivalence},
    {3, "conditional sandwich invariants", 60.0, sandwich_invariants},
    {4, "LLN, example 5.2", 60.0, lln_example52},
    {5, "CLT classical reduction", 120.0, clt_classical},
    {6, "CLT mean-uncertainty", 600.0, clt_mean_uncertainty},
    {7, "limit-solver cross-oracle", 120.0, solver_cross_oracle},
    {8, "capacity bracket", 60.0, capacity_bracket},
    {9, "example 5.3 CLT failure", 120.0, example53_failure},
    {10, "Monte Carlo lower bound", 120.0, mc_lower_bound},
};

}  // namespace

std::vector<CriterionResult> run_acceptance_suite(const CriterionCallback& on_result,
                                                  const std::vector<int>& only) {
  std::vector<CriterionResult> results;
  for (const Criterion& c : kCriteria) {
    if (!only.empty() && std::ranges::find(only, c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome{false, ""};
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.limit_seconds;
    if (!in_time) outcome.detail += fmt::format(" [over time limit {}s]", c.limit_seconds);
    results.push_back({c.id, c.name, outcome.passed && in_time, outcome.detail, seconds,
                       c.limit_seconds});
    if (on_result) on_result(results.back());
  }
  return results;
}

std::string format_criterion(const CriterionResult& r) {
  return fmt::format("[{}] criterion {:>2} {:<32} {:7.2f}s  {}", r.passed ? "PASS" : "FAIL", r.id,
                     r.name, r.seconds, r.detail);
}

}  // namespace gcltlab
