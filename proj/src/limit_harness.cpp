#include "gcltlab/limit_harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "gcltlab/error.hpp"

namespace gcltlab {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<int> sorted_horizons(std::span<const int> n_list) {
  std::vector<int> out(n_list.begin(), n_list.end());
  require(!out.empty(), "n list is empty");
  for (int n : out) require(n >= 1, "every n must be at least 1");
  std::ranges::sort(out);
  return out;
}

}  // namespace

double d_theta(double x, double lo, double hi) {
  require(lo <= hi, "d_theta needs lo <= hi");
  if (x < lo) return lo - x;
  if (x > hi) return x - hi;
  return 0.0;
}

double lln_limit(const RealFunction& phi, MeanInterval interval, double lipschitz, double eps) {
  require(std::isfinite(interval.lower) && std::isfinite(interval.upper) &&
              interval.lower <= interval.upper,
          "invalid mean interval");
  require(lipschitz > 0.0 && eps > 0.0, "lipschitz bound and eps must be positive");
  const double width = interval.upper - interval.lower;
  if (width == 0.0) return phi(interval.lower);

  const double spacing = eps / lipschitz;
  const double cells = std::ceil(width / spacing);
  guard(cells <= 1e7, "LLN limit grid exceeds 1e7 points");
  const auto count = static_cast<long>(cells);
  const double step = width / static_cast<double>(count);

  double best = -std::numeric_limits<double>::infinity();
  long best_k = 0;
  for (long k = 0; k <= count; ++k) {
    const double v = phi(interval.lower + static_cast<double>(k) * step);
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  // Refine inside the neighbouring cells.
  const double lo = interval.lower + std::max(0.0, static_cast<double>(best_k - 1) * step);
  const double hi = std::min(interval.upper, interval.lower + static_cast<double>(best_k + 1) * step);
  for (int k = 0; k <= 1000; ++k) best = std::max(best, phi(lo + (hi - lo) * k / 1000.0));
  return best;
}

std::vector<ConvergenceRow> lln_converge(const MeasureSet& base, const RealFunction& phi,
                                         double lipschitz, std::span<const int> n_list,
                                         const std::string& experiment) {
  const double limit = lln_limit(phi, mean_interval(base), lipschitz);
  std::vector<ConvergenceRow> rows;
  for (int n : sorted_horizons(n_list)) {
    const auto start = Clock::now();
    const double v = sup_expect_sum(HorizonModel(base, n), phi, 1.0 / n);
    rows.push_back({experiment, n, 0, 0, 0.0, v, limit, std::abs(v - limit), elapsed_ms(start)});
  }
  return rows;
}

std::vector<ConvergenceRow> clt_converge(const MeasureSet& base, const RealFunction& phi,
                                         std::span<const int> n_list, CltOptions options,
                                         const std::string& experiment) {
  const VarianceBounds bounds = variance_bounds(base);
  const ThetaInterval theta(bounds.lower, bounds.upper);
  const double limit = g_expect(phi, theta, GMethod::both, options.limit).value;
  std::vector<ConvergenceRow> rows;
  for (int n : sorted_horizons(n_list)) {
    const auto start = Clock::now();
    const double v = centered_sum_sup(HorizonModel(base, n), phi, MixtureGrid{options.M},
                                      ValueGridSpec{options.h});
    rows.push_back({experiment, n, 0, options.M, options.h, v, limit, std::abs(v - limit),
                    elapsed_ms(start)});
  }
  return rows;
}

MeasureSet example51_set() { return MeasureSet({DiscreteMeasure::bernoulli(0.5)}); }

MeasureSet example52_set() {
  return MeasureSet({DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(1.0)});
}

MeasureSet example53_set(int K) {
  require(K >= 1, "truncation K must be at least 1");
  std::vector<DiscreteMeasure> family;
  for (int k = 1; k <= K; ++k) {
    const double kk = static_cast<double>(k);
    const double tail = 1.0 / (2.0 * kk * kk);
    family.emplace_back(std::vector<Atom>{{-kk, tail}, {0.0, 1.0 - 2.0 * tail}, {kk, tail}});
  }
  return MeasureSet(std::move(family));
}

Example53Report example_5_3(std::span<const int> K_list, std::span<const int> n_list,
                            const RealFunction& phi) {
  RealFunction payoff = phi ? phi : RealFunction([](double x) { return 1.0 - std::abs(x); });
  std::vector<int> ks(K_list.begin(), K_list.end());
  require(!ks.empty(), "K list is empty");
  std::ranges::sort(ks);

  Example53Report report;
  // Classical comparison under N(0, 1), the variance of every P_k.
  report.classical_value =
      solve_g_heat(GHeatConfig::with_defaults(ThetaInterval(1.0, 1.0), payoff, 0.01))
          .value_at_origin;

  std::map<int, double> previous;
  for (int K : ks) {
    const MeasureSet set = example53_set(K);
    for (int n : sorted_horizons(n_list)) {
      const auto start = Clock::now();
      const double v = sup_expect_sum(HorizonModel(set, n), payoff, 1.0 / std::sqrt(n));
      report.rows.push_back({"example53", n, K, 0, 0.0, v, report.classical_value,
                             std::abs(v - report.classical_value), elapsed_ms(start)});
      if (auto it = previous.find(n); it != previous.end() && v < it->second)
        report.monotone_in_K = false;
      previous[n] = v;
    }
  }
  return report;
}

}  // namespace gcltlab
