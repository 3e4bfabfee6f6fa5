#include "gcltlab/kernel_dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gcltlab/error.hpp"
#include "gcltlab/parallel.hpp"
#include "gcltlab/value_grid.hpp"

namespace gcltlab {

namespace {

constexpr double kTreeLimit = 1e7;
constexpr double kSandwichTolerance = 1e-12;

void check_tree_size(const HorizonModel& model) {
  const double branches = static_cast<double>(model.base.support_union().size());
  guard(std::pow(branches, model.horizon) <= kTreeLimit,
        "history tree exceeds 1e7 leaves (" + std::to_string(branches) + "^" +
            std::to_string(model.horizon) + ")");
}

double checked_payoff(const PathPayoff& payoff, History history) {
  const double v = payoff(history);
  guard(std::isfinite(v), "payoff is not finite on a reachable path");
  return v;
}

// Index of each extreme's atoms inside the support union.
std::vector<std::vector<std::size_t>> atom_slots(const MeasureSet& set,
                                                 const std::vector<double>& support) {
  std::vector<std::vector<std::size_t>> slots;
  for (const auto& m : set.extremes()) {
    auto& row = slots.emplace_back();
    for (const Atom& a : m.atoms()) {
      auto it = std::ranges::lower_bound(support, a.point);
      row.push_back(static_cast<std::size_t>(it - support.begin()));
    }
  }
  return slots;
}

// Visits every reachable node of the strategy's tree with the kernel chosen
// there.
template <typename Visitor>
void walk_reachable(const HorizonModel& model, const KernelStrategy& strategy,
                    Visitor&& visit) {
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(model.horizon));
  auto recurse = [&](auto&& self) -> void {
    const int step = static_cast<int>(history.size()) + 1;
    if (step > model.horizon) return;
    const auto weights = strategy.choose(step, history, model.base.size());
    const DiscreteMeasure kernel = model.base.mixture(weights);
    visit(step, std::span<const double>(history), kernel);
    for (const Atom& a : kernel.atoms()) {
      history.push_back(a.point);
      self(self);
      history.pop_back();
    }
  };
  recurse(recurse);
}

void record(CheckReport& report, int step, History history, double value,
            double lower, double upper) {
  if (report.nodes_checked == 0) {
    report.min_observed = report.max_observed = value;
  } else {
    report.min_observed = std::min(report.min_observed, value);
    report.max_observed = std::max(report.max_observed, value);
  }
  ++report.nodes_checked;
  if (value < lower - kSandwichTolerance || value > upper + kSandwichTolerance) {
    report.violations.push_back(
        {step, std::vector<double>(history.begin(), history.end()), value, lower, upper});
  }
}

// Smallest q <= 1e6 such that every point times q is an integer.
long lattice_denominator(const std::vector<double>& points) {
  for (long q = 1; q <= 1'000'000; ++q) {
    bool integral = true;
    for (double p : points) {
      const double scaled = p * static_cast<double>(q);
      // Absolute tolerance: a relative one would accept good rational
      // approximations of irrational points.
      if (std::abs(scaled - std::round(scaled)) > 1e-9 + 1e-14 * std::abs(scaled)) {
        integral = false;
        break;
      }
    }
    if (integral) return q;
  }
  throw NumericalGuardError("support points are not rational with denominator <= 1e6");
}

}  // namespace

HorizonModel::HorizonModel(MeasureSet base_set, int n)
    : base(std::move(base_set)), horizon(n) {
  require(n >= 1, "horizon must be at least 1");
}

std::vector<double> KernelStrategy::choose(int step, History history,
                                           std::size_t extremes) const {
  auto weights = chooser_(step, history);
  validate_weights(weights, extremes);
  return weights;
}

KernelStrategy KernelStrategy::constant(std::vector<double> weights) {
  return KernelStrategy([w = std::move(weights)](int, History) { return w; });
}

double joint_expect(const HorizonModel& model, const KernelStrategy& strategy,
                    const PathPayoff& payoff) {
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(model.horizon));
  auto recurse = [&](auto&& self) -> double {
    const int step = static_cast<int>(history.size()) + 1;
    if (step > model.horizon) return checked_payoff(payoff, history);
    const DiscreteMeasure kernel =
        model.base.mixture(strategy.choose(step, history, model.base.size()));
    double total = 0.0;
    for (const Atom& a : kernel.atoms()) {
      history.push_back(a.point);
      total += a.weight * self(self);
      history.pop_back();
    }
    return total;
  };
  return recurse(recurse);
}

double sup_expect_history(const HorizonModel& model, const PathPayoff& payoff) {
  check_tree_size(model);
  const auto support = model.base.support_union();
  const auto slots = atom_slots(model.base, support);

  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(model.horizon));
  auto recurse = [&](auto&& self) -> double {
    if (static_cast<int>(history.size()) == model.horizon)
      return checked_payoff(payoff, history);
    std::vector<double> child(support.size());
    for (std::size_t u = 0; u < support.size(); ++u) {
      history.push_back(support[u]);
      child[u] = self(self);
      history.pop_back();
    }
    // One-step value is linear in the kernel's mixture weights, so the max
    // over the hull is attained at an extreme.
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < model.base.size(); ++j) {
      const auto atoms = model.base.extremes()[j].atoms();
      double v = 0.0;
      for (std::size_t a = 0; a < atoms.size(); ++a) v += atoms[a].weight * child[slots[j][a]];
      best = std::max(best, v);
    }
    return best;
  };
  return recurse(recurse);
}

double sup_expect_sum(const HorizonModel& model, const RealFunction& payoff,
                      double scaling) {
  require(std::isfinite(scaling), "scaling must be finite");
  const auto support = model.base.support_union();
  const long q = lattice_denominator(support);

  std::vector<long> units;
  for (double p : support) units.push_back(std::lround(p * static_cast<double>(q)));
  const long min_unit = units.front();
  long g = 0;
  for (long u : units) g = std::gcd(g, u - min_unit);
  if (g == 0) g = 1;
  const long max_offset = (units.back() - min_unit) / g;

  const double states = static_cast<double>(model.horizon) * static_cast<double>(max_offset) + 1.0;
  guard(states <= kTreeLimit, "reachable partial sums exceed 1e7");

  struct Move {
    long offset;
    double weight;
  };
  std::vector<std::vector<Move>> moves;
  for (const auto& m : model.base.extremes()) {
    auto& row = moves.emplace_back();
    for (const Atom& a : m.atoms()) {
      const long u = std::lround(a.point * static_cast<double>(q));
      row.push_back({(u - min_unit) / g, a.weight});
    }
  }

  // State t after i draws encodes S_i = (i * min_unit + g * t) / q.
  const int n = model.horizon;
  auto sum_of = [&](int i, long t) {
    return (static_cast<double>(i) * static_cast<double>(min_unit) +
            static_cast<double>(g) * static_cast<double>(t)) /
           static_cast<double>(q);
  };

  std::vector<double> next(static_cast<std::size_t>(n * max_offset + 1));
  parallel_for(0, next.size(), [&](std::size_t t) {
    next[t] = payoff(scaling * sum_of(n, static_cast<long>(t)));
  });
  for (double v : next) guard(std::isfinite(v), "payoff is not finite on a reachable sum");

  std::vector<double> current;
  for (int i = n - 1; i >= 0; --i) {
    current.assign(static_cast<std::size_t>(i * max_offset + 1), 0.0);
    parallel_for(0, current.size(), [&](std::size_t t) {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& row : moves) {
        double v = 0.0;
        for (const Move& mv : row) v += mv.weight * next[t + static_cast<std::size_t>(mv.offset)];
        best = std::max(best, v);
      }
      current[t] = best;
    });
    std::swap(current, next);
  }
  return next.front();
}

double brute_force_sup(const HorizonModel& model, const PathPayoff& payoff) {
  guard(model.horizon <= 3, "brute force oracle supports n <= 3");
  guard(model.base.size() <= 3, "brute force oracle supports at most 3 extremes");
  for (const auto& m : model.base.extremes())
    guard(m.size() <= 3, "brute force oracle supports at most 3 atoms per extreme");

  // Number of extreme-valued strategies on a subtree of the given depth.
  double count = 1.0;
  for (int d = 1; d <= model.horizon; ++d) {
    double next = 0.0;
    for (const auto& m : model.base.extremes()) next += std::pow(count, m.size());
    count = next;
  }
  guard(count <= 5e6, "brute force oracle strategy count exceeds 5e6");

  const auto support = model.base.support_union();
  const auto slots = atom_slots(model.base, support);

  // Returns the joint expectation of the subtree under every assignment of
  // extremes to its nodes. A node's sub-assignment depends only on its
  // history, so children are shared across the extreme chosen at the parent.
  std::vector<double> history;
  auto values = [&](auto&& self) -> std::vector<double> {
    if (static_cast<int>(history.size()) == model.horizon)
      return {checked_payoff(payoff, history)};
    std::vector<std::vector<double>> child(support.size());
    for (std::size_t u = 0; u < support.size(); ++u) {
      history.push_back(support[u]);
      child[u] = self(self);
      history.pop_back();
    }
    std::vector<double> out;
    for (std::size_t j = 0; j < model.base.size(); ++j) {
      const auto atoms = model.base.extremes()[j].atoms();
      std::vector<std::size_t> pick(atoms.size(), 0);
      while (true) {
        double v = 0.0;
        for (std::size_t a = 0; a < atoms.size(); ++a)
          v += atoms[a].weight * child[slots[j][a]][pick[a]];
        out.push_back(v);
        std::size_t a = 0;
        while (a < atoms.size() && ++pick[a] == child[slots[j][a]].size()) pick[a++] = 0;
        if (a == atoms.size()) break;
      }
    }
    return out;
  };
  const auto all = values(values);
  return *std::ranges::max_element(all);
}

CheckReport conditional_range_check(const HorizonModel& model,
                                    const KernelStrategy& strategy,
                                    const RealFunction& f) {
  const double upper = upper_expect(model.base, f);
  const double lower = -upper_expect(model.base, [&f](double x) { return -f(x); });
  CheckReport report;
  walk_reachable(model, strategy, [&](int step, History history, const DiscreteMeasure& kernel) {
    record(report, step, history, expect(kernel, f), lower, upper);
  });
  return report;
}

CheckReport conditional_variance_check(const HorizonModel& model,
                                       const KernelStrategy& strategy) {
  const VarianceBounds bounds = variance_bounds(model.base);
  CheckReport report;
  walk_reachable(model, strategy, [&](int step, History history, const DiscreteMeasure& kernel) {
    record(report, step, history, kernel.variance(), bounds.lower, bounds.upper);
  });
  return report;
}

double centered_sum_sup(const HorizonModel& model, const RealFunction& payoff,
                        MixtureGrid grid, ValueGridSpec spec) {
  require(grid.resolution >= 1, "mixture grid resolution M must be at least 1");
  require(spec.h > 0.0, "value grid step must be positive");
  require(spec.margin >= 0.0, "value grid margin must be nonnegative");

  const double v_up = variance_bounds(model.base).upper;
  const double needed = 4.0 * std::sqrt(v_up) * (1.0 + spec.margin);
  guard(spec.radius <= 0.0 || spec.radius >= 4.0 * std::sqrt(v_up),
        "value grid does not cover +-4 sqrt(upper variance)");
  const double radius = spec.radius > 0.0 ? spec.radius : std::max(needed, spec.h);

  ValueGrid values = ValueGrid::symmetric(radius, spec.h, model.horizon);
  for (std::size_t k = 0; k < values.size(); ++k) {
    values.values()[k] = payoff(values.node(k));
    guard(std::isfinite(values.values()[k]), "payoff is not finite on the value grid");
  }

  // Each mixture's centered increments, in units of the grid step.
  struct Shift {
    long whole;
    double frac;
    double weight;
  };
  const double scale = 1.0 / (std::sqrt(static_cast<double>(model.horizon)) * spec.h);
  std::vector<std::vector<Shift>> kernels;
  for (const auto& w : simplex_lattice(model.base.size(), grid.resolution)) {
    const DiscreteMeasure m = model.base.mixture(w);
    const double mean = m.mean();
    auto& row = kernels.emplace_back();
    for (const Atom& a : m.atoms()) {
      const double u = (a.point - mean) * scale;
      const double whole = std::floor(u);
      row.push_back({static_cast<long>(whole), u - whole, a.weight});
    }
  }

  std::vector<double> next = values.values();
  std::vector<double> current(next.size());
  for (int i = model.horizon; i >= 1; --i) {
    parallel_for(0, current.size(), [&](std::size_t k) {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& row : kernels) {
        double v = 0.0;
        for (const Shift& s : row)
          v += s.weight * interpolate_index(next, static_cast<long>(k), s.whole, s.frac);
        if (v > best) best = v;
      }
      current[k] = best;
    }, 64);
    std::swap(current, next);
  }
  values.values() = std::move(next);
  values.set_time_index(0);
  return values.values()[values.nearest(0.0)];
}

double strategy_centered_expect(const HorizonModel& model,
                                const KernelStrategy& strategy,
                                const RealFunction& payoff) {
  check_tree_size(model);
  const double norm = 1.0 / std::sqrt(static_cast<double>(model.horizon));
  std::vector<double> history;
  auto recurse = [&](auto&& self, double centered) -> double {
    const int step = static_cast<int>(history.size()) + 1;
    if (step > model.horizon) {
      const double v = payoff(centered * norm);
      guard(std::isfinite(v), "payoff is not finite on a reachable path");
      return v;
    }
    const DiscreteMeasure kernel =
        model.base.mixture(strategy.choose(step, history, model.base.size()));
    const double mean = kernel.mean();
    double total = 0.0;
    for (const Atom& a : kernel.atoms()) {
      history.push_back(a.point);
      total += a.weight * self(self, centered + (a.point - mean));
      history.pop_back();
    }
    return total;
  };
  return recurse(recurse, 0.0);
}

VolatilityMatchingStrategy::VolatilityMatchingStrategy(const HorizonModel& model,
                                                       VarianceTarget target,
                                                       HullPoint up, HullPoint down)
    : up_(std::move(up)),
      down_(std::move(down)),
      target_(std::move(target)),
      strategy_([](int, History) { return std::vector<double>{}; }) {
  const VarianceBounds bounds = variance_bounds(model.base);
  v_up_ = bounds.upper;
  v_down_ = bounds.lower;
  validate_weights(up_.weights, model.base.size());
  validate_weights(down_.weights, model.base.size());
  require(std::abs(up_.measure.variance() - v_up_) <= 1e-9,
          "P_up variance does not match the upper variance");
  require(std::abs(down_.measure.variance() - v_down_) <= 1e-9,
          "P_down variance does not match the lower variance");

  strategy_ = KernelStrategy(
      [v_up = v_up_, v_down = v_down_, up_w = up_.weights, down_w = down_.weights,
       target = target_](int step, History history) {
        const double sigma2 = target(step, history);
        require(sigma2 >= v_down - 1e-12 && sigma2 <= v_up + 1e-12,
                "target variance outside [lower variance, upper variance]");
        const double w = v_up - v_down <= 1e-15
                             ? 0.0
                             : std::clamp((v_up - sigma2) / (v_up - v_down), 0.0, 1.0);
        std::vector<double> weights(up_w.size());
        for (std::size_t j = 0; j < weights.size(); ++j)
          weights[j] = w * down_w[j] + (1.0 - w) * up_w[j];
        return weights;
      });
}

double VolatilityMatchingStrategy::down_weight(double target) const {
  require(target >= v_down_ - 1e-12 && target <= v_up_ + 1e-12,
          "target variance outside [lower variance, upper variance]");
  if (v_up_ - v_down_ <= 1e-15) return 0.0;
  return std::clamp((v_up_ - target) / (v_up_ - v_down_), 0.0, 1.0);
}

std::vector<double> VolatilityMatchingStrategy::realized_variances(
    const HorizonModel& model) const {
  check_tree_size(model);
  std::vector<double> out;
  walk_reachable(model, strategy_, [&](int, History, const DiscreteMeasure& kernel) {
    out.push_back(kernel.variance());
  });
  return out;
}

VolatilityMatchingStrategy volatility_matching_strategy(const HorizonModel& model,
                                                        VarianceTarget target) {
  return VolatilityMatchingStrategy(model, std::move(target), max_variance_point(model.base),
                                    min_variance_point(model.base));
}

EmbeddedPath::EmbeddedPath(std::vector<double> knots) : knots_(std::move(knots)) {
  require(knots_.size() >= 2, "embedded path needs at least one step");
  knots_.front() = 0.0;
}

double EmbeddedPath::at(double t) const {
  const double n = static_cast<double>(steps());
  const double nt = std::clamp(t, 0.0, 1.0) * n;
  const double whole = std::floor(nt);
  const auto i = static_cast<std::size_t>(whole);
  if (i >= steps()) return knots_.back();
  return (whole + 1.0 - nt) * knots_[i] + (nt - whole) * knots_[i + 1];
}

std::vector<double> EmbeddedPath::samples(std::size_t count) const {
  require(count >= 2, "need at least two samples");
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j)
    out[j] = at(static_cast<double>(j) / static_cast<double>(count - 1));
  return out;
}

EmbeddedPath path_embed(std::span<const double> x) {
  require(!x.empty(), "path needs at least one point");
  std::vector<double> knots(x.size() + 1, 0.0);
  std::ranges::copy(x, knots.begin() + 1);
  return EmbeddedPath(std::move(knots));
}

PathFunctionalKind parse_path_functional_kind(const std::string& name) {
  if (name == "terminal") return PathFunctionalKind::terminal;
  if (name == "running_max") return PathFunctionalKind::running_max;
  if (name == "time_average") return PathFunctionalKind::time_average;
  if (name == "lipschitz_composite") return PathFunctionalKind::lipschitz_composite;
  throw ValidationError("unknown path functional kind: " + name);
}

double path_functional_eval(const PathFunctional& functional, const EmbeddedPath& path) {
  const auto knots = path.knots();
  switch (functional.kind) {
    case PathFunctionalKind::terminal:
      return knots.back();
    case PathFunctionalKind::running_max:
      // Piecewise linear, so the max sits on a knot.
      return *std::ranges::max_element(knots);
    case PathFunctionalKind::time_average: {
      double area = 0.0;
      for (std::size_t i = 1; i < knots.size(); ++i) area += 0.5 * (knots[i - 1] + knots[i]);
      return area / static_cast<double>(path.steps());
    }
    case PathFunctionalKind::lipschitz_composite: {
      require(static_cast<bool>(functional.outer), "composite functional needs an outer function");
      require(functional.inner != PathFunctionalKind::lipschitz_composite,
              "composite functional cannot nest composites");
      return functional.outer(path_functional_eval({functional.inner, {}, {}}, path));
    }
  }
  throw ValidationError("unknown path functional kind");
}

}  // namespace gcltlab
