#include "gcltlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gcltlab/error.hpp"

namespace gcltlab {

namespace {

constexpr double kWeightTolerance = 1e-12;

// Visits every integer composition of `total` into `parts` nonnegative
// numerators, lexicographically.
template <typename Visitor>
void for_each_composition(std::size_t parts, int total, Visitor&& visit) {
  std::vector<int> counts(parts, 0);
  auto recurse = [&](auto&& self, std::size_t index, int remaining) -> void {
    if (index + 1 == parts) {
      counts[index] = remaining;
      visit(std::span<const int>(counts));
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[index] = c;
      self(self, index + 1, remaining - c);
    }
  };
  recurse(recurse, 0, total);
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) {
  require(!atoms.empty(), "measure needs at least one atom");
  double total = 0.0;
  for (const Atom& a : atoms) {
    require(std::isfinite(a.point), "measure atom point must be finite");
    require(std::isfinite(a.weight) && a.weight >= 0.0,
            "measure weights must be nonnegative");
    total += a.weight;
  }
  require(std::abs(total - 1.0) <= kWeightTolerance,
          "measure weights must sum to 1 (got " + std::to_string(total) + ")");

  std::ranges::sort(atoms, {}, &Atom::point);
  for (const Atom& a : atoms) {
    if (a.weight == 0.0) continue;
    if (!atoms_.empty() && atoms_.back().point == a.point) {
      atoms_.back().weight += a.weight;
    } else {
      atoms_.push_back(a);
    }
  }
  require(!atoms_.empty(), "measure has no positive-weight atom");
  double kept = 0.0;
  for (const Atom& a : atoms_) kept += a.weight;
  for (Atom& a : atoms_) a.weight /= kept;
}

DiscreteMeasure DiscreteMeasure::dirac(double point) {
  return DiscreteMeasure({{point, 1.0}});
}

DiscreteMeasure DiscreteMeasure::bernoulli(double p) {
  require(p >= 0.0 && p <= 1.0, "bernoulli parameter must lie in [0, 1]");
  return DiscreteMeasure({{0.0, 1.0 - p}, {1.0, p}});
}

double DiscreteMeasure::mean() const {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.weight * a.point;
  return m;
}

double DiscreteMeasure::second_moment() const {
  double s = 0.0;
  for (const Atom& a : atoms_) s += a.weight * a.point * a.point;
  return s;
}

double DiscreteMeasure::variance() const {
  const double m = mean();
  double v = 0.0;
  for (const Atom& a : atoms_) v += a.weight * (a.point - m) * (a.point - m);
  return v;
}

double expect(const DiscreteMeasure& measure, const RealFunction& f) {
  double total = 0.0;
  for (const Atom& a : measure.atoms()) total += a.weight * f(a.point);
  return total;
}

MeasureSet::MeasureSet(std::vector<DiscreteMeasure> extremes)
    : extremes_(std::move(extremes)) {
  require(!extremes_.empty(), "measure set needs at least one extreme measure");
}

void validate_weights(std::span<const double> weights, std::size_t expected_size) {
  require(weights.size() == expected_size, "mixture weight count mismatch");
  double total = 0.0;
  for (double w : weights) {
    require(std::isfinite(w) && w >= -kWeightTolerance,
            "mixture weights must be nonnegative");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-9, "mixture weights must sum to 1");
}

DiscreteMeasure MeasureSet::mixture(std::span<const double> weights) const {
  validate_weights(weights, extremes_.size());
  std::vector<Atom> atoms;
  double total = 0.0;
  for (std::size_t j = 0; j < extremes_.size(); ++j) {
    const double w = std::max(weights[j], 0.0);
    if (w == 0.0) continue;
    for (const Atom& a : extremes_[j].atoms()) {
      atoms.push_back({a.point, w * a.weight});
      total += w * a.weight;
    }
  }
  // Absorb the accumulated rounding so the canonical constructor accepts it.
  for (Atom& a : atoms) a.weight /= total;
  return DiscreteMeasure(std::move(atoms));
}

std::vector<double> MeasureSet::support_union() const {
  std::vector<double> points;
  for (const auto& m : extremes_)
    for (const Atom& a : m.atoms()) points.push_back(a.point);
  std::ranges::sort(points);
  auto dup = std::ranges::unique(points);
  points.erase(dup.begin(), dup.end());
  return points;
}

double MeasureSet::max_abs_point() const {
  double r = 0.0;
  for (const auto& m : extremes_)
    r = std::max({r, std::abs(m.min_point()), std::abs(m.max_point())});
  return r;
}

double upper_expect(const MeasureSet& set, const RealFunction& f) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& m : set.extremes()) best = std::max(best, expect(m, f));
  return best;
}

MeanInterval mean_interval(const MeasureSet& set) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& m : set.extremes()) {
    lo = std::min(lo, m.mean());
    hi = std::max(hi, m.mean());
  }
  return {lo, hi};
}

VarianceBounds variance_bounds(const MeasureSet& set) {
  const MeanInterval means = mean_interval(set);
  auto upper_deviation = [&](double mu) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& m : set.extremes())
      best = std::max(best, m.second_moment() - 2.0 * mu * m.mean() + mu * mu);
    return best;
  };

  double lo = means.lower;
  double hi = means.upper;
  while (hi - lo > 1e-10) {
    const double a = lo + (hi - lo) / 3.0;
    const double b = hi - (hi - lo) / 3.0;
    if (upper_deviation(a) <= upper_deviation(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  double mu_star = std::clamp(0.5 * (lo + hi), means.lower, means.upper);

  // Polish: the minimum of a max of quadratics sits at an endpoint, a vertex
  // minimizer or a crossing of two quadratics. Checking those removes the
  // O(tolerance) residue of the search.
  const auto& ext = set.extremes();
  if (ext.size() <= 256) {
    double best = upper_deviation(mu_star);
    auto consider = [&](double mu) {
      if (!std::isfinite(mu)) return;
      mu = std::clamp(mu, means.lower, means.upper);
      const double v = upper_deviation(mu);
      if (v < best) {
        best = v;
        mu_star = mu;
      }
    };
    consider(means.lower);
    consider(means.upper);
    for (std::size_t i = 0; i < ext.size(); ++i) {
      consider(ext[i].mean());
      for (std::size_t j = i + 1; j < ext.size(); ++j) {
        const double dm = ext[i].mean() - ext[j].mean();
        if (dm != 0.0)
          consider((ext[i].second_moment() - ext[j].second_moment()) / (2.0 * dm));
      }
    }
  }

  double v_low = std::numeric_limits<double>::infinity();
  for (const auto& m : set.extremes()) v_low = std::min(v_low, m.variance());

  const double v_up = std::max(upper_deviation(mu_star), v_low);
  return {std::max(v_low, 0.0), v_up, mu_star};
}

VarianceOracleEstimate variance_oracle(const MeasureSet& set, double grid_step) {
  require(grid_step > 0.0 && grid_step <= 0.5, "grid_step must lie in (0, 0.5]");
  const int resolution = static_cast<int>(std::ceil(1.0 / grid_step - 1e-9));
  const std::size_t k = set.size();

  std::vector<double> means(k), seconds(k);
  for (std::size_t j = 0; j < k; ++j) {
    means[j] = set.extremes()[j].mean();
    seconds[j] = set.extremes()[j].second_moment();
  }

  VarianceOracleEstimate est{-std::numeric_limits<double>::infinity(),
                             std::numeric_limits<double>::infinity()};
  for_each_composition(k, resolution, [&](std::span<const int> counts) {
    double m = 0.0, s = 0.0;
    int vertex = -1;
    for (std::size_t j = 0; j < k; ++j) {
      const double w = static_cast<double>(counts[j]) / resolution;
      m += w * means[j];
      s += w * seconds[j];
      if (counts[j] == resolution) vertex = static_cast<int>(j);
    }
    // Vertices are evaluated exactly so the min matches vertex enumeration.
    const double v = vertex >= 0 ? set.extremes()[vertex].variance() : s - m * m;
    est.upper = std::max(est.upper, v);
    est.lower = std::min(est.lower, v);
  });
  return est;
}

double tail_deficiency(const MeasureSet& set, double lambda) {
  require(lambda >= 0.0, "lambda must be nonnegative");
  return upper_expect(set, [lambda](double x) { return std::max(x * x - lambda, 0.0); });
}

HullPoint max_variance_point(const MeasureSet& set) {
  const std::size_t k = set.size();
  std::vector<double> means(k), seconds(k);
  for (std::size_t j = 0; j < k; ++j) {
    means[j] = set.extremes()[j].mean();
    seconds[j] = set.extremes()[j].second_moment();
  }

  // Along the edge t -> (1 - t) e_i + t e_j the variance is
  // (s_i + t ds) - (m_i + t dm)^2, a concave quadratic in t.
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_i = 0, best_j = 0;
  double best_t = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const double ds = seconds[j] - seconds[i];
      const double dm = means[j] - means[i];
      double t = 0.0;
      if (j != i && dm != 0.0) {
        t = std::clamp((ds - 2.0 * means[i] * dm) / (2.0 * dm * dm), 0.0, 1.0);
      } else if (j != i && ds > 0.0) {
        t = 1.0;
      }
      const double m = means[i] + t * dm;
      const double v = seconds[i] + t * ds - m * m;
      if (v > best + 1e-15) {
        best = v;
        best_i = i;
        best_j = j;
        best_t = t;
      }
    }
  }
  std::vector<double> weights(k, 0.0);
  weights[best_i] += 1.0 - best_t;
  weights[best_j] += best_t;
  return {weights, set.mixture(weights)};
}

HullPoint min_variance_point(const MeasureSet& set) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < set.size(); ++j)
    if (set.extremes()[j].variance() < set.extremes()[best].variance()) best = j;
  std::vector<double> weights(set.size(), 0.0);
  weights[best] = 1.0;
  return {weights, set.extremes()[best]};
}

std::vector<std::vector<double>> simplex_lattice(std::size_t parts, int resolution) {
  require(parts >= 1, "simplex needs at least one coordinate");
  require(resolution >= 1, "mixture grid resolution must be at least 1");
  std::vector<std::vector<double>> points;
  for_each_composition(parts, resolution, [&](std::span<const int> counts) {
    std::vector<double> w(parts);
    for (std::size_t j = 0; j < parts; ++j)
      w[j] = static_cast<double>(counts[j]) / resolution;
    points.push_back(std::move(w));
  });
  return points;
}

}  // namespace gcltlab
