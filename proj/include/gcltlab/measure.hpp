#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gcltlab {

using RealFunction = std::function<double(double)>;

struct Atom {
  double point;
  double weight;

  friend bool operator==(const Atom&, const Atom&) = default;
};

// Finitely supported probability measure on the real line.
//
// Construction canonicalizes the atoms: points are sorted, duplicates merged
// and zero-weight atoms dropped. Weights must be nonnegative and sum to one
// within 1e-12; they are renormalized exactly afterwards.
class DiscreteMeasure {
 public:
  explicit DiscreteMeasure(std::vector<Atom> atoms);

  static DiscreteMeasure dirac(double point);
  static DiscreteMeasure bernoulli(double p);  // p * delta_1 + (1 - p) * delta_0

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double min_point() const { return atoms_.front().point; }
  double max_point() const { return atoms_.back().point; }

  double mean() const;
  double second_moment() const;
  double variance() const;

  friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;

 private:
  std::vector<Atom> atoms_;
};

// Classical expectation E_P[f].
double expect(const DiscreteMeasure& measure, const RealFunction& f);

// Convex hull of finitely many extreme measures.
class MeasureSet {
 public:
  explicit MeasureSet(std::vector<DiscreteMeasure> extremes);

  std::span<const DiscreteMeasure> extremes() const { return extremes_; }
  std::size_t size() const { return extremes_.size(); }

  // The mixture sum_j weights[j] * extremes[j]. Weights must form a
  // probability vector of length size().
  DiscreteMeasure mixture(std::span<const double> weights) const;

  // Union of all support points, ascending.
  std::vector<double> support_union() const;
  double max_abs_point() const;

 private:
  std::vector<DiscreteMeasure> extremes_;
};

void validate_weights(std::span<const double> weights, std::size_t expected_size);

struct MeanInterval {
  double lower;
  double upper;
};

struct VarianceBounds {
  double lower;
  double upper;
  double argmin_mean_upper;
};

struct VarianceOracleEstimate {
  double upper;
  double lower;
};

// sup over the hull of E_P[f]; attained at an extreme point.
double upper_expect(const MeasureSet& set, const RealFunction& f);

MeanInterval mean_interval(const MeasureSet& set);

// Upper variance: min over mu in [lower mean, upper mean] of the upper
// expectation of (X - mu)^2, found by ternary search to 1e-10 in mu.
// Lower variance: the smallest classical variance among the extremes.
VarianceBounds variance_bounds(const MeasureSet& set);

// Brute-force check of the variance bounds: enumerates every mixture whose
// weights lie on the simplex lattice with spacing at most grid_step
// (vertices included) and returns the max and min classical variance.
VarianceOracleEstimate variance_oracle(const MeasureSet& set, double grid_step);

// Upper expectation of (|X|^2 - lambda)^+.
double tail_deficiency(const MeasureSet& set, double lambda);

// A measure in the hull together with its mixture weights over the extremes.
struct HullPoint {
  std::vector<double> weights;
  DiscreteMeasure measure;
};

// Maximizer of the classical variance over the hull. The variance of a
// mixture depends only on (mean, second moment), which range over the convex
// polygon spanned by the extremes' moment pairs; the concave objective
// s - m^2 peaks on an edge, so every pair of extremes is searched in closed
// form.
HullPoint max_variance_point(const MeasureSet& set);

// Minimizer of the classical variance over the hull (an extreme point; the
// variance is concave in the mixture weights). Lowest index wins ties.
HullPoint min_variance_point(const MeasureSet& set);

// Every probability vector over `parts` coordinates with entries in
// {0, 1/resolution, ..., 1}, in lexicographic order of the integer numerators.
std::vector<std::vector<double>> simplex_lattice(std::size_t parts, int resolution);

}  // namespace gcltlab
