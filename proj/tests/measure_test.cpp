#include "gcltlab/measure.hpp"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "gcltlab/error.hpp"
#include "test_support.hpp"

namespace gcltlab {
namespace {

using testing::hull;
using testing::random_set;

const auto identity = [](double x) { return x; };

MeasureSet example52() { return hull({DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(1.0)}); }
MeasureSet bernoulli_half() { return hull({DiscreteMeasure::bernoulli(0.5)}); }
MeasureSet symmetric_pair() {
  return hull({DiscreteMeasure::dirac(-1.0), DiscreteMeasure::dirac(1.0)});
}

TEST(DiscreteMeasureTest, CanonicalFormSortsAndMergesAtoms) {
  const DiscreteMeasure m({{1.0, 0.25}, {-1.0, 0.5}, {1.0, 0.25}, {3.0, 0.0}});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.atoms()[0], (Atom{-1.0, 0.5}));
  EXPECT_EQ(m.atoms()[1], (Atom{1.0, 0.5}));
  EXPECT_EQ(m, DiscreteMeasure({{-1.0, 0.5}, {1.0, 0.5}}));
}

TEST(DiscreteMeasureTest, RejectsInvalidWeights) {
  EXPECT_THROW(DiscreteMeasure({}), ValidationError);
  EXPECT_THROW(DiscreteMeasure({{0.0, 0.6}, {1.0, 0.6}}), ValidationError);
  EXPECT_THROW(DiscreteMeasure({{0.0, -0.1}, {1.0, 1.1}}), ValidationError);
  EXPECT_THROW(DiscreteMeasure({{NAN, 1.0}}), ValidationError);
  EXPECT_THROW(MeasureSet({}), ValidationError);
}

TEST(ExpectTest, Examples) {
  EXPECT_EQ(expect(DiscreteMeasure::dirac(0.0), identity), 0.0);
  EXPECT_EQ(expect(DiscreteMeasure::bernoulli(0.5), identity), 0.5);
  EXPECT_EQ(expect(DiscreteMeasure::bernoulli(0.5), [](double x) { return (x - 0.5) * (x - 0.5); }),
            0.25);
}

TEST(UpperExpectTest, Examples) {
  EXPECT_EQ(upper_expect(example52(), identity), 1.0);
  EXPECT_EQ(-upper_expect(example52(), [](double x) { return -x; }), 0.0);
  EXPECT_EQ(upper_expect(bernoulli_half(), identity), 0.5);
}

TEST(UpperExpectTest, MixtureExpectationIsLinearInWeights) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const MeasureSet set = random_set(rng, 4, 4);
    std::vector<double> w(set.size());
    double total = 0.0;
    for (double& x : w) total += (x = std::uniform_real_distribution<double>(0, 1)(rng));
    for (double& x : w) x /= total;
    const auto f = [](double x) { return std::cos(3.0 * x) + x * x; };
    double direct = 0.0;
    for (std::size_t j = 0; j < set.size(); ++j) direct += w[j] * expect(set.extremes()[j], f);
    EXPECT_NEAR(expect(set.mixture(w), f), direct, 1e-12);
    EXPECT_LE(expect(set.mixture(w), f), upper_expect(set, f) + 1e-12);
  }
}

// Sub-additivity, positive homogeneity and constant preservation on random
// sets and random functions.
TEST(UpperExpectTest, SublinearityProperties) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> scale(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const MeasureSet set = random_set(rng, 4, 5);
    const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng);
    const RealFunction f = [a, b](double x) { return a * std::sin(b * x); };
    const RealFunction g = [c, d](double x) { return c * x * x + d * x; };
    const double lambda = scale(rng);
    EXPECT_LE(upper_expect(set, [&](double x) { return f(x) + g(x); }),
              upper_expect(set, f) + upper_expect(set, g) + 1e-12);
    EXPECT_NEAR(upper_expect(set, [&](double x) { return lambda * f(x); }),
                lambda * upper_expect(set, f), 1e-12);
    EXPECT_NEAR(upper_expect(set, [c](double) { return c; }), c, 1e-12);
  }
}

TEST(MeanIntervalTest, Examples) {
  const MeanInterval a = mean_interval(example52());
  EXPECT_EQ(a.lower, 0.0);
  EXPECT_EQ(a.upper, 1.0);
  const MeanInterval b = mean_interval(symmetric_pair());
  EXPECT_EQ(b.lower, -1.0);
  EXPECT_EQ(b.upper, 1.0);
  const MeanInterval c = mean_interval(bernoulli_half());
  EXPECT_EQ(c.lower, 0.5);
  EXPECT_EQ(c.upper, 0.5);
}

TEST(VarianceBoundsTest, Example52) {
  const VarianceBounds v = variance_bounds(example52());
  EXPECT_NEAR(v.upper, 0.25, 1e-12);
  EXPECT_EQ(v.lower, 0.0);
  EXPECT_NEAR(v.argmin_mean_upper, 0.5, 1e-9);
}

TEST(VarianceBoundsTest, SingletonIsClassicalVariance) {
  const VarianceBounds v = variance_bounds(bernoulli_half());
  EXPECT_NEAR(v.upper, 0.25, 1e-15);
  EXPECT_NEAR(v.lower, 0.25, 1e-15);
}

TEST(VarianceBoundsTest, SymmetricPair) {
  // Oracle: sweep of the mixture weight, Var = 1 - (2 lambda - 1)^2.
  double sweep = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double lambda = i / 10000.0;
    sweep = std::max(sweep, 1.0 - (2.0 * lambda - 1.0) * (2.0 * lambda - 1.0));
  }
  ASSERT_EQ(sweep, 1.0);
  const VarianceBounds v = variance_bounds(symmetric_pair());
  EXPECT_NEAR(v.upper, sweep, 1e-12);
  EXPECT_NEAR(v.argmin_mean_upper, 0.0, 1e-9);
  EXPECT_EQ(v.lower, 0.0);
}

TEST(VarianceOracleTest, Examples) {
  const VarianceOracleEstimate a = variance_oracle(example52(), 0.01);
  EXPECT_GE(a.upper, 0.2499);
  EXPECT_LE(a.upper, 0.25);
  EXPECT_EQ(a.lower, 0.0);

  const VarianceOracleEstimate b = variance_oracle(bernoulli_half(), 0.3);
  EXPECT_EQ(b.upper, 0.25);
  EXPECT_EQ(b.lower, 0.25);

  EXPECT_NEAR(variance_oracle(symmetric_pair(), 0.01).upper, 1.0, 0.01);
}

TEST(VarianceOracleTest, RejectsBadStep) {
  EXPECT_THROW(variance_oracle(example52(), 0.0), ValidationError);
  EXPECT_THROW(variance_oracle(example52(), -0.1), ValidationError);
  EXPECT_THROW(variance_oracle(example52(), 0.6), ValidationError);
}

// Duality: the minimax value dominates every grid mixture, the gap closes as
// the grid refines, and the lower variance is a vertex value.
TEST(VarianceOracleTest, DualityAgainstVarianceBounds) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const MeasureSet set = random_set(rng, 3, 5);
    const VarianceBounds bounds = variance_bounds(set);
    double previous_gap = INFINITY;
    for (double step : {0.25, 0.05, 0.01}) {
      const VarianceOracleEstimate est = variance_oracle(set, step);
      EXPECT_GE(bounds.upper, est.upper - 1e-9);
      EXPECT_EQ(bounds.lower, est.lower);
      const double gap = bounds.upper - est.upper;
      if (step == 0.01) EXPECT_LE(gap, 5e-3);
      EXPECT_LE(gap, previous_gap + 1e-12);
      previous_gap = gap;
    }
    EXPECT_GE(bounds.argmin_mean_upper, mean_interval(set).lower);
    EXPECT_LE(bounds.argmin_mean_upper, mean_interval(set).upper);
    EXPECT_LE(bounds.lower, bounds.upper);
  }
}

TEST(VariancePointsTest, ExtremalVariancesMatchBounds) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const MeasureSet set = random_set(rng, 4, 4);
    const VarianceBounds bounds = variance_bounds(set);
    const HullPoint up = max_variance_point(set);
    const HullPoint down = min_variance_point(set);
    EXPECT_NEAR(up.measure.variance(), bounds.upper, 1e-9);
    EXPECT_NEAR(down.measure.variance(), bounds.lower, 1e-15);
    EXPECT_EQ(set.mixture(up.weights), up.measure);
  }
  const HullPoint up52 = max_variance_point(example52());
  EXPECT_NEAR(up52.weights[0], 0.5, 1e-15);
  EXPECT_NEAR(up52.weights[1], 0.5, 1e-15);
}

TEST(TailDeficiencyTest, Examples) {
  EXPECT_EQ(tail_deficiency(example52(), 1.0), 0.0);
  EXPECT_EQ(tail_deficiency(example52(), 0.0), 1.0);
  EXPECT_EQ(tail_deficiency(example52(), 0.5), 0.5);
  EXPECT_THROW(tail_deficiency(example52(), -1.0), ValidationError);
}

TEST(TailDeficiencyTest, MonotoneAndVanishesBeyondSupport) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const MeasureSet set = random_set(rng, 3, 5);
    const double edge = set.max_abs_point() * set.max_abs_point();
    double previous = INFINITY;
    for (int i = 0; i <= 20; ++i) {
      const double v = tail_deficiency(set, edge * i / 20.0);
      EXPECT_LE(v, previous);
      previous = v;
    }
    EXPECT_EQ(tail_deficiency(set, edge), 0.0);
  }
}

TEST(SimplexLatticeTest, IncludesVerticesAndCountsCompositions) {
  const auto points = simplex_lattice(3, 4);
  EXPECT_EQ(points.size(), 15u);  // C(6, 2)
  int vertices = 0;
  for (const auto& p : points) {
    EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-15);
    vertices += (p[0] == 1.0) + (p[1] == 1.0) + (p[2] == 1.0);
  }
  EXPECT_EQ(vertices, 3);
  EXPECT_THROW(simplex_lattice(2, 0), ValidationError);
}

}  // namespace
}  // namespace gcltlab
