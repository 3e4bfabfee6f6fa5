#include "gcltlab/kernel_dp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "gtest/gtest.h"
#include "gcltlab/error.hpp"
#include "gcltlab/g_limit.hpp"
#include "gcltlab/payoff.hpp"
#include "test_support.hpp"

namespace gcltlab {
namespace {

using testing::hull;
using testing::random_set;

MeasureSet example52() { return hull({DiscreteMeasure::dirac(0.0), DiscreteMeasure::dirac(1.0)}); }
MeasureSet bernoulli_half() { return hull({DiscreteMeasure::bernoulli(0.5)}); }

const PathPayoff product = [](History x) { return x[0] * x[1]; };
const PathPayoff sum_payoff = [](History x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
};
const PathPayoff squared_gap = [](History x) { return (x[0] - x[1]) * (x[0] - x[1]); };

// Exact law of X_1 + ... + X_n for i.i.d. draws from `m`, by convolution.
std::map<double, double> convolve(const DiscreteMeasure& m, int n) {
  std::map<double, double> law{{0.0, 1.0}};
  for (int i = 0; i < n; ++i) {
    std::map<double, double> next;
    for (const auto& [s, p] : law)
      for (const Atom& a : m.atoms()) next[s + a.point] += p * a.weight;
    law = std::move(next);
  }
  return law;
}

TEST(JointExpectTest, IndependentBernoulli) {
  const HorizonModel model(example52(), 2);
  EXPECT_DOUBLE_EQ(joint_expect(model, KernelStrategy::constant({0.5, 0.5}), product), 0.25);
}

TEST(JointExpectTest, HistoryDependentKernel) {
  const HorizonModel model(example52(), 2);
  const KernelStrategy copy_first([](int step, History h) {
    if (step == 1) return std::vector<double>{0.5, 0.5};
    return h[0] == 1.0 ? std::vector<double>{0.0, 1.0} : std::vector<double>{1.0, 0.0};
  });
  EXPECT_DOUBLE_EQ(joint_expect(model, copy_first, product), 0.5);
}

TEST(JointExpectTest, SingleStepIsClassicalExpectation) {
  const HorizonModel model(example52(), 1);
  const std::vector<double> w{0.3, 0.7};
  const auto f = [](double x) { return std::exp(x); };
  EXPECT_NEAR(joint_expect(model, KernelStrategy::constant(w), [&](History x) { return f(x[0]); }),
              expect(model.base.mixture(w), f), 1e-15);
}

TEST(JointExpectTest, RejectsNonFinitePayoffAndBadWeights) {
  const HorizonModel model(example52(), 1);
  EXPECT_THROW(joint_expect(model, KernelStrategy::constant({0.5, 0.5}),
                            [](History x) { return 1.0 / x[0]; }),
               NumericalGuardError);
  EXPECT_THROW(joint_expect(model, KernelStrategy::constant({0.7, 0.7}), sum_payoff),
               ValidationError);
  EXPECT_THROW(HorizonModel(example52(), 0), ValidationError);
}

TEST(SupExpectHistoryTest, Examples) {
  const HorizonModel model(example52(), 2);
  EXPECT_EQ(sup_expect_history(model, sum_payoff), 2.0);
  EXPECT_EQ(sup_expect_history(model, squared_gap), 1.0);
  EXPECT_EQ(sup_expect_history(model, [](History x) { return -(x[0] - x[1]) * (x[0] - x[1]); }),
            0.0);
}

TEST(SupExpectHistoryTest, TreeGuard) {
  std::vector<Atom> atoms;
  for (int i = 0; i < 100; ++i) atoms.push_back({static_cast<double>(i), 0.01});
  const HorizonModel model(hull({DiscreteMeasure(atoms)}), 4);
  EXPECT_THROW(sup_expect_history(model, sum_payoff), NumericalGuardError);
}

TEST(BruteForceSupTest, Examples) {
  EXPECT_EQ(brute_force_sup(HorizonModel(example52(), 2), squared_gap), 1.0);
  const HorizonModel single(bernoulli_half(), 3);
  EXPECT_DOUBLE_EQ(brute_force_sup(single, sum_payoff),
                   joint_expect(single, KernelStrategy::constant({1.0}), sum_payoff));
  EXPECT_THROW(brute_force_sup(HorizonModel(example52(), 4), sum_payoff), NumericalGuardError);
}

// The oracle's enumeration agrees with joint_expect over explicitly
// materialized strategies.
TEST(BruteForceSupTest, MatchesMaterializedStrategies) {
  const MeasureSet set = hull({DiscreteMeasure::bernoulli(0.3), DiscreteMeasure::dirac(1.0),
                               DiscreteMeasure({{-1.0, 0.5}, {1.0, 0.5}})});
  const HorizonModel model(set, 2);
  const PathPayoff payoff = [](History x) { return std::sin(2.0 * x[0] - x[1]) + x[0] * x[1]; };
  const auto support = set.support_union();  // {-1, 0, 1}
  double best = -INFINITY;
  // Root extreme r, then an extreme for each of the three possible x_1.
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 27; ++c) {
      const int choice[3] = {c % 3, (c / 3) % 3, c / 9};
      const KernelStrategy s([&, r, choice](int step, History h) {
        std::vector<double> w(3, 0.0);
        if (step == 1) {
          w[r] = 1.0;
        } else {
          const auto idx = std::ranges::find(support, h[0]) - support.begin();
          w[choice[idx]] = 1.0;
        }
        return w;
      });
      best = std::max(best, joint_expect(model, s, payoff));
    }
  EXPECT_NEAR(brute_force_sup(model, payoff), best, 1e-12);
}

// DP-oracle equivalence and strategy dominance on random models.
TEST(SupExpectHistoryTest, MatchesBruteForceAndDominatesStrategies) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const MeasureSet set = random_set(rng, 3, 3);
    const HorizonModel model(set, 1 + trial % 3);
    const double a = coef(rng), b = coef(rng);
    const PathPayoff payoff = [a, b](History x) {
      double s = 0.0, m = x[0];
      for (double v : x) {
        s += v;
        m = std::max(m, v);
      }
      return std::cos(a * s) + b * m * m;
    };
    const double dp = sup_expect_history(model, payoff);
    EXPECT_NEAR(dp, brute_force_sup(model, payoff), 1e-12);
    for (int k = 0; k < 5; ++k) {
      std::vector<double> w(set.size());
      double total = 0.0;
      for (double& x : w) total += (x = std::uniform_real_distribution<double>(0, 1)(rng));
      for (double& x : w) x /= total;
      EXPECT_LE(joint_expect(model, KernelStrategy::constant(w), payoff), dp + 1e-12);
    }
  }
}

TEST(SupExpectSumTest, Examples) {
  EXPECT_EQ(sup_expect_sum(HorizonModel(example52(), 2), [](double s) { return s; }, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(
      sup_expect_sum(HorizonModel(bernoulli_half(), 2), [](double s) { return s; }, 0.5), 0.5);
}

TEST(SupExpectSumTest, Example52DistanceToMeanIntervalIsZero) {
  // Every S_n / n lies in [0, 1] under hull{delta_0, delta_1}.
  const auto d = [](double x) { return std::max({0.0, -x, x - 1.0}); };
  for (int n : {1, 10, 50, 200})
    EXPECT_EQ(sup_expect_sum(HorizonModel(example52(), n), d, 1.0 / n), 0.0);
}

TEST(SupExpectSumTest, AgreesWithHistoryDp) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const MeasureSet set = random_set(rng, 3, 3, /*lattice=*/true);
    const HorizonModel model(set, 1 + trial % 4);
    const auto f = [](double s) { return std::sin(1.7 * s) - 0.2 * s * s; };
    const double scaling = 1.0 / std::sqrt(model.horizon);
    EXPECT_NEAR(sup_expect_sum(model, f, scaling),
                sup_expect_history(model, [&](History x) {
                  double s = 0.0;
                  for (double v : x) s += v;
                  return f(scaling * s);
                }),
                1e-12);
  }
}

TEST(SupExpectSumTest, SingletonMatchesConvolution) {
  const DiscreteMeasure m({{-1.0, 0.2}, {0.5, 0.5}, {2.0, 0.3}});
  const auto f = [](double x) { return std::abs(x - 0.3); };
  for (int n : {1, 5, 12}) {
    double exact = 0.0;
    for (const auto& [s, p] : convolve(m, n)) exact += p * f(s / n);
    EXPECT_NEAR(sup_expect_sum(HorizonModel(hull({m}), n), f, 1.0 / n), exact, 1e-12);
  }
}

TEST(SupExpectSumTest, Guards) {
  const MeasureSet irrational = hull({DiscreteMeasure::dirac(std::sqrt(2.0)),
                                      DiscreteMeasure::dirac(0.0)});
  EXPECT_THROW(sup_expect_sum(HorizonModel(irrational, 2), [](double s) { return s; }, 1.0),
               NumericalGuardError);
  const MeasureSet wide = hull({DiscreteMeasure({{0.0, 0.5}, {1e6, 0.5}}),
                                DiscreteMeasure::dirac(1.0)});
  EXPECT_THROW(sup_expect_sum(HorizonModel(wide, 20), [](double s) { return s; }, 1.0),
               NumericalGuardError);
}

TEST(ConditionalChecksTest, Example52MeansAndVariances) {
  const HorizonModel model(example52(), 4);
  const KernelStrategy strategy([](int step, History h) {
    double s = 0.0;
    for (double v : h) s += v;
    const double p = std::fmod(0.37 * step + 0.61 * s, 1.0);
    return std::vector<double>{1.0 - p, p};
  });
  const CheckReport range = conditional_range_check(model, strategy, [](double x) { return x; });
  EXPECT_TRUE(range.ok());
  EXPECT_GE(range.min_observed, 0.0);
  EXPECT_LE(range.max_observed, 1.0);
  const CheckReport var = conditional_variance_check(model, strategy);
  EXPECT_TRUE(var.ok());
  EXPECT_LE(var.max_observed, 0.25);
  EXPECT_EQ(var.nodes_checked, range.nodes_checked);
}

TEST(ConditionalChecksTest, SingletonIsConstant) {
  const HorizonModel model(hull({DiscreteMeasure({{-1.0, 0.25}, {2.0, 0.75}})}), 3);
  const auto strategy = KernelStrategy::constant({1.0});
  const CheckReport range = conditional_range_check(model, strategy, [](double x) { return x; });
  EXPECT_TRUE(range.ok());
  EXPECT_DOUBLE_EQ(range.min_observed, 1.25);
  EXPECT_DOUBLE_EQ(range.max_observed, 1.25);
  const CheckReport var = conditional_variance_check(model, strategy);
  EXPECT_DOUBLE_EQ(var.min_observed, var.max_observed);
  EXPECT_EQ(var.nodes_checked, 1u + 2u + 4u);
}

TEST(ConditionalChecksTest, RandomStrategiesProduceNoViolations) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const MeasureSet set = random_set(rng, 3, 3);
    const HorizonModel model(set, 1 + trial % 4);
    const std::uint64_t seed = rng();
    const KernelStrategy strategy([seed, k = set.size()](int step, History h) {
      std::seed_seq seq{static_cast<unsigned>(seed), static_cast<unsigned>(step),
                        static_cast<unsigned>(h.size())};
      std::mt19937_64 local(seq);
      double acc = 0.0;
      for (double v : h) acc += v;
      std::vector<double> w(k);
      double total = 0.0;
      for (double& x : w)
        total += (x = std::uniform_real_distribution<double>(0, 1)(local) + std::abs(std::sin(acc)));
      for (double& x : w) x /= total;
      return w;
    });
    EXPECT_TRUE(conditional_range_check(model, strategy, [](double x) { return x * x - x; }).ok());
    EXPECT_TRUE(conditional_variance_check(model, strategy).ok());
  }
}

TEST(CenteredSumSupTest, SingleStepExamples) {
  const auto square = [](double x) { return x * x; };
  EXPECT_NEAR(centered_sum_sup(HorizonModel(bernoulli_half(), 1), square, MixtureGrid{1},
                               ValueGridSpec{0.01}),
              0.25, 1e-12);
  // Oracle: 1-D sweep of Var(Bernoulli(lambda)).
  double sweep = 0.0;
  for (int i = 0; i <= 1000; ++i) sweep = std::max(sweep, (i / 1000.0) * (1.0 - i / 1000.0));
  EXPECT_NEAR(centered_sum_sup(HorizonModel(example52(), 1), square, MixtureGrid{100},
                               ValueGridSpec{0.01}),
              sweep, 1e-12);
}

TEST(CenteredSumSupTest, Example52ApproachesGExpectation) {
  const Payoff tent = parse_payoff("tent");
  const double dp = centered_sum_sup(HorizonModel(example52(), 512), tent.function,
                                     MixtureGrid{100}, ValueGridSpec{0.01});
  const double limit = g_expect(tent.function, ThetaInterval(0.0, 0.25), GMethod::pde).value;
  EXPECT_NEAR(dp, limit, 0.02);
}

TEST(CenteredSumSupTest, NondecreasingInMixtureResolution) {
  // A payoff whose sup is not attained at zero volatility.
  const auto payoff = [](double x) { return std::min(std::abs(x), 0.6) - 0.3 * x * x; };
  const HorizonModel model(example52(), 32);
  double previous = -INFINITY;
  for (int M : {1, 2, 4, 8, 16}) {
    const double v = centered_sum_sup(model, payoff, MixtureGrid{M}, ValueGridSpec{0.005});
    EXPECT_GE(v, previous);
    previous = v;
  }
}

TEST(CenteredSumSupTest, SingletonReducesToClassicalConvolution) {
  const DiscreteMeasure m({{-1.0, 0.25}, {0.0, 0.25}, {2.0, 0.5}});
  const Payoff tent = parse_payoff("tent");
  for (int n : {2, 7, 12}) {
    std::map<double, double> law = convolve(m, n);
    double exact = 0.0;
    for (const auto& [s, p] : law) exact += p * tent.function((s - n * m.mean()) / std::sqrt(n));
    const double dp =
        centered_sum_sup(HorizonModel(hull({m}), n), tent.function, MixtureGrid{1}, ValueGridSpec{0.001});
    EXPECT_NEAR(dp, exact, 2e-3) << "n=" << n;
  }
}

TEST(CenteredSumSupTest, Errors) {
  const HorizonModel model(example52(), 4);
  const auto f = [](double x) { return x; };
  EXPECT_THROW(centered_sum_sup(model, f, MixtureGrid{0}, ValueGridSpec{0.01}), ValidationError);
  ValueGridSpec narrow{0.01};
  narrow.radius = 1.0;  // needs 4 * sqrt(1/4) = 2
  EXPECT_THROW(centered_sum_sup(model, f, MixtureGrid{4}, narrow), NumericalGuardError);
}

TEST(VolatilityMatchingTest, WeightsFollowTheMixtureFormula) {
  const HorizonModel model(example52(), 3);
  const auto vm = volatility_matching_strategy(model, [](int, History) { return 0.125; });
  EXPECT_NEAR(vm.down_weight(0.25), 0.0, 1e-12);
  EXPECT_NEAR(vm.down_weight(0.0), 1.0, 1e-12);
  EXPECT_NEAR(vm.down_weight(0.125), 0.5, 1e-12);
  // P_down = delta_0, P_up = Bernoulli(1/2): half-half gives Bernoulli(1/4).
  const auto w = vm.strategy().choose(1, {}, 2);
  EXPECT_NEAR(w[0], 0.75, 1e-12);
  EXPECT_NEAR(w[1], 0.25, 1e-12);
  // Variance is not affine in the mixture: realized 3/16, not the 1/8 target.
  for (double v : vm.realized_variances(model)) EXPECT_NEAR(v, 0.1875, 1e-12);
}

TEST(VolatilityMatchingTest, DegenerateBoundsUseUpperMeasure) {
  const HorizonModel model(hull({DiscreteMeasure::bernoulli(0.5), DiscreteMeasure::bernoulli(0.5)}), 2);
  const auto vm = volatility_matching_strategy(model, [](int, History) { return 0.25; });
  EXPECT_EQ(vm.down_weight(0.25), 0.0);
  EXPECT_TRUE(conditional_variance_check(model, vm.strategy()).ok());
}

TEST(VolatilityMatchingTest, Errors) {
  const HorizonModel model(example52(), 2);
  const auto vm = volatility_matching_strategy(model, [](int, History) { return 0.3; });
  EXPECT_THROW(vm.strategy().choose(1, {}, 2), ValidationError);
  EXPECT_THROW(vm.down_weight(-0.1), ValidationError);
  EXPECT_THROW(VolatilityMatchingStrategy(model, [](int, History) { return 0.1; },
                                          HullPoint{{1.0, 0.0}, DiscreteMeasure::dirac(0.0)},
                                          min_variance_point(model.base)),
               ValidationError);
}

// The DP sup dominates the value of any concrete strategy, including the
// volatility-matching construction with a history-dependent target.
TEST(VolatilityMatchingTest, CenteredDpDominatesMatchingStrategy) {
  const HorizonModel model(example52(), 8);
  const auto payoff = [](double x) { return std::min(std::abs(x), 0.4); };
  const auto vm = volatility_matching_strategy(model, [](int step, History h) {
    double s = 0.0;
    for (double v : h) s += v;
    return (step + static_cast<int>(s)) % 2 == 0 ? 0.25 : 0.125;
  });
  const double strategy_value = strategy_centered_expect(model, vm.strategy(), payoff);
  const double dp = centered_sum_sup(model, payoff, MixtureGrid{100}, ValueGridSpec{0.0005});
  EXPECT_GE(dp, strategy_value - 1e-3);
  EXPECT_TRUE(conditional_variance_check(model, vm.strategy()).ok());
}

TEST(PathEmbedTest, Examples) {
  const std::vector<double> x{1.0, 0.0};
  const EmbeddedPath path = path_embed(x);
  EXPECT_DOUBLE_EQ(path.at(0.25), 0.5);
  EXPECT_DOUBLE_EQ(path.at(0.5), 1.0);
  EXPECT_DOUBLE_EQ(path.at(0.75), 0.5);
  EXPECT_DOUBLE_EQ(path.at(0.0), 0.0);
  EXPECT_DOUBLE_EQ(path.at(1.0), 0.0);

  const std::vector<double> flat(5, 2.0);
  const EmbeddedPath plateau = path_embed(flat);
  EXPECT_DOUBLE_EQ(plateau.at(0.1), 1.0);
  for (double t : {0.2, 0.5, 0.9, 1.0}) EXPECT_DOUBLE_EQ(plateau.at(t), 2.0);

  const auto samples = path.samples(5);
  EXPECT_EQ(samples, (std::vector<double>{0.0, 0.5, 1.0, 0.5, 0.0}));
  EXPECT_THROW(path_embed(std::vector<double>{}), ValidationError);
}

TEST(PathEmbedTest, LipschitzFromKnotsToSupNorm) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 9;
    std::vector<double> x(n), y(n);
    double knot_gap = 0.0;
    for (int i = 0; i < n; ++i) {
      x[i] = u(rng);
      y[i] = u(rng);
      knot_gap = std::max(knot_gap, std::abs(x[i] - y[i]));
    }
    const auto px = path_embed(x).samples(257), py = path_embed(y).samples(257);
    for (std::size_t j = 0; j < px.size(); ++j) EXPECT_LE(std::abs(px[j] - py[j]), knot_gap + 1e-12);
  }
}

TEST(PathFunctionalTest, Examples) {
  const std::vector<double> x{1.0, 0.0};
  const EmbeddedPath path = path_embed(x);
  EXPECT_EQ(path_functional_eval({PathFunctionalKind::terminal, {}, {}}, path), 0.0);
  EXPECT_EQ(path_functional_eval({PathFunctionalKind::running_max, {}, {}}, path), 1.0);
  EXPECT_DOUBLE_EQ(path_functional_eval({PathFunctionalKind::time_average, {}, {}}, path), 0.5);
  const PathFunctional composite{PathFunctionalKind::lipschitz_composite,
                                 PathFunctionalKind::running_max,
                                 [](double m) { return std::min(m, 0.5); }};
  EXPECT_EQ(path_functional_eval(composite, path), 0.5);
  EXPECT_EQ(parse_path_functional_kind("time_average"), PathFunctionalKind::time_average);
  EXPECT_THROW(parse_path_functional_kind("median"), ValidationError);
  EXPECT_THROW(path_functional_eval({PathFunctionalKind::lipschitz_composite, {}, {}}, path),
               ValidationError);
}

}  // namespace
}  // namespace gcltlab
