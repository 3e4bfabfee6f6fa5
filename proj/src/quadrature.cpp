#include "gcltlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gcltlab/error.hpp"

namespace gcltlab {

double normal_expect(const RealFunction& f, double variance, std::span<const double> kinks) {
  require(variance >= 0.0, "variance must be nonnegative");
  if (variance == 0.0) return f(0.0);
  const double sd = std::sqrt(variance);
  const double reach = 12.0 * sd;

  std::vector<double> cuts{-reach, reach};
  for (double k : kinks)
    if (k > -reach && k < reach) cuts.push_back(k);
  std::ranges::sort(cuts);

  const double norm = 1.0 / (sd * std::sqrt(2.0 * std::numbers::pi));
  auto integrand = [&](double x) { return f(x) * norm * std::exp(-0.5 * x * x / variance); };
  using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  double total = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    if (cuts[i] <= cuts[i - 1]) continue;
    total += Rule::integrate(integrand, cuts[i - 1], cuts[i], 15, 1e-13);
  }
  return total;
}

double normal_interval_probability(double a, double b, double variance) {
  require(variance > 0.0, "variance must be positive");
  require(a <= b, "interval needs a <= b");
  const boost::math::normal_distribution<double> dist(0.0, std::sqrt(variance));
  const double upper = std::isfinite(b) ? boost::math::cdf(dist, b) : (b > 0 ? 1.0 : 0.0);
  const double lower = std::isfinite(a) ? boost::math::cdf(dist, a) : (a > 0 ? 1.0 : 0.0);
  return upper - lower;
}

}  // namespace gcltlab
