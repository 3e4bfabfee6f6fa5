#include "gcltlab/g_limit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "gcltlab/error.hpp"
#include "gcltlab/parallel.hpp"

namespace gcltlab {

ThetaInterval::ThetaInterval(double low, double high) : sigma2_low(low), sigma2_high(high) {
  require(std::isfinite(low) && std::isfinite(high), "theta bounds must be finite");
  require(low >= 0.0, "theta lower bound must be nonnegative");
  require(low <= high, "theta lower bound exceeds upper bound");
}

double g_function(double a, const ThetaInterval& theta) {
  return 0.5 * (theta.sigma2_high * std::max(a, 0.0) - theta.sigma2_low * std::max(-a, 0.0));
}

GHeatConfig GHeatConfig::with_defaults(ThetaInterval theta, RealFunction terminal,
                                       double h, double margin) {
  require(h > 0.0, "grid step must be positive");
  const double sigma = std::sqrt(theta.sigma2_high);
  const double radius = std::max(4.0 * sigma * (1.0 + margin), 1.0);
  const int steps =
      std::max(1, static_cast<int>(std::ceil(theta.sigma2_high / (h * h) - 1e-9)));
  return {theta, radius, h, steps, std::move(terminal)};
}

GSolution solve_g_heat(const GHeatConfig& config) {
  const ThetaInterval& theta = config.theta;
  require(config.h > 0.0, "grid step must be positive");
  require(config.time_steps >= 1, "time steps must be at least 1");
  require(static_cast<bool>(config.terminal), "terminal function missing");
  guard(config.x_radius >= 4.0 * std::sqrt(theta.sigma2_high) - 1e-12,
        "x radius must be at least 4 sqrt(sigma2_high)");
  const double dt = 1.0 / config.time_steps;
  guard(dt * theta.sigma2_high <= config.h * config.h * (1.0 + 1e-12),
        "CFL violation: dt > h^2 / sigma2_high");

  ValueGrid grid = ValueGrid::symmetric(config.x_radius, config.h, 0);
  auto& u = grid.values();
  for (std::size_t k = 0; k < u.size(); ++k) {
    u[k] = config.terminal(grid.node(k));
    guard(std::isfinite(u[k]), "terminal value is not finite on the grid");
  }

  const double ratio = dt / (config.h * config.h);
  std::vector<double> next(u);
  for (int step = 0; step < config.time_steps; ++step) {
    parallel_for(1, u.size() - 1, [&](std::size_t k) {
      const double second = u[k + 1] - 2.0 * u[k] + u[k - 1];
      next[k] = u[k] + ratio * g_function(second, theta);
    }, 1024);
    std::swap(u, next);
  }
  return {u[grid.nearest(0.0)], std::move(grid)};
}

double tree_g_expect(const RealFunction& payoff, const ThetaInterval& theta,
                     TreeConfig config) {
  require(config.steps >= 1, "tree needs at least one step");
  require(config.subdivisions >= 1, "tree subdivisions must be at least 1");
  require(config.volatility_levels >= 2, "volatility grid needs both endpoints");
  guard(config.margin >= 0.0, "tree grid must cover +-4 sigma_high");

  const double sigma_high = std::sqrt(theta.sigma2_high);
  if (sigma_high == 0.0) return payoff(0.0);

  const double dt = 1.0 / config.steps;
  const double h = sigma_high * std::sqrt(dt) / config.subdivisions;
  ValueGrid grid = ValueGrid::symmetric(4.0 * sigma_high * (1.0 + config.margin), h);
  std::vector<double> next(grid.size());
  for (std::size_t k = 0; k < next.size(); ++k) {
    next[k] = payoff(grid.node(k));
    guard(std::isfinite(next[k]), "payoff is not finite on the tree grid");
  }

  struct Move {
    long up_whole, down_whole;
    double up_frac, down_frac;
  };
  std::vector<Move> moves;
  for (int l = 0; l < config.volatility_levels; ++l) {
    const double s2 = theta.sigma2_low + (theta.sigma2_high - theta.sigma2_low) * l /
                                             (config.volatility_levels - 1);
    const double u = std::sqrt(s2 * dt) / h;
    const double up = std::floor(u);
    const double down = std::floor(-u);
    moves.push_back({static_cast<long>(up), static_cast<long>(down), u - up, -u - down});
  }

  std::vector<double> current(next.size());
  for (int step = 0; step < config.steps; ++step) {
    parallel_for(0, current.size(), [&](std::size_t k) {
      double best = -std::numeric_limits<double>::infinity();
      const long base = static_cast<long>(k);
      for (const Move& m : moves) {
        const double v = 0.5 * (interpolate_index(next, base, m.up_whole, m.up_frac) +
                                interpolate_index(next, base, m.down_whole, m.down_frac));
        best = std::max(best, v);
      }
      current[k] = best;
    }, 1024);
    std::swap(current, next);
  }
  return next[grid.nearest(0.0)];
}

GExpectation g_expect(const RealFunction& payoff, const ThetaInterval& theta,
                      GMethod method, GExpectOptions options) {
  auto pde = [&] {
    return solve_g_heat(GHeatConfig::with_defaults(theta, payoff, options.h)).value_at_origin;
  };
  switch (method) {
    case GMethod::pde:
      return {pde(), std::nullopt};
    case GMethod::tree:
      return {tree_g_expect(payoff, theta, options.tree), std::nullopt};
    case GMethod::both: {
      const double p = pde();
      const double t = tree_g_expect(payoff, theta, options.tree);
      const double gap = std::abs(p - t);
      guard(gap <= options.tolerance, "PDE and tree G-expectations differ by " +
                                          std::to_string(gap) + " > tolerance " +
                                          std::to_string(options.tolerance));
      return {p, gap};
    }
  }
  throw ValidationError("unknown G-expectation method");
}

double inner_ramp(double x, double a, double b, double eps) {
  const double inf = std::numeric_limits<double>::infinity();
  const double left = std::isfinite(a) ? (x - a) / eps : inf;
  const double right = std::isfinite(b) ? (b - x) / eps : inf;
  return std::clamp(std::min(left, right), 0.0, 1.0);
}

double outer_ramp(double x, double a, double b, double eps) {
  const double inf = std::numeric_limits<double>::infinity();
  const double left = std::isfinite(a) ? (x - a) / eps + 1.0 : inf;
  const double right = std::isfinite(b) ? (b - x) / eps + 1.0 : inf;
  return std::clamp(std::min(left, right), 0.0, 1.0);
}

CapacityBracket capacity_interval(double a, double b, const ThetaInterval& theta,
                                  double epsilon, double h) {
  require(!std::isnan(a) && !std::isnan(b) && a < b, "capacity interval needs a < b");
  require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be positive");
  if (std::isfinite(a) && std::isfinite(b))
    require(epsilon < 0.5 * (b - a), "epsilon must be below (b - a) / 2");
  if (h <= 0.0) h = std::min(0.01, epsilon / 4.0);

  auto solve = [&](RealFunction f) {
    return solve_g_heat(GHeatConfig::with_defaults(theta, std::move(f), h)).value_at_origin;
  };
  const double lower = solve([=](double x) { return inner_ramp(x, a, b, epsilon); });
  const double upper = solve([=](double x) { return outer_ramp(x, a, b, epsilon); });
  return {std::clamp(lower, 0.0, 1.0), std::clamp(upper, 0.0, 1.0), epsilon};
}

McEstimate control_mc_lower_bound(const EmbeddedPathPayoff& payoff,
                                  const ThetaInterval& theta,
                                  const VolatilityControl& control, McConfig config) {
  require(config.paths >= 100, "Monte Carlo needs at least 100 paths");
  require(config.steps >= 1, "Monte Carlo needs at least one time step");
  const double sigma_lo = std::sqrt(theta.sigma2_low);
  const double sigma_hi = std::sqrt(theta.sigma2_high);
  const double dt = 1.0 / config.steps;
  const double sqrt_dt = std::sqrt(dt);

  std::vector<double> samples(config.paths);
  parallel_for(0, config.paths, [&](std::size_t i) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
    std::mt19937_64 engine(seq);
    std::normal_distribution<double> normal;
    std::vector<double> path(static_cast<std::size_t>(config.steps) + 1, 0.0);
    for (int k = 0; k < config.steps; ++k) {
      const double sigma =
          control(k * dt, std::span<const double>(path.data(), static_cast<std::size_t>(k) + 1));
      require(sigma >= sigma_lo - 1e-12 && sigma <= sigma_hi + 1e-12,
              "control value outside sqrt(theta)");
      path[k + 1] = path[k] + sigma * sqrt_dt * normal(engine);
    }
    samples[i] = payoff(EmbeddedPath(std::move(path)));
  }, 512);

  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double var = ss / static_cast<double>(samples.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(samples.size()))};
}

}  // namespace gcltlab
