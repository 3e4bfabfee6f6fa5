#include "gcltlab/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gcltlab/error.hpp"
#include "gcltlab/g_limit.hpp"
#include "gcltlab/limit_harness.hpp"

namespace gcltlab {

namespace {

double parse_number(const std::string& token) {
  if (token == "inf" || token == "+inf") return std::numeric_limits<double>::infinity();
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ValidationError("not a number: '" + token + "'");
  }
  require(used == token.size(), "not a number: '" + token + "'");
  return value;
}

std::vector<double> parse_arguments(const std::string& text) {
  std::vector<double> out;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) out.push_back(parse_number(token));
  return out;
}

void expect_arity(const std::string& spec, const std::vector<double>& args, std::size_t n) {
  require(args.size() == n, "payoff '" + spec + "' expects " + std::to_string(n) + " parameter(s)");
}

std::vector<double> finite_only(std::initializer_list<double> points) {
  std::vector<double> out;
  for (double p : points)
    if (std::isfinite(p)) out.push_back(p);
  return out;
}

}  // namespace

Payoff parse_payoff(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::vector<double> args =
      colon == std::string::npos ? std::vector<double>{} : parse_arguments(spec.substr(colon + 1));

  if (name == "identity") {
    expect_arity(spec, args, 0);
    return {spec, [](double x) { return x; }, {}};
  }
  if (name == "square") {
    expect_arity(spec, args, 0);
    return {spec, [](double x) { return x * x; }, {}};
  }
  if (name == "abs") {
    expect_arity(spec, args, 0);
    return {spec, [](double x) { return std::abs(x); }, {0.0}};
  }
  if (name == "tent") {
    expect_arity(spec, args, 0);
    return {spec, [](double x) { return 1.0 - std::min(std::abs(x), 1.0); }, {-1.0, 0.0, 1.0}};
  }
  if (name == "one_minus_abs") {
    expect_arity(spec, args, 0);
    return {spec, [](double x) { return 1.0 - std::abs(x); }, {0.0}};
  }
  if (name == "const") {
    expect_arity(spec, args, 1);
    const double c = args[0];
    return {spec, [c](double) { return c; }, {}};
  }
  if (name == "call") {
    expect_arity(spec, args, 1);
    const double k = args[0];
    return {spec, [k](double x) { return std::max(x - k, 0.0); }, {k}};
  }
  if (name == "dtheta") {
    expect_arity(spec, args, 2);
    const double lo = args[0], hi = args[1];
    require(lo <= hi, "dtheta needs lo <= hi");
    return {spec, [lo, hi](double x) { return d_theta(x, lo, hi); }, {lo, hi}};
  }
  if (name == "ramp_inner" || name == "ramp_outer") {
    expect_arity(spec, args, 3);
    const double a = args[0], b = args[1], eps = args[2];
    require(a < b && eps > 0.0, "ramp needs a < b and eps > 0");
    if (name == "ramp_inner")
      return {spec, [=](double x) { return inner_ramp(x, a, b, eps); },
              finite_only({a, a + eps, b - eps, b})};
    return {spec, [=](double x) { return outer_ramp(x, a, b, eps); },
            finite_only({a - eps, a, b, b + eps})};
  }
  throw ValidationError("unknown payoff: '" + spec + "'");
}

}  // namespace gcltlab
