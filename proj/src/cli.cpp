#include "gcltlab/cli.hpp"

#include <chrono>
#include <cmath>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gcltlab/acceptance.hpp"
#include "gcltlab/error.hpp"
#include "gcltlab/g_limit.hpp"
#include "gcltlab/kernel_dp.hpp"
#include "gcltlab/payoff.hpp"

namespace gcltlab::cli {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::pair<Command, const char*> kCommands[] = {
    {Command::variance, "variance"},   {Command::lln, "lln"},
    {Command::clt, "clt"},             {Command::gheat, "gheat"},
    {Command::capacity, "capacity"},   {Command::mc, "mc"},
    {Command::example51, "example51"}, {Command::example52, "example52"},
    {Command::example53, "example53"}, {Command::selftest, "selftest"},
};

// Parameter access. Values arrive either as JSON scalars (manifests) or as
// strings (command line), so every accessor accepts both.
class Params {
 public:
  explicit Params(const json& p) : p_(p) {}

  bool has(const std::string& key) const { return p_.contains(key); }

  const json& raw(const std::string& key) const {
    require(has(key), "missing required parameter '" + key + "'");
    return p_.at(key);
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = p_.at(key);
    return v.is_string() ? v.get<std::string>() : v.dump();
  }

  double number(const std::string& key, std::optional<double> fallback = {}) const {
    if (!has(key)) {
      require(fallback.has_value(), "missing required parameter '" + key + "'");
      return *fallback;
    }
    return to_number(key, p_.at(key));
  }

  int integer(const std::string& key, int fallback) const {
    const double v = number(key, fallback);
    require(v == std::floor(v) && std::abs(v) < 2e9, "parameter '" + key + "' must be an integer");
    return static_cast<int>(v);
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const json& v = p_.at(key);
    std::vector<double> out;
    if (v.is_array()) {
      for (const json& item : v) out.push_back(to_number(key, item));
      return out;
    }
    std::stringstream stream(v.is_string() ? v.get<std::string>() : v.dump());
    std::string token;
    while (std::getline(stream, token, ',')) out.push_back(to_number(key, json(token)));
    return out;
  }

  std::vector<int> integers(const std::string& key, std::vector<int> fallback) const {
    if (!has(key)) return fallback;
    std::vector<int> out;
    for (double v : numbers(key, {})) {
      require(v == std::floor(v), "parameter '" + key + "' must hold integers");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  ThetaInterval theta(const std::string& key, std::optional<ThetaInterval> fallback = {}) const {
    if (!has(key)) {
      require(fallback.has_value(), "missing required parameter '" + key + "'");
      return *fallback;
    }
    const auto v = numbers(key, {});
    require(v.size() == 2, "parameter '" + key + "' must be 'lo,hi'");
    return ThetaInterval(v[0], v[1]);
  }

  bool timing() const {
    const std::string t = text("timing", "on");
    require(t == "on" || t == "off", "parameter 'timing' must be on or off");
    return t == "on";
  }

 private:
  static double to_number(const std::string& key, const json& v) {
    if (v.is_number()) return v.get<double>();
    require(v.is_string(), "parameter '" + key + "' must be numeric");
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double out = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    require(ec == std::errc{} && ptr == s.data() + s.size() && !s.empty(),
            "parameter '" + key + "' is not a number: '" + s + "'");
    return out;
  }

  const json& p_;
};

double since_ms(Clock::time_point start, bool timing) {
  if (!timing) return 0.0;
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

CsvTable run_variance(const Params& p) {
  const auto start = Clock::now();
  const MeasureSet set = parse_measure_set(p.raw("set"));
  const MeanInterval means = mean_interval(set);
  const VarianceBounds bounds = variance_bounds(set);
  const VarianceOracleEstimate oracle = variance_oracle(set, p.number("grid_step", 0.01));
  CsvTable t{{"experiment", "mean_lower", "mean_upper", "variance_lower", "variance_upper",
              "argmin_mean_upper", "oracle_upper", "oracle_lower", "runtime_ms"},
             {}};
  t.rows.push_back({"variance", format_number(means.lower), format_number(means.upper),
                    format_number(bounds.lower), format_number(bounds.upper),
                    format_number(bounds.argmin_mean_upper), format_number(oracle.upper),
                    format_number(oracle.lower), format_number(since_ms(start, p.timing()))});
  return t;
}

CsvTable run_lln(const Params& p) {
  const MeasureSet set = p.has("set") ? parse_measure_set(p.raw("set")) : example52_set();
  const Payoff payoff = parse_payoff(p.text("payoff", "dtheta:0,1"));
  const auto rows = lln_converge(set, payoff.function, p.number("lipschitz", 1.0),
                                 p.integers("n_list", {10, 50, 200}), "lln");
  return convergence_table(rows, p.timing());
}

CltOptions clt_options(const Params& p, int default_m) {
  CltOptions o;
  o.M = p.integer("M", default_m);
  o.h = p.number("h", 0.01);
  o.limit.tolerance = p.number("tolerance", 0.01);
  return o;
}

CsvTable run_clt(const Params& p) {
  const MeasureSet set = p.has("set") ? parse_measure_set(p.raw("set")) : example52_set();
  const Payoff payoff = parse_payoff(p.text("payoff", "tent"));
  const auto rows = clt_converge(set, payoff.function, p.integers("n_list", {64, 128, 256, 512}),
                                 clt_options(p, 100), "clt");
  return convergence_table(rows, p.timing());
}

CsvTable run_gheat(const Params& p) {
  const auto start = Clock::now();
  const ThetaInterval theta = p.theta("theta");
  const Payoff payoff = parse_payoff(p.text("payoff", "tent"));
  const std::string method = p.text("method", "pde");
  const double h = p.number("h", 0.01);
  int steps = p.integer("steps", 0);
  double value = 0.0;
  std::string discrepancy;
  if (method == "pde") {
    GHeatConfig config = GHeatConfig::with_defaults(theta, payoff.function, h);
    if (steps > 0) config.time_steps = steps;
    if (p.has("radius")) config.x_radius = p.number("radius");
    steps = config.time_steps;
    value = solve_g_heat(config).value_at_origin;
  } else if (method == "tree") {
    TreeConfig tree;
    if (steps > 0) tree.steps = steps;
    steps = tree.steps;
    value = tree_g_expect(payoff.function, theta, tree);
  } else if (method == "both") {
    GExpectOptions options;
    options.h = h;
    if (steps > 0) options.tree.steps = steps;
    options.tolerance = p.number("tolerance", 0.01);
    const GExpectation g = g_expect(payoff.function, theta, GMethod::both, options);
    value = g.value;
    discrepancy = format_number(*g.discrepancy);
    steps = options.tree.steps;
  } else {
    throw ValidationError("method must be pde, tree or both");
  }
  return {{"experiment", "theta_lo", "theta_hi", "payoff", "method", "h", "steps", "value",
           "discrepancy", "runtime_ms"},
          {{"gheat", format_number(theta.sigma2_low), format_number(theta.sigma2_high),
            payoff.spec, method, format_number(h), std::to_string(steps), format_number(value),
            discrepancy, format_number(since_ms(start, p.timing()))}}};
}

CsvTable run_capacity(const Params& p) {
  const auto start = Clock::now();
  const ThetaInterval theta = p.theta("theta", ThetaInterval(0.25, 0.25));
  const double a = p.number("a"), b = p.number("b"), eps = p.number("eps", 0.01);
  const CapacityBracket c = capacity_interval(a, b, theta, eps, p.number("h", 0.0));
  return {{"experiment", "a", "b", "theta_lo", "theta_hi", "epsilon", "lower", "upper",
           "runtime_ms"},
          {{"capacity", format_number(a), format_number(b), format_number(theta.sigma2_low),
            format_number(theta.sigma2_high), format_number(eps), format_number(c.lower),
            format_number(c.upper), format_number(since_ms(start, p.timing()))}}};
}

// Control specs: const:s, piecewise:s1,...,sm (equal time pieces),
// switch:c (sigma_high while the path is above c, else sigma_low),
// high, low.
VolatilityControl parse_control(const std::string& spec, const ThetaInterval& theta) {
  const double lo = std::sqrt(theta.sigma2_low), hi = std::sqrt(theta.sigma2_high);
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    json holder = {{"control", spec.substr(colon + 1)}};
    args = Params(holder).numbers("control", {});
  }
  auto check = [&](double s) {
    require(s >= lo - 1e-12 && s <= hi + 1e-12, "control value outside sqrt(theta)");
  };
  if (name == "high") return [hi](double, std::span<const double>) { return hi; };
  if (name == "low") return [lo](double, std::span<const double>) { return lo; };
  if (name == "const") {
    require(args.size() == 1, "const control takes one value");
    check(args[0]);
    return [s = args[0]](double, std::span<const double>) { return s; };
  }
  if (name == "piecewise") {
    require(!args.empty(), "piecewise control needs levels");
    for (double s : args) check(s);
    return [args](double t, std::span<const double>) {
      const auto m = static_cast<double>(args.size());
      return args[std::min(args.size() - 1, static_cast<std::size_t>(t * m))];
    };
  }
  if (name == "switch") {
    require(args.size() == 1, "switch control takes one threshold");
    return [lo, hi, c = args[0]](double, std::span<const double> path) {
      return path.back() > c ? hi : lo;
    };
  }
  throw ValidationError("unknown control spec: '" + spec + "'");
}

CsvTable run_mc(const Params& p, std::uint64_t seed) {
  const auto start = Clock::now();
  const ThetaInterval theta = p.theta("theta");
  const std::string control_spec = p.text("control", "high");
  const Payoff payoff = parse_payoff(p.text("payoff", "square"));
  McConfig config;
  config.paths = static_cast<std::size_t>(p.integer("paths", 100000));
  config.steps = p.integer("steps", 64);
  config.seed = seed;
  const RealFunction f = payoff.function;
  const McEstimate est = control_mc_lower_bound(
      [f](const EmbeddedPath& path) { return f(path.knots().back()); }, theta,
      parse_control(control_spec, theta), config);
  const double pde = g_expect(f, theta, GMethod::pde).value;
  return {{"experiment", "theta_lo", "theta_hi", "control", "payoff", "paths", "steps", "seed",
           "estimate", "std_error", "lower_bound", "pde_value", "runtime_ms"},
          {{"mc", format_number(theta.sigma2_low), format_number(theta.sigma2_high), control_spec,
            payoff.spec, std::to_string(config.paths), std::to_string(config.steps),
            std::to_string(seed), format_number(est.estimate), format_number(est.std_error),
            format_number(est.estimate - 3.0 * est.std_error), format_number(pde),
            format_number(since_ms(start, p.timing()))}}};
}

// Mean/variance summary rows (dp_value: computed, limit_value: the value the
// example states) followed by the CLT table.
CsvTable run_example(const Params& p, const std::string& name, const MeasureSet& set,
                     MeanInterval stated_means, VarianceBounds stated_var, int default_m) {
  std::vector<ConvergenceRow> rows;
  const auto start = Clock::now();
  const MeanInterval means = mean_interval(set);
  const VarianceBounds var = variance_bounds(set);
  const double ms = since_ms(start, p.timing());
  auto summary = [&](const std::string& what, double computed, double stated) {
    rows.push_back({name + ":" + what, 0, 0, 0, 0.0, computed, stated,
                    std::abs(computed - stated), ms});
  };
  summary("mean_upper", means.upper, stated_means.upper);
  summary("mean_lower", means.lower, stated_means.lower);
  summary("variance_upper", var.upper, stated_var.upper);
  summary("variance_lower", var.lower, stated_var.lower);

  const Payoff payoff = parse_payoff(p.text("payoff", "tent"));
  const auto clt = clt_converge(set, payoff.function, p.integers("n_list", {32, 128, 512}),
                                clt_options(p, default_m), name + ":clt");
  rows.insert(rows.end(), clt.begin(), clt.end());
  return convergence_table(rows, p.timing());
}

CsvTable run_example53(const Params& p) {
  const auto report = example_5_3(p.integers("K_list", {10, 100, 1000}),
                                  p.integers("n_list", {4, 16}));
  return convergence_table(report.rows, p.timing());
}

CsvTable run_selftest(const Params& p, std::ostream& log) {
  const auto results = run_acceptance_suite(
      [&log](const CriterionResult& r) { log << format_criterion(r) << std::endl; },
      p.integers("criteria", {}));
  CsvTable t{{"criterion", "name", "passed", "seconds", "time_limit_seconds", "detail"}, {}};
  for (const auto& r : results)
    t.rows.push_back({std::to_string(r.id), r.name, fmt_bool(r.passed),
                      format_number(p.timing() ? r.seconds : 0.0),
                      format_number(r.time_limit_seconds), r.detail});
  return t;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void assign_parameter(Manifest& manifest, const std::string& key, const std::string& value) {
  require(!key.empty(), "empty parameter name");
  manifest.parameters[key] = value;
}

}  // namespace

Command parse_command(const std::string& name) {
  for (const auto& [command, text] : kCommands)
    if (name == text) return command;
  throw ValidationError("unknown command: '" + name + "'");
}

std::string command_name(Command command) {
  for (const auto& [c, text] : kCommands)
    if (c == command) return text;
  return "unknown";
}

Manifest manifest_from_json(const json& document) {
  require(document.is_object(), "manifest must be a JSON object");
  Manifest m;
  if (document.contains("command")) m.command = parse_command(document.at("command").get<std::string>());
  if (document.contains("parameters")) {
    require(document.at("parameters").is_object(), "manifest parameters must be an object");
    m.parameters = document.at("parameters");
  }
  if (document.contains("seed")) m.seed = document.at("seed").get<std::uint64_t>();
  if (document.contains("output_path")) m.output_path = document.at("output_path").get<std::string>();
  return m;
}

json manifest_to_json(const Manifest& manifest) {
  return {{"command", command_name(manifest.command)},
          {"parameters", manifest.parameters},
          {"seed", manifest.seed},
          {"output_path", manifest.output_path}};
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

CsvTable convergence_table(const std::vector<ConvergenceRow>& rows, bool timing) {
  CsvTable t{{"experiment", "n", "K", "M", "h", "dp_value", "limit_value", "abs_error",
              "runtime_ms"},
             {}};
  auto opt_int = [](int v) { return v > 0 ? std::to_string(v) : std::string(); };
  for (const auto& r : rows)
    t.rows.push_back({r.experiment, opt_int(r.n), opt_int(r.K), opt_int(r.M),
                      r.h > 0.0 ? format_number(r.h) : std::string(), format_number(r.dp_value),
                      format_number(r.limit_value), format_number(r.abs_error),
                      format_number(timing ? r.runtime_ms : 0.0)});
  return t;
}

void write_csv(const CsvTable& table, std::ostream& out) {
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_escape(cells[i]);
    out << '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
}

void emit_csv(const CsvTable& table, const std::string& path) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  require(file.good(), "cannot write output file '" + path + "'");
  write_csv(table, file);
  file.flush();
  require(file.good(), "failed writing output file '" + path + "'");
}

MeasureSet measure_set_from_json(const json& document) {
  require(document.is_object() && document.contains("extremes") && document.at("extremes").is_array(),
          "measure set JSON needs an 'extremes' array");
  std::vector<DiscreteMeasure> extremes;
  for (const json& m : document.at("extremes")) {
    require(m.is_object() && m.contains("atoms") && m.at("atoms").is_array(),
            "each extreme needs an 'atoms' array");
    std::vector<Atom> atoms;
    for (const json& a : m.at("atoms")) {
      require(a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number(),
              "atoms must be [point, weight] pairs");
      atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    }
    extremes.emplace_back(std::move(atoms));
  }
  return MeasureSet(std::move(extremes));
}

MeasureSet parse_measure_set(const json& value) {
  if (value.is_object()) return measure_set_from_json(value);
  require(value.is_string(), "measure set must be a name, a path or a JSON object");
  const std::string text = value.get<std::string>();
  if (text == "example51") return example51_set();
  if (text == "example52") return example52_set();
  if (text.rfind("example53:", 0) == 0) {
    json holder = {{"K", text.substr(10)}};
    return example53_set(Params(holder).integer("K", 1));
  }
  if (!text.empty() && text.front() == '{') return measure_set_from_json(json::parse(text));
  std::ifstream file(text);
  require(file.good(), "cannot read measure set file '" + text + "'");
  return measure_set_from_json(json::parse(file));
}

CsvTable execute(const Manifest& manifest, std::ostream& log) {
  const Params p(manifest.parameters);
  switch (manifest.command) {
    case Command::variance:
      return run_variance(p);
    case Command::lln:
      return run_lln(p);
    case Command::clt:
      return run_clt(p);
    case Command::gheat:
      return run_gheat(p);
    case Command::capacity:
      return run_capacity(p);
    case Command::mc:
      return run_mc(p, manifest.seed);
    case Command::example51:
      return run_example(p, "example51", example51_set(), {0.5, 0.5}, {0.25, 0.25, 0.5}, 1);
    case Command::example52:
      return run_example(p, "example52", example52_set(), {0.0, 1.0}, {0.0, 0.25, 0.5}, 100);
    case Command::example53:
      return run_example53(p);
    case Command::selftest:
      return run_selftest(p, log);
  }
  throw ValidationError("unknown command");
}

int run(const Manifest& manifest, std::ostream& out, std::ostream& err) {
  try {
    const CsvTable table = execute(manifest, out);
    if (!manifest.output_path.empty()) {
      emit_csv(table, manifest.output_path);
      std::ofstream beside(manifest.output_path + ".manifest.json", std::ios::trunc);
      beside << manifest_to_json(manifest).dump(2) << '\n';
    } else if (manifest.command != Command::selftest) {
      write_csv(table, out);
    }
    if (manifest.command == Command::selftest) {
      for (const auto& row : table.rows)
        if (row[2] != "true") return 1;
    }
    return 0;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalGuardError& e) {
    err << "numerical guard: " << e.what() << '\n';
    return 3;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sublinear-expectation limit theorem toolkit", "gcltlab"};
  app.allow_extras();
  std::string command;
  std::string manifest_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  app.add_option("command", command, "variance|lln|clt|gheat|capacity|mc|example51|example52|example53|selftest");
  app.add_option("--manifest", manifest_path, "JSON manifest file");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out_path, "CSV output path");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "validation error: " << e.what() << '\n';
    return 2;
  }

  try {
    Manifest manifest;
    const bool command_is_pair = command.find('=') != std::string::npos;
    if (!manifest_path.empty()) {
      std::ifstream file(manifest_path);
      require(file.good(), "cannot read manifest '" + manifest_path + "'");
      manifest = manifest_from_json(json::parse(file));
    } else {
      require(!command.empty() && !command_is_pair, "no command given");
    }
    if (!command.empty() && !command_is_pair) manifest.command = parse_command(command);
    if (seed) manifest.seed = *seed;
    if (!out_path.empty()) manifest.output_path = out_path;

    // With --manifest the command is optional, so the positional slot may
    // have captured the first key=value pair.
    auto extras = app.remaining();
    if (command_is_pair) extras.insert(extras.begin(), command);

    for (std::size_t i = 0; i < extras.size(); ++i) {
      const std::string& token = extras[i];
      if (token.rfind("--", 0) == 0) {
        const std::string body = token.substr(2);
        if (const auto eq = body.find('='); eq != std::string::npos) {
          assign_parameter(manifest, body.substr(0, eq), body.substr(eq + 1));
        } else {
          require(i + 1 < extras.size(), "flag '" + token + "' needs a value");
          assign_parameter(manifest, body, extras[++i]);
        }
      } else if (const auto eq = token.find('='); eq != std::string::npos) {
        assign_parameter(manifest, token.substr(0, eq), token.substr(eq + 1));
      } else {
        throw ValidationError("unexpected argument '" + token + "'");
      }
    }
    return run(manifest, out, err);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "validation error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace gcltlab::cli
