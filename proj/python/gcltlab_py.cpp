#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gcltlab/cli.hpp"
#include "gcltlab/error.hpp"
#include "gcltlab/g_limit.hpp"
#include "gcltlab/kernel_dp.hpp"
#include "gcltlab/limit_harness.hpp"
#include "gcltlab/measure.hpp"
#include "gcltlab/parallel.hpp"
#include "gcltlab/payoff.hpp"
#include "gcltlab/quadrature.hpp"

namespace py = pybind11;
using namespace gcltlab;

namespace {

// A payoff given either as a named spec or as a Python callable.
using PayoffArg = std::variant<std::string, py::function>;

struct ResolvedPayoff {
  RealFunction function;
  std::vector<double> kinks;
  bool python = false;
};

ResolvedPayoff resolve(const PayoffArg& arg) {
  if (const auto* spec = std::get_if<std::string>(&arg)) {
    Payoff p = parse_payoff(*spec);
    return {std::move(p.function), std::move(p.kinks), false};
  }
  py::function f = std::get<py::function>(arg);
  return {[f](double x) { return f(x).cast<double>(); }, {}, true};
}

// Native payoffs run with the GIL released and full parallelism; Python
// callables run single-threaded on the calling thread, which holds the GIL.
template <typename F>
auto call(const ResolvedPayoff& payoff, F&& body) {
  if (payoff.python) {
    ScopedWorkerLimit limit(1);
    return body();
  }
  py::gil_scoped_release release;
  return body();
}

ThetaInterval theta_of(std::pair<double, double> t) { return {t.first, t.second}; }

GMethod method_of(const std::string& name) {
  if (name == "pde") return GMethod::pde;
  if (name == "tree") return GMethod::tree;
  if (name == "both") return GMethod::both;
  throw ValidationError("method must be pde, tree or both");
}

py::list rows_to_python(const std::vector<ConvergenceRow>& rows) {
  py::list out;
  for (const auto& r : rows) {
    py::dict d;
    d["experiment"] = r.experiment;
    d["n"] = r.n;
    d["K"] = r.K;
    d["M"] = r.M;
    d["h"] = r.h;
    d["dp_value"] = r.dp_value;
    d["limit_value"] = r.limit_value;
    d["abs_error"] = r.abs_error;
    d["runtime_ms"] = r.runtime_ms;
    out.append(std::move(d));
  }
  return out;
}

MeasureSet make_set(const std::vector<std::vector<std::pair<double, double>>>& extremes) {
  std::vector<DiscreteMeasure> measures;
  for (const auto& atoms : extremes) {
    std::vector<Atom> a;
    for (const auto& [point, weight] : atoms) a.push_back({point, weight});
    measures.emplace_back(std::move(a));
  }
  return MeasureSet(std::move(measures));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sublinear expectations, kernel DPs and G-heat limits";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalGuardError>(m, "GuardError", PyExc_ArithmeticError);

  py::class_<MeasureSet>(m, "MeasureSet")
      .def(py::init(&make_set), py::arg("extremes"),
           "Convex hull of finitely supported measures, each a list of (point, weight).")
      .def("__len__", &MeasureSet::size)
      .def_property_readonly("extremes", [](const MeasureSet& s) {
        std::vector<std::vector<std::pair<double, double>>> out;
        for (const auto& e : s.extremes()) {
          auto& atoms = out.emplace_back();
          for (const Atom& a : e.atoms()) atoms.emplace_back(a.point, a.weight);
        }
        return out;
      });

  m.def("example51_set", &example51_set);
  m.def("example52_set", &example52_set);
  m.def("example53_set", &example53_set, py::arg("K"));

  m.def("upper_expect", [](const MeasureSet& set, const PayoffArg& f) {
    const ResolvedPayoff p = resolve(f);
    return call(p, [&] { return upper_expect(set, p.function); });
  }, py::arg("set"), py::arg("payoff"));
  m.def("mean_interval", [](const MeasureSet& set) {
    const MeanInterval i = mean_interval(set);
    return std::make_pair(i.lower, i.upper);
  }, py::arg("set"));
  m.def("variance_bounds", [](const MeasureSet& set) {
    const VarianceBounds v = variance_bounds(set);
    return std::make_pair(v.lower, v.upper);
  }, py::arg("set"));

  m.def("sup_expect_sum", [](const MeasureSet& set, int n, const PayoffArg& f, double scaling) {
    const ResolvedPayoff p = resolve(f);
    return call(p, [&] { return sup_expect_sum(HorizonModel(set, n), p.function, scaling); });
  }, py::arg("set"), py::arg("n"), py::arg("payoff"), py::arg("scaling"),
        "Exact sup over kernel strategies of E[payoff(scaling * S_n)].");
  m.def("centered_sum_sup",
        [](const MeasureSet& set, int n, const PayoffArg& f, int M, double h) {
          const ResolvedPayoff p = resolve(f);
          return call(p, [&] {
            return centered_sum_sup(HorizonModel(set, n), p.function, MixtureGrid{M},
                                    ValueGridSpec{h});
          });
        },
        py::arg("set"), py::arg("n"), py::arg("payoff"), py::arg("M") = 100,
        py::arg("h") = 0.01);

  m.def("g_expect",
        [](const PayoffArg& f, std::pair<double, double> theta, const std::string& method,
           double h) {
          const ResolvedPayoff p = resolve(f);
          const GExpectation g = call(p, [&] {
            return g_expect(p.function, theta_of(theta), method_of(method), GExpectOptions{h});
          });
          return g.value;
        },
        py::arg("payoff"), py::arg("theta"), py::arg("method") = "pde", py::arg("h") = 0.01);
  m.def("tree_g_expect",
        [](const PayoffArg& f, std::pair<double, double> theta, int steps) {
          const ResolvedPayoff p = resolve(f);
          TreeConfig config;
          config.steps = steps;
          return call(p, [&] { return tree_g_expect(p.function, theta_of(theta), config); });
        },
        py::arg("payoff"), py::arg("theta"), py::arg("steps") = 1024);
  m.def("capacity_interval",
        [](double a, double b, std::pair<double, double> theta, double eps) {
          py::gil_scoped_release release;
          const CapacityBracket c = capacity_interval(a, b, theta_of(theta), eps);
          return std::make_pair(c.lower, c.upper);
        },
        py::arg("a"), py::arg("b"), py::arg("theta"), py::arg("eps"));
  m.def("normal_expect", [](const PayoffArg& f, double variance) {
    const ResolvedPayoff p = resolve(f);
    return call(p, [&] { return normal_expect(p.function, variance, p.kinks); });
  }, py::arg("payoff"), py::arg("variance"));

  m.def("lln_converge",
        [](const MeasureSet& set, const PayoffArg& f, double lipschitz, std::vector<int> n_list) {
          const ResolvedPayoff p = resolve(f);
          return rows_to_python(
              call(p, [&] { return lln_converge(set, p.function, lipschitz, n_list); }));
        },
        py::arg("set"), py::arg("payoff"), py::arg("lipschitz"), py::arg("n_list"));
  m.def("clt_converge",
        [](const MeasureSet& set, const PayoffArg& f, std::vector<int> n_list, int M, double h) {
          const ResolvedPayoff p = resolve(f);
          CltOptions options;
          options.M = M;
          options.h = h;
          return rows_to_python(
              call(p, [&] { return clt_converge(set, p.function, n_list, options); }));
        },
        py::arg("set"), py::arg("payoff"), py::arg("n_list"), py::arg("M") = 100,
        py::arg("h") = 0.01);
  m.def("example_5_3",
        [](std::vector<int> K_list, std::vector<int> n_list) {
          Example53Report report;
          {
            py::gil_scoped_release release;
            report = example_5_3(K_list, n_list);
          }
          py::dict d;
          d["rows"] = rows_to_python(report.rows);
          d["classical_value"] = report.classical_value;
          d["monotone_in_K"] = report.monotone_in_K;
          return d;
        },
        py::arg("K_list"), py::arg("n_list"));

  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "gcltlab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = 0;
    {
      py::gil_scoped_release release;
      code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command-line entry point; returns (exit code, stdout, stderr).");
}
