#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lhc/error.hpp"
#include "lhc/hjm_drift.hpp"
#include "lhc/migration.hpp"
#include "lhc/scenario.hpp"
#include "lhc/verification.hpp"
#ifdef LHC_WITH_CLI
#include "cli.hpp"
#endif

namespace py = pybind11;
using namespace lhc;

namespace {

LevyModel make_model(const Vec& drift, const Mat& covariance, const std::vector<std::pair<Vec, double>>& atoms) {
  std::vector<JumpAtom> list;
  for (const auto& [y, rho] : atoms) list.push_back({y, rho});
  return LevyModel(drift, covariance, std::move(list));
}

py::dict martingale_dict(const MartingaleReport& r) {
  py::dict d;
  d["nodes"] = r.nodes;
  d["checkpoints"] = r.checkpoints;
  d["initial"] = r.initial;
  d["mean"] = r.mean;
  d["std_err"] = r.std_err;
  d["z"] = r.z;
  d["max_abs_z"] = r.max_abs_z();
  d["paths"] = r.paths;
  d["degenerate"] = r.degenerate;
  d["pass"] = r.pass();
  return d;
}

py::dict martingale(const std::string& path, std::optional<std::uint64_t> n_paths, bool defaultable, double bump,
                    int threads) {
  const Scenario s = load_scenario(path);
  MarketModel model = build_market(s, defaultable);
  const int m = s.maturity_node();
  const auto nodes = martingale_checkpoints(m, s.mc.checkpoints);
  const std::uint64_t n = n_paths.value_or(s.mc.n_paths);
  model.riskfree_drift_bump = bump;
  if (defaultable) model.rating_drift_bump.assign(model.ratings.size(), bump);
  MartingaleReport r;
  {
    py::gil_scoped_release release;
    const MarketSimulator market(std::move(model));
    r = defaultable ? defaultable_martingale_test(market, m, n, s.mc.seed, nodes, s.mc.z_threshold, threads)
                    : riskfree_martingale_test(market, m, n, s.mc.seed, nodes, s.mc.z_threshold, threads);
  }
  return martingale_dict(r);
}

py::dict residuals(const std::string& path, std::uint64_t path_index) {
  const Scenario s = load_scenario(path);
  const MarketSimulator market(build_market(s, true));
  SimulationOptions options;
  options.keep_drifts = true;
  const auto r = path_residuals(market, market.simulate(s.mc.seed, path_index, options));
  py::dict d;
  d["residual_max"] = r.residual_max;
  d["residual_mean"] = r.residual_mean;
  d["tolerance"] = r.tolerance;
  d["equivalence_gap"] = r.equivalence_gap;
  return d;
}

}  // namespace

PYBIND11_MODULE(_lhc, m) {
  m.doc() = "Lévy HJM term structures with rating migration";

  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<H1InfeasibleError>(m, "H1InfeasibleError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<UnsupportedModeError>(m, "UnsupportedModeError", PyExc_ValueError);

  py::class_<LevyModel>(m, "LevyModel")
      .def(py::init(&make_model), py::arg("drift"), py::arg("covariance"),
           py::arg("atoms") = std::vector<std::pair<Vec, double>>{})
      .def_property_readonly("dim", &LevyModel::dim)
      .def("laplace_exponent", py::overload_cast<const Vec&>(&LevyModel::laplace_exponent, py::const_), py::arg("u"))
      .def("gradient", &LevyModel::laplace_exponent_gradient, py::arg("u"))
      .def("tail_transform", &LevyModel::tail_transform, py::arg("u"))
      .def("mean", &LevyModel::mean);

  m.def(
      "forward_equation",
      [](const Mat& generator, double horizon, int steps, bool absorbing) {
        return solve_forward_equation(IntensityMatrixProcess::constant(generator, absorbing), 0.0, horizon, steps);
      },
      py::arg("generator"), py::arg("horizon"), py::arg("steps"), py::arg("absorbing_default") = true,
      "Transition matrices p(0, t) at the RK4 step boundaries for a constant generator.");

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_property_readonly("seed", [](const Scenario& s) { return s.mc.seed; })
      .def_property_readonly("n_paths", [](const Scenario& s) { return s.mc.n_paths; })
      .def_property_readonly("scheme", [](const Scenario& s) { return s.has_ratings() ? s.scheme.type : "riskfree"; })
      .def_property_readonly("maturity_node", &Scenario::maturity_node)
      .def("canonical_json", [](const Scenario& s) { return canonical_json(s); })
      .def("hash", [](const Scenario& s) { return scenario_hash(s); });

  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("parse_scenario", &parse_scenario, py::arg("text"), py::arg("source") = "<scenario>");

  m.def("martingale_test", &martingale, py::arg("path"), py::arg("n_paths") = std::nullopt,
        py::arg("defaultable") = true, py::arg("bump") = 0.0, py::arg("threads") = 0,
        "Discounted bond martingale test for a scenario file.");
  m.def("path_residuals", &residuals, py::arg("path"), py::arg("path_index") = 0,
        "Drift-condition residual and equivalence gap along one simulated path.");

#ifdef LHC_WITH_CLI
  m.def(
      "run_cli", [](const std::vector<std::string>& args) { return cli::run(args); }, py::arg("args"),
      "Runs the lhc command line and returns its exit code.");
#endif
}
