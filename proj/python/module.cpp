#include "mhd2d/errors.hpp"
#include "mhd2d/runner.hpp"
#include "mhd2d/verifier.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace mhd2d;

namespace {

ScenarioConfig parse(const std::string& text, const std::string& format) {
  if (format == "json") return config_from_json(text);
  if (format == "toml") return config_from_toml(text);
  throw Error(ErrorKind::configuration_error, "format must be json or toml");
}

py::array_t<double> column(const std::vector<EnergyReport>& reports, double (*get)(const EnergyReport&)) {
  py::array_t<double> a(static_cast<py::ssize_t>(reports.size()));
  auto w = a.mutable_unchecked<1>();
  for (std::size_t k = 0; k < reports.size(); ++k) w(k) = get(reports[k]);
  return a;
}

py::dict run(const std::string& config_json) {
  const ScenarioConfig c = config_from_json(config_json);
  std::optional<RunResult> result;
  {
    py::gil_scoped_release release;
    result = run_simulation(c);
  }
  const RunResult& r = *result;
  py::dict energy;
  const auto& e = r.energies;
  energy["t"] = column(e, [](const EnergyReport& x) { return x.t; });
  energy["E0"] = column(e, [](const EnergyReport& x) { return x.E[0]; });
  energy["E1"] = column(e, [](const EnergyReport& x) { return x.E[1]; });
  energy["E2"] = column(e, [](const EnergyReport& x) { return x.E[2]; });
  energy["E3"] = column(e, [](const EnergyReport& x) { return x.E[3]; });
  energy["Kcal"] = column(e, [](const EnergyReport& x) { return x.K_cal; });
  energy["Ecal"] = column(e, [](const EnergyReport& x) { return x.E_cal; });
  energy["taylor_margin"] = column(e, [](const EnergyReport& x) { return x.taylor_margin; });

  py::dict out;
  out["steps"] = r.steps.size() - 1;
  out["t"] = r.final.t();
  out["e0_drift"] = r.e0_drift;
  out["volume_drift"] = r.volume_drift;
  out["T_obs"] = r.theorem.T_obs;
  out["reached_horizon"] = r.theorem.reached_horizon;
  out["sign_violated"] = r.theorem.sign_violated;
  out["energy"] = energy;
  out["energy_csv"] = energy_csv(r);
  out["plasma_csv"] = plasma_dump_csv(r.final);
  out["suite_json"] = r.suite.empty() ? std::string("[]") : suite_json(r.suite);
  return out;
}

std::string verify(const std::optional<std::vector<std::string>>& checks, std::uint64_t seed) {
  SuiteConfig sc;
  if (checks) {
    sc.all_checks = false;
    sc.checks = *checks;
  }
  sc.seed = seed;
  py::gil_scoped_release release;
  return suite_json(run_suite(sc));
}

std::string refine(const std::string& config_json, int levels) {
  const ScenarioConfig c = config_from_json(config_json);
  py::gil_scoped_release release;
  return suite_json(refine_study(c, levels));
}

}  // namespace

PYBIND11_MODULE(_mhd2d, m) {
  m.doc() = "Plasma-vacuum free-interface MHD simulator and verification harness";

  // Module attribute keeps the type alive.
  static PyObject* error_type = py::exception<Error>(m, "Error", PyExc_RuntimeError).ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object ex = py::handle(error_type)(e.what());
      ex.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type, ex.ptr());
    }
  });

  m.def("normalize_config", [](const std::string& text, const std::string& format) {
    return config_to_json(parse(text, format));
  }, py::arg("text"), py::arg("format") = "json", "Validate a config and return it as JSON with every field set.");
  m.def("run", &run, py::arg("config_json"), "Run a scenario; returns a summary dict.");
  m.def("verify", &verify, py::arg("checks") = py::none(), py::arg("seed") = 0, "Run the residual suite; returns JSON.");
  m.def("refine", &refine, py::arg("config_json"), py::arg("levels") = 3, "Time-step refinement study; returns JSON.");
  m.def("check_names", &check_names);
}
