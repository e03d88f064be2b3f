// mhd2d: run scenarios, the residual suite and refinement studies.
//
//   mhd2d run --config path [overrides]
//   mhd2d verify --suite path [--check name ...] [--json out]
//   mhd2d refine --config path --levels n
//
// Exit status: 0 success, 2 constraint failure (or failed checks), 3 elliptic
// failure, 4 configuration error.

#include "mhd2d/errors.hpp"
#include "mhd2d/runner.hpp"
#include "mhd2d/verifier.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

using namespace mhd2d;

namespace {

constexpr int exit_constraint = 2;
constexpr int exit_elliptic = 3;
constexpr int exit_config = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::elliptic_failure: return exit_elliptic;
    case ErrorKind::configuration_error:
    case ErrorKind::shape_error: return exit_config;
    default: return exit_constraint;
  }
}

struct Overrides {
  std::optional<std::string> scenario, out, vacuum_mode;
  std::optional<double> dt, t_end, mu, circulation, amplitude;
  std::optional<int> plasma_radial, plasma_angular, vacuum_radial, mode, energy_every;
  std::optional<std::uint64_t> seed;
  bool checks = false;
  bool quiet = false;

  void add_to(CLI::App* app) {
    app->add_option("--scenario", scenario, "Scenario name");
    app->add_option("--dt", dt, "Time step");
    app->add_option("--t-end", t_end, "Final time");
    app->add_option("--mu", mu, "Magnetic coupling mu");
    app->add_option("--circulation", circulation, "Vacuum field circulation");
    app->add_option("--amplitude", amplitude, "Interface perturbation amplitude");
    app->add_option("--mode", mode, "Interface perturbation mode");
    app->add_option("--plasma-radial", plasma_radial, "Plasma radial nodes");
    app->add_option("--plasma-angular", plasma_angular, "Angular nodes");
    app->add_option("--vacuum-radial", vacuum_radial, "Vacuum radial nodes");
    app->add_option("--vacuum-mode", vacuum_mode, "constrained or evolved");
    app->add_option("--energy-every", energy_every, "Energy report interval in steps");
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--out", out, "Output directory");
    app->add_flag("--checks", checks, "Run the residual suite after the simulation");
    app->add_flag("-q,--quiet", quiet, "Only print the summary");
  }

  void apply(ScenarioConfig& c) const {
    if (scenario) c.scenario = scenario_from_string(*scenario);
    if (dt) c.dt = *dt;
    if (t_end) c.t_end = *t_end;
    if (mu) c.mu = *mu;
    if (circulation) c.circulation = *circulation;
    if (amplitude) c.amplitude = *amplitude;
    if (mode) c.mode = *mode;
    if (plasma_radial) c.plasma_radial = *plasma_radial;
    if (plasma_angular) c.plasma_angular = *plasma_angular;
    if (vacuum_radial) c.vacuum_radial = *vacuum_radial;
    if (vacuum_mode) {
      if (*vacuum_mode == "constrained") c.vacuum_mode = VacuumMode::constrained;
      else if (*vacuum_mode == "evolved") c.vacuum_mode = VacuumMode::evolved;
      else throw Error(ErrorKind::configuration_error, "vacuum mode must be constrained or evolved");
    }
    if (energy_every) c.energy_every = *energy_every;
    if (seed) c.seed = *seed;
    if (out) c.output_dir = *out;
    if (checks) c.run_checks = true;
    c.validate();
  }
};

int run(const std::string& path, const Overrides& o) {
  ScenarioConfig c = load_config(path);
  o.apply(c);
  const auto observer = [&](const StepRecord& r) {
    if (o.quiet || !r.energy) return;
    std::printf("step %6d  t %.6f  E0 %.12e  margin %+.4e  constraints %.2e\n", r.step, r.t, r.energy->E[0],
                r.energy->taylor_margin, r.constraints.max());
  };
  const RunResult res = run_simulation(c, observer);
  std::printf("scenario %s: %zu steps to t = %g\n", to_string(c.scenario).c_str(), res.steps.size() - 1,
              res.final.t());
  std::printf("E0 relative drift %.3e, volume drift %.3e\n", res.e0_drift, res.volume_drift);
  if (res.theorem.sign_violated)
    std::printf("Taylor sign violated: energy window not defined\n");
  else
    std::printf("T_obs %g (energy bound held to the horizon: %s)\n", res.theorem.T_obs,
                res.theorem.reached_horizon ? "yes" : "no");
  if (!c.output_dir.empty()) std::printf("artifacts written to %s\n", c.output_dir.c_str());
  if (!res.suite.empty()) {
    std::cout << suite_table(res.suite);
    if (!suite_passed(res.suite)) return exit_constraint;
  }
  return 0;
}

int verify(const std::string& path, const std::vector<std::string>& checks, const std::optional<std::uint64_t>& seed,
           const std::string& json_out) {
  SuiteConfig sc = path.empty() ? SuiteConfig{} : load_suite_config(path);
  if (!checks.empty()) {
    sc.all_checks = false;
    sc.checks = checks;
  }
  if (seed) sc.seed = *seed;
  const auto reports = run_suite(sc);
  std::cout << suite_table(reports);
  if (!json_out.empty()) {
    std::ofstream f(json_out);
    if (!f) throw Error(ErrorKind::configuration_error, "cannot write " + json_out);
    f << suite_json(reports) << "\n";
  }
  return suite_passed(reports) ? 0 : exit_constraint;
}

int refine(const std::string& path, int levels, const Overrides& o) {
  ScenarioConfig c = load_config(path);
  o.apply(c);
  const auto reports = refine_study(c, levels);
  std::cout << suite_table(reports);
  return suite_passed(reports) ? 0 : exit_constraint;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plasma-vacuum free-interface MHD simulator and verification harness"};
  app.require_subcommand(1);

  std::string config_path, suite_path, json_out;
  std::vector<std::string> checks;
  std::optional<std::uint64_t> verify_seed;
  int levels = 3;
  Overrides run_over, refine_over;

  CLI::App* run_cmd = app.add_subcommand("run", "Run a scenario");
  run_cmd->add_option("--config", config_path, "TOML or JSON scenario config")->required();
  run_over.add_to(run_cmd);

  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the residual suite");
  verify_cmd->add_option("--suite", suite_path, "JSON suite config (all checks when absent)");
  verify_cmd->add_option("--check", checks, "Run only the named checks");
  verify_cmd->add_option("--seed", verify_seed, "Random seed");
  verify_cmd->add_option("--json", json_out, "Write the reports as JSON");
  verify_cmd->add_flag_callback("--list", [] {
    for (const auto& n : check_names()) std::cout << n << "\n";
    std::exit(0);
  }, "List the check names");

  CLI::App* refine_cmd = app.add_subcommand("refine", "Time-step refinement study");
  refine_cmd->add_option("--config", config_path, "TOML or JSON scenario config")->required();
  refine_cmd->add_option("--levels", levels, "Number of levels (dt, dt/2, ...)")->check(CLI::Range(2, 8));
  refine_over.add_to(refine_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    if (*run_cmd) return run(config_path, run_over);
    if (*verify_cmd) return verify(suite_path, checks, verify_seed, json_out);
    if (*refine_cmd) return refine(config_path, levels, refine_over);
  } catch (const Error& e) {
    std::cerr << "mhd2d: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "mhd2d: " << e.what() << "\n";
    return exit_constraint;
  }
  return 0;
}
