#pragma once

// Scenario construction, the coupled plasma-vacuum time loop, refinement
// studies and all file output.

#include "mhd2d/energy.hpp"
#include "mhd2d/plasma.hpp"
#include "mhd2d/vacuum.hpp"
#include "mhd2d/verifier.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mhd2d {

enum class Scenario { static_zpinch, vacuum_azimuthal, rotating_flow, perturbed_interface, vacuum_only };
enum class VacuumMode {
  constrained,  // harmonic field re-solved on a chart slaved to Gamma, flux conserved
  evolved,      // Faraday law integrated along the virtual-particle map
};

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

struct ScenarioConfig {
  Scenario scenario = Scenario::perturbed_interface;
  int plasma_radial = 32;
  int plasma_angular = 64;
  int vacuum_radial = 24;  // the vacuum shares the plasma angular nodes
  double dt = 1e-3;
  double t_end = 0.01;
  double mu = 1.0;
  std::optional<double> circulation;  // scenario default when absent
  double omega = 0.5;                 // rotating-flow angular velocity
  double amplitude = 1e-3;
  int mode = 2;
  double wall_radius = 2.0;
  VacuumMode vacuum_mode = VacuumMode::constrained;
  bool divergence_cleaning = true;
  double constraint_limit = 1e-6;  // a step whose constraint residuals exceed this fails
  EnergyOptions energy;
  int energy_every = 1;            // energy report every n steps (and at the last step)
  bool run_checks = false;         // run the residual suite with the simulation
  std::vector<std::string> checks; // suite selection; all checks when empty
  std::string output_dir;          // no files written when empty
  std::uint64_t seed = 0;

  /// Scenario default circulation: 2 pi for the vacuum-field scenarios, pi
  /// for the perturbed interface, 0 otherwise.
  double circulation_or_default() const;
  /// Throws configuration_error on a violated invariant.
  void validate() const;
};

/// Parse a configuration; the format follows the extension (.toml or .json).
ScenarioConfig load_config(const std::string& path);
ScenarioConfig config_from_json(const std::string& text);
ScenarioConfig config_from_toml(const std::string& text);
std::string config_to_json(const ScenarioConfig& config);

struct SystemState {
  PlasmaState plasma;
  ChartPtr vacuum_chart;     // current vacuum chart (row 0 = Gamma)
  Vec2Field H_vacuum;        // Eulerian vacuum field on vacuum_chart
  Field Xi;                  // electric potential on vacuum_chart
  double oblique_l2 = 0.0;   // oblique-datum residual of the Xi solve
  double flux = 0.0;         // psi_Gamma - psi_W, conserved
  std::optional<VacuumState> evolved;  // virtual-particle vacuum state (evolved mode)
  int step = 0;
  double t() const { return plasma.map.time(); }
};

/// Initial state of the configured scenario: constraints checked, pressure fresh.
/// Throws scenario_error when a constraint fails at build.
SystemState build_scenario(const ScenarioConfig& config);

/// The Gamma-slaved vacuum chart: Gamma from row 0 of the plasma chart, the
/// wall circle sampled at the polar angles of the Gamma nodes.
Chart slaved_vacuum_chart(const Chart& plasma, double wall_radius, int n_radial);

struct ConstraintResiduals {
  double div_v = 0.0;        // max |div v| / |grad v|
  double div_H = 0.0;        // max |div H| / |grad H|
  double H_normal = 0.0;     // max |H . N| / max |H| on Gamma
  double vacuum = 0.0;       // vacuum div, curl and normal traces
  double det_drift = 0.0;    // max |det dx/dy - 1|
  double max() const;
};
ConstraintResiduals constraint_residuals(const SystemState& state);

struct StepRecord {
  int step = 0;
  double t = 0.0;
  ConstraintResiduals constraints;
  PlasmaStepReport plasma;
  double oblique_l2 = 0.0;
  double circulation = 0.0;
  double volume = 0.0;
  double mode_difference = 0.0;  // evolved mode: |H_evolved - H_harmonic| / |H| on Gamma
  std::optional<EnergyReport> energy;
};

/// One coupled RK4 step. Within every stage: Gamma-slaved vacuum chart, its
/// harmonic field at the conserved flux, q- trace, pressure solve, plasma
/// rates. After the update: divergence cleaning, the Xi solve with the
/// extended velocity and the fresh pressure. Errors carry the step index.
SystemState step_system(const SystemState& state, const ScenarioConfig& config, StepRecord* record = nullptr);

struct RunResult {
  SystemState initial, final;
  std::vector<StepRecord> steps;  // step 0 is the initial state
  std::vector<EnergyReport> energies;
  TheoremMonitor theorem;
  std::vector<ResidualReport> suite;
  double e0_drift = 0.0;      // max relative |E0(t) - E0(0)|
  double volume_drift = 0.0;  // max |Vol(t) - Vol(0)|
};

using StepObserver = std::function<void(const StepRecord&)>;

/// Build, integrate to t_end and monitor. Files are written when
/// output_dir is set.
RunResult run_simulation(const ScenarioConfig& config, const StepObserver& observer = {});

/// Files: energy.csv, steps.jsonl, plasma_final.csv, vacuum_final.csv,
/// suite.json (when checks ran), config.json.
void write_artifacts(const RunResult& result, const ScenarioConfig& config, const std::string& dir);

std::string step_record_json(const StepRecord& r);
std::string energy_csv(const RunResult& result);
/// Node table: i,j,y1,y2,x1,x2,v1,v2,H1,H2,q.
std::string plasma_dump_csv(const SystemState& state);
/// Node table: i,j,x1,x2,H1,H2,Xi,q.
std::string vacuum_dump_csv(const SystemState& state, double mu);

/// Orders under time-step halving (levels runs with dt, dt/2, ...):
/// energy_drift (relative E0 drift at t_end), interface_difference
/// (Richardson differences of the final interface), plus the suite's Gauss
/// and pressure checks. Levels run concurrently. Throws configuration_error
/// for fewer than two levels.
std::vector<ResidualReport> refine_study(const ScenarioConfig& config, int levels);

}  // namespace mhd2d
