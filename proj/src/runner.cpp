#include "mhd2d/runner.hpp"

#include "mhd2d/errors.hpp"

#include <algorithm>
#include <json.hpp>
#include <toml.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>

namespace mhd2d {

namespace {

using Array = Eigen::ArrayXd;
using json = nlohmann::json;
using std::numbers::pi;

Array row0(const Field& f) { return f.row(0).transpose(); }

// Largest pointwise Frobenius norm of the Cartesian gradient of w.
double grad_max(const Chart& chart, const Vec2Field& w) {
  Field s = chart.grid().zeros();
  for (const auto& c : w)
    for (const auto& d : chart.grad(c)) s += d.square();
  return std::sqrt(s.maxCoeff());
}

double field_max(const Vec2Field& w) { return (w[0].square() + w[1].square()).sqrt().maxCoeff(); }

// Divide by a scale unless it vanishes (then the absolute value is kept).
double relative(double value, double scale) { return scale > 0.0 ? value / scale : value; }

std::string strip_kind(const Error& e) {
  const std::string w = e.what();
  const auto p = w.find(": ");
  return p == std::string::npos ? w : w.substr(p + 2);
}

}  // namespace

// ---- configuration ---------------------------------------------------------------

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::static_zpinch: return "static-zpinch";
    case Scenario::vacuum_azimuthal: return "vacuum-azimuthal";
    case Scenario::rotating_flow: return "rotating-flow";
    case Scenario::perturbed_interface: return "perturbed-interface";
    case Scenario::vacuum_only: return "vacuum-only";
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& text) {
  std::string name = text;
  std::replace(name.begin(), name.end(), '_', '-');
  for (Scenario s : {Scenario::static_zpinch, Scenario::vacuum_azimuthal, Scenario::rotating_flow,
                     Scenario::perturbed_interface, Scenario::vacuum_only})
    if (to_string(s) == name) return s;
  throw Error(ErrorKind::configuration_error, "unknown scenario '" + text + "'");
}

double ScenarioConfig::circulation_or_default() const {
  if (circulation) return *circulation;
  switch (scenario) {
    case Scenario::vacuum_azimuthal:
    case Scenario::vacuum_only: return 2.0 * pi;
    case Scenario::perturbed_interface: return pi;
    default: return 0.0;
  }
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::configuration_error, m); };
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
  if (!(t_end >= dt)) fail("t_end must be at least dt");
  if (plasma_radial < 16 || plasma_angular < 16 || vacuum_radial < 16) fail("resolutions must be at least 16");
  if (plasma_angular % 2) fail("the angular resolution must be even");
  if (!(mu > 0.0)) fail("mu must be positive");
  if (!(wall_radius > 1.0)) fail("the wall radius must exceed the unit interface radius");
  if (mode < 1) fail("perturbation mode must be at least 1");
  if (std::abs(amplitude) * (mode - 1) >= 1.0 || std::abs(amplitude) >= 0.5)
    fail("perturbation amplitude too large: the interface would self-intersect");
  if (energy_every < 1) fail("energy_every must be at least 1");
  if (!(constraint_limit > 0.0)) fail("constraint_limit must be positive");
}

namespace {

template <typename T>
void take(const json& section, const char* key, T& out) {
  if (section.contains(key)) out = section.at(key).get<T>();
}

void reject_unknown(const json& section, const std::string& where, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : section.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw Error(ErrorKind::configuration_error, "unknown key '" + k + "' in " + where);
  }
}

}  // namespace

ScenarioConfig config_from_json(const std::string& text) {
  ScenarioConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw Error(ErrorKind::configuration_error, "config must be an object");
    reject_unknown(j, "config", {"scenario", "seed", "grid", "time", "physics", "solver", "monitor", "checks", "output"});
    if (j.contains("scenario")) c.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    take(j, "seed", c.seed);
    const json empty = json::object();
    auto section = [&](const char* name, std::initializer_list<const char*> keys) -> const json& {
      if (!j.contains(name)) return empty;
      const json& s = j.at(name);
      if (!s.is_object()) throw Error(ErrorKind::configuration_error, std::string("section ") + name + " must be a table");
      reject_unknown(s, name, keys);
      return s;
    };
    const json& grid = section("grid", {"plasma_radial", "plasma_angular", "vacuum_radial"});
    take(grid, "plasma_radial", c.plasma_radial);
    take(grid, "plasma_angular", c.plasma_angular);
    take(grid, "vacuum_radial", c.vacuum_radial);
    const json& time = section("time", {"dt", "t_end"});
    take(time, "dt", c.dt);
    take(time, "t_end", c.t_end);
    const json& phys = section("physics", {"mu", "circulation", "omega", "amplitude", "mode", "wall_radius"});
    take(phys, "mu", c.mu);
    if (phys.contains("circulation")) c.circulation = phys.at("circulation").get<double>();
    take(phys, "omega", c.omega);
    take(phys, "amplitude", c.amplitude);
    take(phys, "mode", c.mode);
    take(phys, "wall_radius", c.wall_radius);
    const json& solver = section("solver", {"vacuum_mode", "divergence_cleaning", "constraint_limit"});
    if (solver.contains("vacuum_mode")) {
      const auto m = solver.at("vacuum_mode").get<std::string>();
      if (m == "constrained") c.vacuum_mode = VacuumMode::constrained;
      else if (m == "evolved") c.vacuum_mode = VacuumMode::evolved;
      else throw Error(ErrorKind::configuration_error, "vacuum_mode must be constrained or evolved");
    }
    take(solver, "divergence_cleaning", c.divergence_cleaning);
    take(solver, "constraint_limit", c.constraint_limit);
    const json& mon = section("monitor", {"d0_ratio", "epsilon1", "energy_every"});
    take(mon, "d0_ratio", c.energy.d0_ratio);
    take(mon, "epsilon1", c.energy.epsilon1);
    take(mon, "energy_every", c.energy_every);
    const json& checks = section("checks", {"run", "names"});
    take(checks, "run", c.run_checks);
    take(checks, "names", c.checks);
    const json& out = section("output", {"dir"});
    take(out, "dir", c.output_dir);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::configuration_error, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ScenarioConfig config_from_toml(const std::string& text) {
  try {
    const toml::table tbl = toml::parse(text);
    std::ostringstream os;
    os << toml::json_formatter{tbl};
    return config_from_json(os.str());
  } catch (const toml::parse_error& e) {
    throw Error(ErrorKind::configuration_error, std::string("config: ") + std::string(e.description()));
  }
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::configuration_error, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string ext = std::filesystem::path(path).extension().string();
  if (ext == ".toml") return config_from_toml(ss.str());
  if (ext == ".json") return config_from_json(ss.str());
  throw Error(ErrorKind::configuration_error, "config extension must be .toml or .json: " + path);
}

std::string config_to_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = to_string(c.scenario);
  j["seed"] = c.seed;
  j["grid"] = {{"plasma_radial", c.plasma_radial}, {"plasma_angular", c.plasma_angular}, {"vacuum_radial", c.vacuum_radial}};
  j["time"] = {{"dt", c.dt}, {"t_end", c.t_end}};
  j["physics"] = {{"mu", c.mu},         {"omega", c.omega},         {"amplitude", c.amplitude},
                  {"mode", c.mode},     {"wall_radius", c.wall_radius}};
  // Absent circulation keeps the scenario default, so scenario overrides still apply.
  if (c.circulation) j["physics"]["circulation"] = *c.circulation;
  j["solver"] = {{"vacuum_mode", c.vacuum_mode == VacuumMode::constrained ? "constrained" : "evolved"},
                 {"divergence_cleaning", c.divergence_cleaning},
                 {"constraint_limit", c.constraint_limit}};
  j["monitor"] = {{"d0_ratio", c.energy.d0_ratio}, {"epsilon1", c.energy.epsilon1}, {"energy_every", c.energy_every}};
  j["checks"] = {{"run", c.run_checks}, {"names", c.checks}};
  j["output"] = {{"dir", c.output_dir}};
  return j.dump(2);
}

// ---- state -------------------------------------------------------------------------

Chart slaved_vacuum_chart(const Chart& plasma, double wall_radius, int n_radial) {
  const Array g1 = row0(plasma.x1()), g2 = row0(plasma.x2());
  const Array r = (g1.square() + g2.square()).sqrt();
  return annulus_chart(n_radial, g1, g2, wall_radius * g1 / r, wall_radius * g2 / r);
}

double ConstraintResiduals::max() const { return std::max({div_v, div_H, H_normal, vacuum, det_drift}); }

ConstraintResiduals constraint_residuals(const SystemState& s) {
  const EulerianPlasma e = eulerian(s.plasma);
  ConstraintResiduals r;
  // v and sqrt(mu) H share a scale; sqrt|q+| sets it when both vanish.
  const double sqrt_mu = std::sqrt(s.plasma.mu);
  const double scale = std::max(std::hypot(grad_max(e.chart, e.v), sqrt_mu * grad_max(e.chart, e.H)),
                                std::sqrt(s.plasma.q_plus.abs().maxCoeff()));
  r.div_v = relative(e.chart.div(e.v).abs().maxCoeff(), scale);
  r.div_H = relative(sqrt_mu * e.chart.div(e.H).abs().maxCoeff(), scale);
  const BoundaryRow b = e.chart.boundary_row(0);
  r.H_normal = relative((b.n1 * row0(e.H[0]) + b.n2 * row0(e.H[1])).abs().maxCoeff(), field_max(e.H));
  r.vacuum = vacuum_residuals(*s.vacuum_chart, s.H_vacuum).max();
  r.det_drift = s.plasma.map.det_drift();
  return r;
}

namespace {

struct VacuumSolve {
  ChartPtr chart;
  Vec2Field H;
};

VacuumSolve harmonic_on(const Chart& plasma, const ScenarioConfig& cfg, double flux, const PoissonSolver& solver,
                        const ModalPreconditioner* pre) {
  auto chart = std::make_shared<const Chart>(slaved_vacuum_chart(plasma, cfg.wall_radius, cfg.vacuum_radial));
  if (flux == 0.0) return {chart, {chart->grid().zeros(), chart->grid().zeros()}};
  return {chart, solve_harmonic_flux(*chart, flux, solver, pre).H};
}

Vec2Field extended_velocity(const Chart& vacuum, const Vec2Field& v_plasma) {
  return extend_velocity_to_vacuum(row0(v_plasma[0]), row0(v_plasma[1]), vacuum).v;
}

void solve_xi(SystemState& s, const PoissonSolver& solver) {
  const Vec2Field v = eulerian(s.plasma).v;
  const Vec2Field vext = extended_velocity(*s.vacuum_chart, v);
  const bool guess = s.Xi.rows() == s.vacuum_chart->grid().n_radial() &&
                     s.Xi.cols() == s.vacuum_chart->grid().n_angular();
  const ElectricField ef = solve_electric_field(*s.vacuum_chart, vext, s.H_vacuum, solver, nullptr, guess ? &s.Xi : nullptr);
  s.Xi = ef.Xi;
  s.oblique_l2 = ef.oblique_l2;
}

Array frozen_trace(const SystemState& s) { return q_minus_trace(s.H_vacuum, s.plasma.mu); }

}  // namespace

SystemState build_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const GridPtr grid = SpectralGrid::disk(cfg.plasma_radial, cfg.plasma_angular);
  const bool perturbed = cfg.scenario == Scenario::perturbed_interface;
  const ChartPtr labels = std::make_shared<const Chart>(
      perturbed ? perturbed_disk_chart(grid, cfg.amplitude, cfg.mode) : disk_chart(grid));
  const Field& x1 = labels->x1();
  const Field& x2 = labels->x2();
  const Field zero = grid->zeros();
  const PoissonSolver solver;

  Vec2Field v{zero, zero}, H{zero, zero};
  switch (cfg.scenario) {
    case Scenario::static_zpinch: H = {-x2, x1}; break;
    case Scenario::rotating_flow:
      v = {-cfg.omega * x2, cfg.omega * x1};
      H = {-x2, x1};
      break;
    case Scenario::perturbed_interface: {
      // H = perp grad psi with Delta psi = -2, psi = 0 on Gamma: divergence
      // free, tangent to Gamma, and the Z-pinch field on the unit disk.
      const Field psi = solver.solve(*labels, grid->constant(-2.0), zero);
      H = labels->perp_grad(psi);
      break;
    }
    case Scenario::vacuum_azimuthal:
    case Scenario::vacuum_only: break;
  }

  SystemState s{{FlowMap(labels, Domain::plasma), {}, {}, {}, cfg.mu, false}, nullptr, {}, {}, 0.0, 0.0, std::nullopt, 0};
  const auto F = s.plasma.map.jacobian();
  s.plasma.u = to_labels(v, F);
  s.plasma.beta = to_labels(H, F);

  const double circ = cfg.circulation_or_default();
  s.vacuum_chart = std::make_shared<const Chart>(slaved_vacuum_chart(*labels, cfg.wall_radius, cfg.vacuum_radial));
  if (circ != 0.0) {
    const HarmonicField hf = solve_harmonic_field(*s.vacuum_chart, circ, solver);
    s.H_vacuum = hf.H;
    s.flux = hf.flux;
  } else {
    s.H_vacuum = {s.vacuum_chart->grid().zeros(), s.vacuum_chart->grid().zeros()};
  }
  const PressureProblem p = pressure_problem(*labels, v, H, cfg.mu, frozen_trace(s));
  s.plasma.q_plus = pressure_solve(p, *labels, solver);
  s.plasma.pressure_fresh = true;
  solve_xi(s, solver);
  if (cfg.vacuum_mode == VacuumMode::evolved) s.evolved = make_vacuum_state(s.vacuum_chart, s.H_vacuum, cfg.mu);

  const ConstraintResiduals r = constraint_residuals(s);
  if (r.max() > cfg.constraint_limit) {
    std::ostringstream m;
    m << "initial state violates its constraints: div v " << r.div_v << ", div H " << r.div_H << ", H.N "
      << r.H_normal << ", vacuum " << r.vacuum;
    throw Error(ErrorKind::scenario_error, m.str());
  }
  return s;
}

// ---- time stepping ------------------------------------------------------------------

SystemState step_system(const SystemState& state, const ScenarioConfig& cfg, StepRecord* record) {
  const int index = state.step + 1;
  try {
    const PoissonSolver solver;
    const auto radii = reference_radii(*state.vacuum_chart);
    const ModalPreconditioner vacuum_pre(state.vacuum_chart->grid_ptr(), radii.first, radii.second);
    const double dt = std::min(cfg.dt, cfg.t_end - state.t());

    SystemState next = state;
    next.step = index;
    PlasmaStepOptions opts;
    opts.divergence_cleaning = cfg.divergence_cleaning;
    PlasmaStepReport prep;
    double mode_difference = 0.0;

    if (cfg.scenario == Scenario::vacuum_only) {
      // The plasma is held at rest; only the vacuum solves advance.
      const FlowMap& m = state.plasma.map;
      next.plasma.map = FlowMap(m.labels(), m.domain(), m.x1(), m.x2(), m.time() + dt);
      const VacuumSolve vs = harmonic_on(next.plasma.map.current(), cfg, state.flux, solver, &vacuum_pre);
      next.vacuum_chart = vs.chart;
      next.H_vacuum = vs.H;
    } else if (cfg.vacuum_mode == VacuumMode::constrained) {
      const QMinusProvider q_minus = [&](const Chart& plasma) {
        return q_minus_trace(harmonic_on(plasma, cfg, state.flux, solver, &vacuum_pre).H, cfg.mu);
      };
      next.plasma = step_plasma(state.plasma, dt, q_minus, opts, &prep);
      const VacuumSolve vs = harmonic_on(next.plasma.map.current(), cfg, state.flux, solver, &vacuum_pre);
      next.vacuum_chart = vs.chart;
      next.H_vacuum = vs.H;
    } else {
      // The plasma stages see the vacuum pressure of the step start; the
      // vacuum follows with the interface velocity interpolated in time.
      const Array trace = frozen_trace(state);
      next.plasma = step_plasma(state.plasma, dt, [&](const Chart&) { return trace; }, opts, &prep);
      const Vec2Field v0 = eulerian(state.plasma).v, v1 = eulerian(next.plasma).v;
      const double t0 = state.t();
      const VacuumVelocity velocity = [&](const Chart& vacuum, double t) {
        const double w = (t - t0) / dt;
        const Array u1 = (1.0 - w) * row0(v0[0]) + w * row0(v1[0]);
        const Array u2 = (1.0 - w) * row0(v0[1]) + w * row0(v1[1]);
        return extend_velocity_to_vacuum(u1, u2, vacuum).v;
      };
      next.evolved = evolve_vacuum(*state.evolved, velocity, dt);
      next.vacuum_chart = std::make_shared<const Chart>(next.evolved->map.current());
      next.H_vacuum = vacuum_field(*next.evolved);
      const VacuumSolve ref = harmonic_on(next.plasma.map.current(), cfg, state.flux, solver, &vacuum_pre);
      const Array d = ((row0(next.H_vacuum[0]) - row0(ref.H[0])).square() +
                       (row0(next.H_vacuum[1]) - row0(ref.H[1])).square()).sqrt();
      mode_difference = relative(d.maxCoeff(), field_max(ref.H));
    }
    solve_xi(next, solver);

    const ConstraintResiduals r = constraint_residuals(next);
    if (record) {
      record->step = index;
      record->t = next.t();
      record->constraints = r;
      record->plasma = prep;
      record->oblique_l2 = next.oblique_l2;
      record->circulation = circulation(*next.vacuum_chart, next.H_vacuum, next.vacuum_chart->grid().n_radial() - 1);
      record->volume = next.plasma.map.current().area();
      record->mode_difference = mode_difference;
      record->energy.reset();
    }
    if (!std::isfinite(r.max()) || r.max() > cfg.constraint_limit) {
      std::ostringstream m;
      m << "constraint residual " << r.max() << " above " << cfg.constraint_limit << " (div v " << r.div_v
        << ", div H " << r.div_H << ", H.N " << r.H_normal << ", vacuum " << r.vacuum << ", det " << r.det_drift
        << ")";
      throw Error(ErrorKind::constraint_failure, m.str());
    }
    return next;
  } catch (const EllipticError& e) {
    throw EllipticError("step " + std::to_string(index) + ": " + strip_kind(e), e.residual());
  } catch (const Error& e) {
    throw Error(e.kind(), "step " + std::to_string(index) + ": " + strip_kind(e));
  }
}

// ---- runs ------------------------------------------------------------------------------

namespace {

EnergyReport report_of(const SystemState& s, const ScenarioConfig& cfg, const PressureHistory* previous) {
  const EnergyFields f = energy_fields(s.plasma, s.vacuum_chart.get(), &s.H_vacuum);
  return energy_report(f, s.t(), cfg.energy, previous);
}

StepRecord initial_record(const SystemState& s) {
  StepRecord r;
  r.t = s.t();
  r.constraints = constraint_residuals(s);
  r.oblique_l2 = s.oblique_l2;
  r.circulation = circulation(*s.vacuum_chart, s.H_vacuum, s.vacuum_chart->grid().n_radial() - 1);
  r.volume = s.plasma.map.current().area();
  return r;
}

}  // namespace

RunResult run_simulation(const ScenarioConfig& cfg, const StepObserver& observer) {
  SystemState s = build_scenario(cfg);
  RunResult out{s, s, {}, {}, {}, {}, 0.0, 0.0};
  const long n_steps = static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-9));

  StepRecord first = initial_record(s);
  first.energy = report_of(s, cfg, nullptr);
  out.energies.push_back(*first.energy);
  out.steps.push_back(first);
  if (observer) observer(first);
  const double e0 = first.energy->E[0], vol0 = first.volume;

  PressureHistory previous{s.plasma.q_plus, s.t()};
  for (long k = 1; k <= n_steps; ++k) {
    StepRecord rec;
    SystemState next = step_system(s, cfg, &rec);
    if (k % cfg.energy_every == 0 || k == n_steps) {
      // D_t P from the previous step at fixed label.
      rec.energy = report_of(next, cfg, &previous);
      out.energies.push_back(*rec.energy);
      out.e0_drift = std::max(out.e0_drift, relative(std::abs(rec.energy->E[0] - e0), std::abs(e0)));
    }
    out.volume_drift = std::max(out.volume_drift, std::abs(rec.volume - vol0));
    previous = {next.plasma.q_plus, next.t()};
    s = std::move(next);
    out.steps.push_back(rec);
    if (observer) observer(rec);
  }
  out.final = s;
  out.theorem = theorem1_monitor(out.energies, cfg.t_end);
  if (cfg.run_checks) {
    SuiteConfig sc;
    sc.all_checks = cfg.checks.empty();
    sc.checks = cfg.checks;
    sc.seed = cfg.seed;
    out.suite = run_suite(sc);
  }
  if (!cfg.output_dir.empty()) write_artifacts(out, cfg, cfg.output_dir);
  return out;
}

// ---- output --------------------------------------------------------------------------------

std::string step_record_json(const StepRecord& r) {
  auto num = [](double x) -> json { return std::isfinite(x) ? json(x) : json(nullptr); };
  json j;
  j["step"] = r.step;
  j["t"] = r.t;
  j["constraints"] = {{"div_v", num(r.constraints.div_v)},       {"div_H", num(r.constraints.div_H)},
                      {"H_normal", num(r.constraints.H_normal)}, {"vacuum", num(r.constraints.vacuum)},
                      {"det_drift", num(r.constraints.det_drift)}};
  j["plasma"] = {{"cfl", num(r.plasma.cfl)},
                 {"stability_warning", r.plasma.stability_warning},
                 {"cleaning_u", num(r.plasma.cleaning_u)},
                 {"cleaning_beta", num(r.plasma.cleaning_beta)},
                 {"pressure_iterations", r.plasma.pressure_iterations}};
  j["oblique_l2"] = num(r.oblique_l2);
  j["circulation"] = num(r.circulation);
  j["volume"] = num(r.volume);
  j["mode_difference"] = num(r.mode_difference);
  j["energy"] = r.energy ? json::parse(energy_report_json(*r.energy)) : json(nullptr);
  return j.dump();
}

std::string energy_csv(const RunResult& result) {
  std::string s = energy_csv_header() + "\n";
  for (const auto& e : result.energies) s += energy_csv_row(e) + "\n";
  return s;
}

namespace {

void append_row(std::string& out, std::initializer_list<double> values, int i, int j) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%d,%d", i, j);
  out += buf;
  for (double v : values) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out += buf;
  }
  out += "\n";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::configuration_error, "cannot write " + path.string());
  f << text;
}

}  // namespace

std::string plasma_dump_csv(const SystemState& s) {
  const EulerianPlasma e = eulerian(s.plasma);
  const Chart& y = *s.plasma.map.labels();
  std::string out = "i,j,y1,y2,x1,x2,v1,v2,H1,H2,q\n";
  for (Eigen::Index i = 0; i < y.x1().rows(); ++i)
    for (Eigen::Index j = 0; j < y.x1().cols(); ++j)
      append_row(out, {y.x1()(i, j), y.x2()(i, j), e.chart.x1()(i, j), e.chart.x2()(i, j), e.v[0](i, j), e.v[1](i, j),
                       e.H[0](i, j), e.H[1](i, j), s.plasma.q_plus(i, j)},
                 static_cast<int>(i), static_cast<int>(j));
  return out;
}

std::string vacuum_dump_csv(const SystemState& s, double mu) {
  const Chart& c = *s.vacuum_chart;
  const Field q = magnetic_pressure(s.H_vacuum, mu);
  std::string out = "i,j,x1,x2,H1,H2,Xi,q\n";
  for (Eigen::Index i = 0; i < c.x1().rows(); ++i)
    for (Eigen::Index j = 0; j < c.x1().cols(); ++j)
      append_row(out, {c.x1()(i, j), c.x2()(i, j), s.H_vacuum[0](i, j), s.H_vacuum[1](i, j), s.Xi(i, j), q(i, j)},
                 static_cast<int>(i), static_cast<int>(j));
  return out;
}

void write_artifacts(const RunResult& result, const ScenarioConfig& cfg, const std::string& dir) {
  const std::filesystem::path d(dir);
  std::error_code ec;
  std::filesystem::create_directories(d, ec);
  if (ec) throw Error(ErrorKind::configuration_error, "cannot create output directory " + dir);
  write_file(d / "config.json", config_to_json(cfg) + "\n");
  write_file(d / "energy.csv", energy_csv(result));
  std::string lines;
  for (const auto& r : result.steps) lines += step_record_json(r) + "\n";
  write_file(d / "steps.jsonl", lines);
  write_file(d / "plasma_final.csv", plasma_dump_csv(result.final));
  write_file(d / "vacuum_final.csv", vacuum_dump_csv(result.final, cfg.mu));
  if (!result.suite.empty()) write_file(d / "suite.json", suite_json(result.suite) + "\n");
}

// ---- refinement -----------------------------------------------------------------------------

std::vector<ResidualReport> refine_study(const ScenarioConfig& config, int levels) {
  if (levels < 2) throw Error(ErrorKind::configuration_error, "a refinement study needs at least two levels");
  config.validate();
  std::vector<std::future<RunResult>> runs;
  for (int l = 0; l < levels; ++l) {
    ScenarioConfig c = config;
    c.dt = config.dt / std::pow(2.0, l);
    c.output_dir.clear();
    c.run_checks = false;
    c.energy_every = std::numeric_limits<int>::max();
    runs.push_back(std::async(std::launch::async, [c] { return run_simulation(c); }));
  }
  std::vector<RunResult> results;
  for (auto& f : runs) results.push_back(f.get());

  auto label = [&](int l) { return "dt=" + std::to_string(config.dt / std::pow(2.0, l)); };
  std::vector<ResidualReport> out;
  std::vector<LevelResult> drift, diff, still;
  for (int l = 0; l < levels; ++l) {
    const double h = config.dt / std::pow(2.0, l);
    const auto& e = results[l].energies;
    drift.push_back({label(l), h, relative(std::abs(e.back().E[0] - e.front().E[0]), std::abs(e.front().E[0]))});
    const SystemState& a = results[l].initial;
    const SystemState& b = results[l].final;
    const double dx = std::max((b.plasma.map.x1() - a.plasma.map.x1()).abs().maxCoeff(),
                               (b.plasma.map.x2() - a.plasma.map.x2()).abs().maxCoeff());
    const double du = std::max((b.plasma.u - a.plasma.u).max_abs(), (b.plasma.beta - a.plasma.beta).max_abs());
    still.push_back({label(l), h, std::max(dx, du)});
    if (l + 1 < levels) {
      const Field& x1 = results[l].final.plasma.map.x1();
      const Field& x2 = results[l].final.plasma.map.x2();
      const Field& y1 = results[l + 1].final.plasma.map.x1();
      const Field& y2 = results[l + 1].final.plasma.map.x2();
      diff.push_back({label(l), h, std::max((x1 - y1).row(0).abs().maxCoeff(), (x2 - y2).row(0).abs().maxCoeff())});
    }
  }
  out.push_back(identity_report("energy_drift", NormKind::linf, drift));
  out.push_back(identity_report("interface_difference", NormKind::linf, diff));
  const bool is_static = config.scenario == Scenario::static_zpinch || config.scenario == Scenario::vacuum_azimuthal ||
                         config.scenario == Scenario::vacuum_only;
  if (is_static) {
    // An exact steady state: the change stays at the noise floor.
    Criteria c;
    c.tolerance = 1e-8;
    c.floor = 1e-10;
    out.push_back(identity_report("stationarity", NormKind::linf, still, c));
  }
  SuiteConfig sc;
  sc.seed = config.seed;
  out.push_back(run_check("gauss_disk", sc));
  out.push_back(run_check("pressure_identity", sc));
  return out;
}

}  // namespace mhd2d
