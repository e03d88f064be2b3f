/// @file acceptance.cpp
/// @brief Acceptance criteria 1-9, one PASS/FAIL line each.
///
///  1. energy conservation on the perturbed interface (128x64, dt 5e-4, t 0.5)
///  2. static Z-pinch invariant over 200 steps
///  3. concentric-annulus harmonic field c/r e_phi
///  4. electric potential on the concentric annulus, oblique-datum convergence
///  5. identity suite: order and finest residual
///  6. Taylor sign on the Z-pinch and the vacuum-azimuthal column
///  7. estimate constants bounded under mesh doubling
///  8. energy window of the perturbed-interface run
///  9. determinism and volume
///
/// Exit status is the number of failed criteria.

#include "mhd2d/runner.hpp"
#include "mhd2d/vacuum.hpp"
#include "mhd2d/verifier.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>

using namespace mhd2d;
using std::numbers::pi;

namespace {

int failures = 0;

void record(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s (%s)\n", id, ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

// Runs a criterion; an exception is a failure with its message.
void criterion(int id, const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    record(id, name, false, std::string("error: ") + e.what());
  }
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

ChartPtr annulus(int nr, int na, double a, double b, double delta = 0.0) {
  const Eigen::ArrayXd phi = Eigen::ArrayXd::LinSpaced(na, 0.0, 2.0 * pi * (na - 1) / na);
  return std::make_shared<const Chart>(annulus_chart(nr, delta + a * phi.cos(), a * phi.sin(), b * phi.cos(), b * phi.sin()));
}

double rel_l2(const Chart& c, const Field& a, const Field& b) {
  return std::sqrt(c.integrate((a - b).square()) / c.integrate(b.square()));
}

double state_change(const SystemState& a, const SystemState& b) {
  double d = std::max(max_abs(a.plasma.map.x1() - b.plasma.map.x1()), max_abs(a.plasma.map.x2() - b.plasma.map.x2()));
  d = std::max(d, (a.plasma.u - b.plasma.u).max_abs());
  d = std::max(d, (a.plasma.beta - b.plasma.beta).max_abs());
  return std::max(d, max_abs(a.plasma.q_plus - b.plasma.q_plus));
}

ScenarioConfig interface_run() {
  ScenarioConfig c;
  c.scenario = Scenario::perturbed_interface;
  c.plasma_radial = 128;
  c.plasma_angular = 64;
  c.vacuum_radial = 24;
  c.dt = 5e-4;
  c.t_end = 0.5;
  c.amplitude = 1e-3;
  c.mode = 2;
  c.energy_every = 10;
  return c;
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();

  std::optional<RunResult> interface;
  criterion(1, "energy conservation", [&] {
    interface = run_simulation(interface_run());
    const double worst = [&] {
      double w = 0.0;
      for (const auto& s : interface->steps) w = std::max(w, s.constraints.max());
      return w;
    }();
    record(1, "energy conservation", interface->e0_drift <= 1e-6,
           fmt("E0 relative drift %.3e <= 1e-6 over %g steps, worst constraint residual %.2e", interface->e0_drift,
               double(interface->steps.size() - 1), worst));
  });

  criterion(2, "Z-pinch equilibrium", [] {
    ScenarioConfig c;
    c.scenario = Scenario::static_zpinch;
    c.dt = 1e-3;
    c.t_end = 0.2;
    c.energy_every = 50;
    const RunResult r = run_simulation(c);
    const double d = state_change(r.initial, r.final);
    record(2, "Z-pinch equilibrium", d <= 1e-8 && r.steps.size() == 201,
           fmt("max change %.3e <= 1e-8 over %g steps", d, double(r.steps.size() - 1)));
  });

  criterion(3, "vacuum harmonic field", [] {
    const ChartPtr a = annulus(64, 128, 1.0, 2.0);
    const double c = 0.7;
    const HarmonicField h = solve_harmonic_field(*a, 2.0 * pi * c);
    const Field r2 = a->x1().square() + a->x2().square();
    const Field e1 = -c * a->x2() / r2, e2 = c * a->x1() / r2;
    const double err = std::sqrt(a->integrate((h.H[0] - e1).square() + (h.H[1] - e2).square()) /
                                 a->integrate(e1.square() + e2.square()));
    const VacuumResiduals res = vacuum_residuals(*a, h.H);
    record(3, "vacuum harmonic field", err <= 1e-8 && res.max() <= 1e-8,
           fmt("relative L2 error %.3e, div %.2e, curl %.2e, normal %.2e", err, res.div, res.curl,
               std::max(res.normal_gamma, res.normal_wall)));
  });

  criterion(4, "electric potential", [] {
    const ChartPtr a = annulus(32, 64, 1.0, 2.0);
    const double c = 0.6, V = 0.25;
    const Field r = (a->x1().square() + a->x2().square()).sqrt();
    const Vec2Field H{-c * a->x2() / r.square(), c * a->x1() / r.square()};
    const Vec2Field u{a->grid().constant(V), a->grid().zeros()};
    const ElectricField e = solve_electric_field(*a, u, H);
    const Field exact = c * V * (r / 3.0 - 4.0 / (3.0 * r)) * (a->x1() / r);
    const double err = rel_l2(*a, e.Xi, exact);

    // Oblique datum on an off-centre interface under angular refinement.
    std::vector<double> oblique;
    for (int na : {8, 16, 32}) {
      const ChartPtr b = annulus(na / 2 + 4, na, 1.0, 2.0, 0.2);
      const HarmonicField h = solve_harmonic_field(*b, 2.0 * pi * c);
      oblique.push_back(solve_electric_field(*b, {b->grid().constant(V), b->grid().zeros()}, h.H).oblique_l2);
    }
    const double o1 = std::log2(oblique[0] / oblique[1]), o2 = std::log2(oblique[1] / oblique[2]);
    const double order = std::min(o1, o2);
    record(4, "electric potential", err <= 1e-6 && order >= 1.0,
           fmt("relative L2 error %.3e; oblique residual %.2e -> %.2e, order %.1f", err, oblique[0], oblique[2], order));
  });

  std::vector<ResidualReport> suite;
  criterion(5, "identity suite", [&] {
    suite = run_suite(SuiteConfig{});
    int n = 0, bad = 0;
    double worst = 0.0, min_order = INFINITY;
    std::string failed;
    for (const auto& r : suite) {
      if (r.kind != CheckKind::identity) continue;
      ++n;
      worst = std::max(worst, r.residual);
      if (r.convergence_order) min_order = std::min(min_order, *r.convergence_order);
      if (r.status != CheckStatus::passed) {
        ++bad;
        failed += " " + r.check_name;
      }
    }
    record(5, "identity suite", bad == 0 && n > 0,
           fmt("%g identity checks, worst finest residual %.2e, smallest measured order %.2f", n, worst, min_order) +
               (failed.empty() ? "" : "; failed:" + failed));
  });

  criterion(6, "Taylor sign", [] {
    ScenarioConfig z;
    z.scenario = Scenario::static_zpinch;
    z.mu = 1.5;
    const SystemState zs = build_scenario(z);
    const TaylorSign tz = taylor_sign(eulerian(zs.plasma).chart, zs.plasma.q_plus);

    ScenarioConfig v;
    v.scenario = Scenario::vacuum_azimuthal;
    v.mu = 2.0;
    const double c = 0.7;
    v.circulation = 2.0 * pi * c;
    const SystemState vs = build_scenario(v);
    const Field qm = magnetic_pressure(vs.H_vacuum, v.mu);
    const TaylorSign tv = taylor_sign(eulerian(vs.plasma).chart, vs.plasma.q_plus, vs.vacuum_chart.get(), &qm);
    const double expected = v.mu * c * c;
    const double ez = std::abs(tz.margin - z.mu);
    const double ev = (tv.grad_n_P - expected).abs().maxCoeff();
    record(6, "Taylor sign", ez <= 1e-6 && !tz.violated && ev <= 1e-6 && tv.violated,
           fmt("Z-pinch margin %.9f (mu %.1f); vacuum column grad_N P error %.2e vs mu c^2 = %.3f, flagged violated", tz.margin,
               z.mu, ev, expected));
  });

  criterion(7, "estimate constants", [&] {
    if (suite.empty()) suite = run_suite(SuiteConfig{});
    int n = 0, bad = 0;
    double worst = 0.0;
    std::string failed;
    for (const auto& r : suite) {
      if (r.kind != CheckKind::inequality) continue;
      ++n;
      if (r.growth) worst = std::max(worst, *r.growth);
      if (r.status != CheckStatus::passed) {
        ++bad;
        failed += " " + r.check_name;
      }
    }
    record(7, "estimate constants", bad == 0 && n > 0 && worst < 2.0,
           fmt("%g inequality checks, largest growth under doubling %.3f < 2", n, worst) +
               (failed.empty() ? "" : "; failed:" + failed));
  });

  criterion(8, "energy window", [&] {
    if (!interface) throw std::runtime_error("perturbed-interface run unavailable");
    const auto& reports = interface->energies;
    const auto& th = interface->theorem;
    auto total = [](const EnergyReport& r) { return r.E[0] + r.E[1] + r.E[2] + r.E[3]; };
    const double s0 = total(reports.front()), e0 = reports.front().E_cal;
    double s_ratio = 0.0, e_ratio = 0.0;
    for (const auto& r : reports) {
      if (r.t > th.T_obs) break;
      s_ratio = std::max(s_ratio, total(r) / s0);
      e_ratio = std::max(e_ratio, r.E_cal / e0);
    }
    const bool ok = th.T_obs > 0.0 && !th.sign_violated && s_ratio <= 2.0 && e_ratio <= 2.0 && th.ecal_within_bound;
    record(8, "energy window", ok,
           fmt("T_obs %g, max sum E_s / sum E_s(0) %.6f, max Ecal / Ecal(0) %.6f over %g reports", th.T_obs, s_ratio, e_ratio,
               double(reports.size())));
  });

  criterion(9, "determinism and volume", [&] {
    ScenarioConfig c;
    c.scenario = Scenario::perturbed_interface;
    c.plasma_radial = 16;
    c.plasma_angular = 32;
    c.vacuum_radial = 16;
    c.t_end = 0.05;
    c.energy_every = 5;
    c.seed = 11;
    const RunResult a = run_simulation(c), b = run_simulation(c);
    const bool same = energy_csv(a) == energy_csv(b) && plasma_dump_csv(a.final) == plasma_dump_csv(b.final) &&
                      vacuum_dump_csv(a.final, c.mu) == vacuum_dump_csv(b.final, c.mu);
    const double vol = interface ? std::max(interface->volume_drift, a.volume_drift) : a.volume_drift;
    record(9, "determinism and volume", same && vol <= 1e-8,
           std::string(same ? "CSV bit-identical" : "CSV differs") + fmt(", volume drift %.3e <= 1e-8", vol));
  });

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d of 9 criteria failed (%.0f s)\n", failures, secs);
  return failures;
}
