#include <doctest.h>

#include "mhd2d/errors.hpp"
#include "mhd2d/vacuum.hpp"

#include <cmath>

using namespace mhd2d;

namespace {

constexpr double pi = 3.14159265358979323846;

// Gamma: circle of radius 1 centred at (delta, 0); W: circle of radius 2.
ChartPtr annulus(int nr, int na, double delta = 0.0) {
  const Eigen::ArrayXd phi = Eigen::ArrayXd::LinSpaced(na, 0.0, 2 * pi * (na - 1) / na);
  return std::make_shared<const Chart>(
      annulus_chart(nr, delta + phi.cos(), phi.sin(), 2 * phi.cos(), 2 * phi.sin()));
}

Field radius(const Chart& c) { return (c.x1().square() + c.x2().square()).sqrt(); }

double rel_l2(const Chart& c, const Vec2Field& a, const Vec2Field& b) {
  const Field d = (a[0] - b[0]).square() + (a[1] - b[1]).square();
  const Field n = b[0].square() + b[1].square();
  return std::sqrt(c.integrate(d) / c.integrate(n));
}

Vec2Field azimuthal(const Chart& c, double cc) {
  const Field r2 = c.x1().square() + c.x2().square();
  return {-cc * c.x2() / r2, cc * c.x1() / r2};
}

}  // namespace

TEST_CASE("harmonic field on the concentric annulus") {
  const ChartPtr a = annulus(24, 32);
  const double cc = 0.7;
  const HarmonicField h = solve_harmonic_field(*a, 2 * pi * cc);
  CHECK(rel_l2(*a, h.H, azimuthal(*a, cc)) < 1e-10);
  CHECK(h.flux == doctest::Approx(cc * std::log(2.0)).epsilon(1e-10));
  CHECK(flux_across(*a, h.H) == doctest::Approx(h.flux).epsilon(1e-10));
  CHECK(vacuum_residuals(*a, h.H).max() < 1e-9);
  for (int row : {0, 5, 23}) CHECK(circulation(*a, h.H, row) == doctest::Approx(2 * pi * cc).epsilon(1e-10));

  const HarmonicField f = solve_harmonic_flux(*a, h.flux);
  CHECK(rel_l2(*a, f.H, h.H) < 1e-12);

  const HarmonicField z = solve_harmonic_field(*a, 0.0);
  CHECK(std::max(max_abs(z.H[0]), max_abs(z.H[1])) == 0.0);
}

TEST_CASE("harmonic field on an off-centre annulus") {
  // Both circles are Apollonian for the limit points p, p' = 4/p:
  // psi = -(ln|z - p| - ln|z - p'|) has circulation 2 pi.
  const double delta = 0.3;
  const double b = 3 + delta * delta;
  const double p = (b - std::sqrt(b * b - 16 * delta * delta)) / (2 * delta);
  const double pp = 4 / p;
  REQUIRE(std::abs(p - delta) < 1.0);
  for (int nr : {16, 32}) {
    const ChartPtr a = annulus(nr, 2 * nr, delta);
    const Chart& c = *a;
    const Field d1 = (c.x1() - p).square() + c.x2().square();
    const Field d2 = (c.x1() - pp).square() + c.x2().square();
    // H = (d2 psi, -d1 psi)
    const Vec2Field exact{-(c.x2() / d1 - c.x2() / d2), (c.x1() - p) / d1 - (c.x1() - pp) / d2};
    const HarmonicField h = solve_harmonic_field(c, 2 * pi);
    const double err = rel_l2(c, h.H, exact);
    MESSAGE("off-centre annulus nr=" << nr << " error " << err);
    CHECK(err < (nr == 16 ? 1e-4 : 1e-8));
    CHECK(vacuum_residuals(c, h.H).max() < 1e-7);
  }
}

TEST_CASE("circulation") {
  const ChartPtr a = annulus(16, 32, 0.2);
  const Chart& c = *a;
  const Vec2Field grad_phi{c.x2() + 2 * c.x1(), c.x1()};  // grad(x1 x2 + x1^2)
  CHECK(std::abs(circulation(c, grad_phi, 3)) < 1e-12);
  CHECK(circulation(c, {c.grid().zeros(), c.grid().zeros()}, 0) == 0.0);
  CHECK_THROWS_AS(circulation(c, grad_phi, 16), Error);
  CHECK_THROWS_AS(circulation(c, grad_phi, -1), Error);
}

TEST_CASE("electric field mixed problem") {
  const ChartPtr a = annulus(24, 32);
  const Chart& c = *a;
  const Field zero = c.grid().zeros();
  const double cc = 0.6, V = 0.25;
  const Vec2Field H = azimuthal(c, cc);
  const Vec2Field u{c.grid().constant(V), zero};

  const ElectricField e = solve_electric_field(c, u, H);
  const Field r = radius(c);
  const Field exact = cc * V * (r / 3 - 4 / (3 * r)) * (c.x1() / r);
  CHECK(std::sqrt(c.integrate((e.Xi - exact).square()) / c.integrate(exact.square())) < 1e-10);
  const Eigen::ArrayXd phi = c.grid().angular_field().row(0).transpose();
  CHECK((e.data.f1 + cc * V * phi.cos()).abs().maxCoeff() < 1e-12);
  CHECK((e.data.f2 + cc * V * phi.sin()).abs().maxCoeff() < 1e-10);
  CHECK(e.oblique_l2 < 1e-9);

  CHECK(max_abs(solve_electric_field(c, {zero, zero}, H).Xi) == 0.0);
  CHECK(max_abs(solve_electric_field(c, u, {zero, zero}).Xi) == 0.0);
}

TEST_CASE("vacuum evolution") {
  const double mu = 1.0, cc = 0.5;
  const ChartPtr a = annulus(16, 32);
  const Chart& c = *a;

  SUBCASE("no motion") {
    const VacuumState s0 = make_vacuum_state(a, azimuthal(c, cc), mu);
    VacuumState s = s0;
    auto still = [](const Chart& ch, double) { return Vec2Field{ch.grid().zeros(), ch.grid().zeros()}; };
    for (int k = 0; k < 5; ++k) s = evolve_vacuum(s, still, 0.1, {});
    CHECK((s.varpi - s0.varpi).max_abs() == 0.0);
    CHECK(max_abs(s.Xi) == 0.0);
  }

  SUBCASE("zero field stays zero under motion") {
    VacuumState s = make_vacuum_state(a, {c.grid().zeros(), c.grid().zeros()}, mu);
    auto rot = [](const Chart& ch, double) {
      return extend_velocity_to_vacuum(-ch.x2().row(0).transpose(), ch.x1().row(0).transpose(), ch).v;
    };
    for (int k = 0; k < 5; ++k) s = evolve_vacuum(s, rot, 0.05, {});
    CHECK(s.varpi.max_abs() == 0.0);
  }

  SUBCASE("rigid rotation keeps the azimuthal field") {
    // The virtual particles shear the chart; 20 radial nodes resolve it up
    // to t = 0.25.
    const double omega = 1.0;
    const ChartPtr fine = annulus(20, 32);
    VacuumState s = make_vacuum_state(fine, azimuthal(*fine, cc), mu);
    auto rot = [omega](const Chart& ch, double) {
      return extend_velocity_to_vacuum(-omega * ch.x2().row(0).transpose(), omega * ch.x1().row(0).transpose(), ch)
          .v;
    };
    VacuumStepReport rep;
    for (int k = 0; k < 10; ++k) s = evolve_vacuum(s, rot, 0.025, {}, &rep);
    const Chart now = s.map.current();
    const Vec2Field H = vacuum_field(s);
    MESSAGE("rotation: field error " << rel_l2(now, H, azimuthal(now, cc)) << " residual " << rep.residuals.max());
    CHECK(rel_l2(now, H, azimuthal(now, cc)) < 1e-6);
    CHECK(circulation(now, H, 19) == doctest::Approx(2 * pi * cc).epsilon(1e-6));
    CHECK(rep.residuals.max() < 1e-6);
  }

  SUBCASE("translating interface conserves the flux") {
    const double V = 0.2;
    const ChartPtr fine = annulus(24, 32);
    const HarmonicField h0 = solve_harmonic_field(*fine, 2 * pi * cc);
    VacuumState s = make_vacuum_state(fine, h0.H, mu);
    auto shift = [V](const Chart& ch, double) {
      const Eigen::ArrayXd z = Eigen::ArrayXd::Zero(ch.grid().n_angular());
      return extend_velocity_to_vacuum(z + V, z, ch).v;
    };
    VacuumStepReport rep;
    for (int k = 0; k < 20; ++k) s = evolve_vacuum(s, shift, 0.0125, {}, &rep);
    const Chart now = s.map.current();
    CHECK(now.x1()(0, 0) == doctest::Approx(1.0 + 0.05).epsilon(1e-12));
    const Vec2Field H = vacuum_field(s);
    CHECK(flux_across(now, H) == doctest::Approx(h0.flux).epsilon(1e-9));
    const HarmonicField h1 = solve_harmonic_flux(now, h0.flux);
    MESSAGE("evolved vs constrained field: " << rel_l2(now, H, h1.H) << " residuals " << rep.residuals.max());
    CHECK(rel_l2(now, H, h1.H) < 1e-8);
    CHECK(rep.residuals.max() < 1e-6);

    VacuumStepOptions project;
    project.project_harmonic = true;
    const VacuumState p = evolve_vacuum(s, shift, 0.0125, project, &rep);
    CHECK(rep.projection_correction < 1e-6);
    // harmonic on the deformed chart up to its discretisation error
    CHECK(rep.residuals.max() < 1e-5);
    CHECK(flux_across(p.map.current(), vacuum_field(p)) == doctest::Approx(h0.flux).epsilon(1e-9));
  }
}

TEST_CASE("perp grad Xi transport check") {
  const ChartPtr a = annulus(16, 32);
  const Chart& c = *a;
  const double omega = 0.8;
  auto rotated = [&](double t) {
    const double ct = std::cos(omega * t), st = std::sin(omega * t);
    return FlowMap(a, Domain::vacuum, ct * c.x1() - st * c.x2(), st * c.x1() + ct * c.x2(), t);
  };
  // Xi = x1 x2 is steady in the Eulerian frame.
  auto xi_of = [](const FlowMap& m) { return Field(m.x1() * m.x2()); };
  std::vector<double> errs;
  for (double dt : {0.02, 0.01}) {
    std::vector<FlowMap> maps{rotated(0.3 - dt), rotated(0.3), rotated(0.3 + dt)};
    std::vector<Field> xi{xi_of(maps[0]), xi_of(maps[1]), xi_of(maps[2])};
    const Vec2Field v{-omega * maps[1].x2(), omega * maps[1].x1()};
    errs.push_back(evolve_perp_xi_check(maps, xi, v));
  }
  CHECK(errs[1] < 5e-4);
  CHECK(errs[0] / errs[1] > 3.5);

  std::vector<FlowMap> maps{rotated(0.0), rotated(0.1)};
  const Field z = c.grid().zeros();
  CHECK(evolve_perp_xi_check(maps, {z, z}, {z, z}) == 0.0);
  CHECK_THROWS_AS(evolve_perp_xi_check({rotated(0.0)}, {z}, {z, z}), Error);
}
