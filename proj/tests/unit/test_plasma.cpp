#include <doctest.h>

#include "mhd2d/errors.hpp"
#include "mhd2d/plasma.hpp"

#include <cmath>

using namespace mhd2d;

namespace {

ChartPtr unit_disk(int nr = 12, int na = 24) {
  auto g = SpectralGrid::disk(nr, na);
  const Field r = g->radial_field(), p = g->angular_field();
  return std::make_shared<const Chart>(g, r * p.cos(), r * p.sin());
}

PlasmaState make_state(const ChartPtr& labels, const Vec2Field& v, const Vec2Field& H, double mu) {
  const FlowMap map(labels, Domain::plasma);
  return PlasmaState{map, to_labels(v, map.jacobian()), to_labels(H, map.jacobian()), labels->grid().zeros(), mu,
                     false};
}

Eigen::ArrayXd zeros_on_gamma(const Chart& c) { return Eigen::ArrayXd::Zero(c.grid().n_angular()); }

}  // namespace

TEST_CASE("pressure solve examples") {
  const ChartPtr d = unit_disk();
  const Chart& c = *d;
  const Field zero = c.grid().zeros();
  const Field r2 = c.x1().square() + c.x2().square();

  const PressureProblem p0 = pressure_problem(c, {zero, zero}, {zero, zero}, 1.0, Eigen::ArrayXd::Constant(24, 5.0));
  CHECK(max_abs(pressure_solve(p0, c) - 5.0) < 1e-12);

  const double omega = 0.7;
  const PressureProblem p1 = pressure_problem(c, {-omega * c.x2(), omega * c.x1()}, {zero, zero}, 1.0, zeros_on_gamma(c));
  CHECK(max_abs(p1.rhs - 2 * omega * omega) < 1e-12);
  CHECK(max_abs(pressure_solve(p1, c) - omega * omega * (r2 - 1.0) / 2) < 1e-12);

  const double mu = 1.5;
  const PressureProblem p2 = pressure_problem(c, {zero, zero}, {-c.x2(), c.x1()}, mu, zeros_on_gamma(c));
  const Field q = pressure_solve(p2, c);
  CHECK(max_abs(q - mu * (1.0 - r2) / 2) < 1e-12);
  CHECK((q.row(0) == 0.0).all());
}

TEST_CASE("momentum and induction right sides") {
  const ChartPtr d = unit_disk(24, 48);
  const Chart& c = *d;
  const Field zero = c.grid().zeros();

  // Z-pinch equilibrium
  const double mu = 1.3;
  PlasmaState z = make_state(d, {zero, zero}, {-c.x2(), c.x1()}, mu);
  CHECK_THROWS_AS(momentum_rhs(z), Error);
  z.q_plus = mu * (1.0 - c.x1().square() - c.x2().square()) / 2;
  z.pressure_fresh = true;
  CHECK(momentum_rhs(z).max_abs() < 1e-10);
  CHECK(induction_rhs(z).max_abs() < 1e-10);

  PlasmaState rest = make_state(d, {zero, zero}, {zero, zero}, 1.0);
  rest.q_plus = c.grid().constant(3.0);
  rest.pressure_fresh = true;
  CHECK(momentum_rhs(rest).max_abs() < 1e-10);
  CHECK(induction_rhs(rest).max_abs() == 0.0);

  // Manufactured polynomial fields on a deformed map. Hand evaluation:
  //   v = (x1^2, -2 x1 x2), H = (x2, 0), q = x1 x2
  //   momentum  = (-x2 + 2 x1^3 + 4 x1 x2^2, -x1 + 4 x1^2 x2)
  //   induction = (4 x1 x2, -2 x2^2)
  const Field& y1 = d->x1();
  const Field& y2 = d->x2();
  const Field x1 = y1 + 0.3 * y2.sin();
  const Field x2 = y2 + 0.2 * x1.sin();
  const FlowMap map(d, Domain::plasma, x1, x2, 0.0);
  const auto F = map.jacobian();
  PlasmaState s{map, to_labels({x1.square(), -2 * x1 * x2}, F), to_labels({x2, zero}, F), x1 * x2, 1.0, true};
  const TensorField m = momentum_rhs(s);
  const TensorField mexp = to_labels({-x2 + 2 * x1.cube() + 4 * x1 * x2.square(), -x1 + 4 * x1.square() * x2}, F);
  CHECK((m - mexp).max_abs() < 1e-10);
  const TensorField i = induction_rhs(s);
  const TensorField iexp = to_labels({4 * x1 * x2, -2 * x2.square()}, F);
  CHECK((i - iexp).max_abs() < 1e-10);
}

TEST_CASE("Taylor sign") {
  const ChartPtr d = unit_disk();
  const Chart& c = *d;
  const double mu = 2.0;
  const Field r2 = c.x1().square() + c.x2().square();
  const TaylorSign z = taylor_sign(c, mu * (1.0 - r2) / 2);
  CHECK((z.grad_n_P + mu).abs().maxCoeff() < 1e-10);
  CHECK(z.margin == doctest::Approx(mu));
  CHECK_FALSE(z.violated);

  // Static column: no interior fields, vacuum field (cc/r) e_phi on 1 < r < 2.
  auto g = SpectralGrid::annulus(16, 24);
  const Field rr = 1.0 + g->radial_field(), p = g->angular_field();
  const Chart vac(g, rr * p.cos(), rr * p.sin());
  const double cc = 0.8;
  const Field qm = mu * cc * cc / (2 * rr.square());
  const TaylorSign col = taylor_sign(c, c.grid().constant(mu * cc * cc / 2), &vac, &qm);
  CHECK((col.grad_n_P - mu * cc * cc).abs().maxCoeff() < 1e-6);
  CHECK(col.violated);

  const TaylorSign zero = taylor_sign(c, c.grid().zeros());
  CHECK(zero.degenerate);
  CHECK(zero.violated);
}

TEST_CASE("step_plasma") {
  const ChartPtr d = unit_disk(12, 24);
  const Chart& c = *d;
  const Field zero = c.grid().zeros();
  auto no_vacuum = [](const Chart& ch) { return Eigen::ArrayXd::Zero(ch.grid().n_angular()); };

  const double mu = 1.0;
  PlasmaState z = make_state(d, {zero, zero}, {-c.x2(), c.x1()}, mu);
  z.q_plus = mu * (1.0 - c.x1().square() - c.x2().square()) / 2;
  const PlasmaState z0 = z;
  PlasmaStepReport rep;
  for (int k = 0; k < 100; ++k) z = step_plasma(z, 0.01, no_vacuum, {}, &rep);
  CHECK((z.u - z0.u).max_abs() <= 1e-8);
  CHECK((z.beta - z0.beta).max_abs() <= 1e-8);
  CHECK(max_abs(z.q_plus - z0.q_plus) <= 1e-8);
  CHECK(max_abs(z.map.x1() - z0.map.x1()) <= 1e-8);

  PlasmaState rest = make_state(d, {zero, zero}, {zero, zero}, mu);
  for (int k = 0; k < 10; ++k) rest = step_plasma(rest, 0.01, no_vacuum);
  CHECK(rest.u.max_abs() == 0.0);
  CHECK(rest.beta.max_abs() == 0.0);

  // Rigid rotation: the speed profile |v| = omega r is transported exactly.
  const double omega = 1.0;
  PlasmaState rot = make_state(d, {-omega * c.x2(), omega * c.x1()}, {zero, zero}, mu);
  for (int k = 0; k < 50; ++k) rot = step_plasma(rot, 0.02, no_vacuum, {}, &rep);
  const EulerianPlasma e = eulerian(rot);
  const Field speed = (e.v[0].square() + e.v[1].square()).sqrt();
  const Field r = (e.chart.x1().square() + e.chart.x2().square()).sqrt();
  CHECK(max_abs(speed - omega * r) < 1e-8);
  // positions rotated by omega t = 1
  CHECK(max_abs(rot.map.x1() - (std::cos(1.0) * c.x1() - std::sin(1.0) * c.x2())) < 1e-7);
  CHECK(rep.cfl > 0.0);
  CHECK(rep.stability_warning == (rep.cfl > 0.5));
  rot = step_plasma(rot, 1e-4, no_vacuum, {}, &rep);
  CHECK_FALSE(rep.stability_warning);
}
