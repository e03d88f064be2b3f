#include <doctest.h>

#include "mhd2d/chart.hpp"
#include "mhd2d/elliptic.hpp"

#include <cmath>
#include <numbers>

using namespace mhd2d;

namespace {

Chart unit_disk(int nr, int na) {
  auto g = SpectralGrid::disk(nr, na);
  const Field r = g->radial_field(), p = g->angular_field();
  return Chart(g, r * p.cos(), r * p.sin());
}

Chart circular_annulus(int nr, int na, double a, double b) {
  auto g = SpectralGrid::annulus(nr, na);
  const Field r = a + (b - a) * g->radial_field();
  const Field p = g->angular_field();
  return Chart(g, r * p.cos(), r * p.sin());
}

}  // namespace

TEST_CASE("chebyshev differentiation is exact on polynomials") {
  const Chebyshev c = chebyshev(8);
  const Eigen::VectorXd f = c.nodes.array().pow(5).matrix();
  const Eigen::VectorXd df = c.diff * f;
  for (int j = 0; j <= 8; ++j) CHECK(df(j) == doctest::Approx(5 * std::pow(c.nodes(j), 4)).epsilon(1e-12));
}

TEST_CASE("disk gradient and quadrature are spectrally accurate") {
  const Chart chart = unit_disk(16, 32);
  const Field f = (chart.x1() * 1.3).exp() * (chart.x2() * 0.7).sin();
  const Vec2Field grad = chart.grad(f);
  const Field exact1 = 1.3 * f;
  const Field exact2 = 0.7 * (chart.x1() * 1.3).exp() * (chart.x2() * 0.7).cos();
  CHECK(max_abs(grad[0] - exact1) < 1e-10);
  CHECK(max_abs(grad[1] - exact2) < 1e-10);
  CHECK(chart.area() == doctest::Approx(std::numbers::pi).epsilon(1e-13));
  // int_disk r^2 = pi/2
  const Field r2 = chart.x1().square() + chart.x2().square();
  CHECK(chart.integrate(r2) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-13));
}

TEST_CASE("annulus quadrature and boundary rows") {
  const Chart chart = circular_annulus(12, 24, 1.0, 2.0);
  CHECK(chart.area() == doctest::Approx(3.0 * std::numbers::pi).epsilon(1e-13));
  const BoundaryRow in = chart.boundary_row(0);
  CHECK(in.line_weight.sum() == doctest::Approx(2 * std::numbers::pi).epsilon(1e-13));
  CHECK(in.n1(0) == doctest::Approx(1.0));
}

TEST_CASE("Dirichlet Poisson solve on disk and deformed disk") {
  const Chart chart = unit_disk(16, 32);
  const Field exact = chart.x1().sin() * chart.x2().cos();
  const Field rhs = -2.0 * exact;
  SolveStats stats;
  const Field q = PoissonSolver().solve(chart, rhs, exact, &stats);
  CHECK(max_abs(q - exact) < 1e-10);

  // Ellipse-like map z + a conj(z).
  auto g = SpectralGrid::disk(16, 32);
  const Field r = g->radial_field(), p = g->angular_field();
  const double a = 0.2;
  const Field z1 = r * p.cos(), z2 = r * p.sin();
  const Chart ell(g, z1 + a * z1, z2 - a * z2);
  const Field ex2 = ell.x1().sin() * ell.x2().cos();
  const Field q2 = PoissonSolver().solve(ell, -2.0 * ex2, ex2, &stats);
  CHECK(max_abs(q2 - ex2) < 1e-9);
  CHECK(stats.iterations < 60);
}

TEST_CASE("Dirichlet Poisson solve on annulus") {
  const Chart chart = circular_annulus(16, 32, 1.0, 2.0);
  const Field exact = chart.x1().exp() * chart.x2().cos();
  const Field q = PoissonSolver().solve(chart, chart.grid().zeros(), exact);
  CHECK(max_abs(q - exact) < 1e-10);
}
