#include <doctest.h>

#include "mhd2d/errors.hpp"
#include "mhd2d/plasma.hpp"
#include "mhd2d/vacuum.hpp"
#include "mhd2d/verifier.hpp"

#include <cmath>
#include <numbers>

using namespace mhd2d;
using std::numbers::pi;

namespace {

ChartPtr unit_disk(int nr = 12, int na = 24) { return std::make_shared<const Chart>(disk_chart(SpectralGrid::disk(nr, na))); }

ChartPtr concentric_annulus(int nr, int na, double a, double b) {
  const Eigen::ArrayXd phi = Eigen::ArrayXd::LinSpaced(na, 0.0, 2.0 * pi * (na - 1) / na);
  return std::make_shared<const Chart>(annulus_chart(nr, a * phi.cos(), a * phi.sin(), b * phi.cos(), b * phi.sin()));
}

std::vector<LevelResult> levels_of(const std::vector<double>& values) {
  std::vector<LevelResult> l;
  double h = 1.0;
  for (double v : values) {
    l.push_back({"h=" + std::to_string(h), h, v});
    h *= 0.5;
  }
  return l;
}

}  // namespace

TEST_CASE("gauss: constant and linear fields on flat charts") {
  const ChartPtr disk = unit_disk();
  const MetricState flat = flat_metric(disk);
  const Field zero = disk->grid().zeros(), one = zero + 1.0;
  CHECK(gauss_residual(flat, {one, zero}) < 1e-12);
  const GaussSides s = gauss_sides(flat, {disk->x1(), disk->x2()});
  CHECK(s.interior == doctest::Approx(2.0 * pi).epsilon(1e-10));
  CHECK(s.boundary == doctest::Approx(2.0 * pi).epsilon(1e-10));

  const ChartPtr ring = concentric_annulus(10, 24, 1.0, 2.0);
  const GaussSides r = gauss_sides(flat_metric(ring), {ring->x1(), ring->x2()});
  CHECK(r.interior == doctest::Approx(6.0 * pi).epsilon(1e-10));
  CHECK(r.boundary == doctest::Approx(6.0 * pi).epsilon(1e-10));
}

TEST_CASE("gauss: pulled-back metric of a nonlinear map") {
  const ChartPtr labels = unit_disk(14, 28);
  const Field& y1 = labels->x1();
  const Field& y2 = labels->x2();
  const FlowMap map(labels, Domain::plasma, y1 + 0.2 * y2.sin(), y2 + 0.1 * y1 * y2, 0.0);
  const Vec2Field F{(0.7 * y1).cos() * y2, y1.square() + 0.3};
  CHECK(gauss_residual(pullback_metric(map), F) < 1e-11);
}

TEST_CASE("tangential projections on the unit circle") {
  const ChartPtr disk = unit_disk(12, 24);
  const Field rho2 = disk->x1().square() + disk->x2().square();
  const ProjectionResidual p = projection_identity_residual(*disk, 1.0 - rho2);
  CHECK(p.max() < 1e-9);
  CHECK(projection_identity_residual(*disk, disk->grid().zeros()).max() == 0.0);
  const ProjectionResidual s = projection_identity_residual(*disk, (1.0 - rho2) * disk->x2() + 0.3 * disk->x1());
  CHECK(s.second < 1e-9);
  CHECK(s.third < 1e-8);
}

TEST_CASE("boundary evolution: rotation, expansion and rest") {
  const ChartPtr labels = unit_disk(10, 20);
  const Field& y1 = labels->x1();
  const Field& y2 = labels->x2();
  const double dt = 0.01;
  const std::vector<double> ts{-2 * dt, -dt, 0.0, dt, 2 * dt};

  std::vector<FlowMap> rot, grow, rest;
  for (double t : ts) {
    rot.emplace_back(labels, Domain::plasma, std::cos(t) * y1 - std::sin(t) * y2, std::sin(t) * y1 + std::cos(t) * y2, t);
    grow.emplace_back(labels, Domain::plasma, std::exp(t) * y1, std::exp(t) * y2, t);
    rest.emplace_back(labels, Domain::plasma, y1, y2, t);
  }
  CHECK(boundary_evolution_residual(rot, {-y2, y1}).max() < 1e-9);
  CHECK(boundary_evolution_residual(grow, {y1, y2}).max() < 1e-9);
  CHECK(boundary_evolution_residual(rest, {labels->grid().zeros(), labels->grid().zeros()}).max() < 1e-12);
  // Two levels: centred difference about the midpoint.
  const std::vector<FlowMap> pair{grow[1], grow[3]};
  CHECK(boundary_evolution_residual(pair, {y1, y2}).max() < 1e-4);

  try {
    boundary_evolution_residual({grow[0]}, {y1, y2});
    FAIL("expected insufficient history");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::insufficient_history);
  }
}

TEST_CASE("div-curl constants are finite and bounded for simple fields") {
  const ChartPtr disk = unit_disk(12, 24);
  const double c_lin = divcurl_constant(*disk, {disk->x1(), disk->x2()}, 0);
  CHECK(std::isfinite(c_lin));
  CHECK(c_lin <= 1.0);
  const double c_rot = divcurl_constant(*disk, {-disk->x2(), disk->x1()}, 0);
  CHECK(std::isfinite(c_rot));
  CHECK(c_rot <= 1.0);
  const ChartPtr ring = concentric_annulus(12, 24, 1.0, 2.0);
  const HarmonicField hf = solve_harmonic_field(*ring, 2.0 * pi);
  const double c_h = divcurl_constant(*ring, hf.H, 0);
  CHECK(std::isfinite(c_h));
  CHECK(c_h == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("pressure identity: Z-pinch equilibrium and zero data") {
  const ChartPtr disk = unit_disk(20, 40);
  const Vec2Field v{disk->grid().zeros(), disk->grid().zeros()};
  const Vec2Field H{-disk->x2(), disk->x1()};
  const Field q = pressure_solve(pressure_problem(*disk, v, H, 1.0, Eigen::ArrayXd::Zero(40)), *disk);
  CHECK(pressure_identity_residual(*disk, v, H, 1.0, q) < 1e-8);
  CHECK(pressure_identity_residual(*disk, v, v, 1.0, disk->grid().zeros()) == 0.0);
}

TEST_CASE("identity reports: order, tolerance and floor") {
  const auto pass = identity_report("quadratic", NormKind::linf, levels_of({1e-5, 2.5e-6, 6.25e-7}));
  CHECK(pass.status == CheckStatus::passed);
  REQUIRE(pass.convergence_order);
  CHECK(*pass.convergence_order == doctest::Approx(2.0));
  CHECK(pass.residual == 6.25e-7);

  const auto slow = identity_report("linear", NormKind::linf, levels_of({4e-6, 2e-6, 1e-6}));
  CHECK(slow.status == CheckStatus::failed);

  const auto big = identity_report("large", NormKind::linf, levels_of({1.0, 0.25, 0.0625}));
  CHECK(big.status == CheckStatus::failed);

  const auto floor = identity_report("roundoff", NormKind::linf, levels_of({1e-15, 3e-16, 5e-16}));
  CHECK(floor.status == CheckStatus::passed);
  CHECK(floor.at_floor);
  CHECK(!floor.convergence_order);
  CHECK(floor.unreliable);

  CHECK(identity_report("empty", NormKind::linf, {}).status == CheckStatus::failed);
}

TEST_CASE("inequality reports: bounded and growing constants") {
  const auto ok = inequality_report("bounded", NormKind::l2, levels_of({1.0, 1.2, 1.25}));
  CHECK(ok.status == CheckStatus::passed);
  REQUIRE(ok.growth);
  CHECK(*ok.growth == doctest::Approx(1.2));
  CHECK(inequality_report("growing", NormKind::l2, levels_of({1.0, 3.0, 9.0})).status == CheckStatus::failed);
  CHECK(inequality_report("nan", NormKind::l2, levels_of({1.0, NAN})).status == CheckStatus::failed);
}

TEST_CASE("suite configuration") {
  const SuiteConfig c = suite_config_from_json(R"({"checks": ["gauss_disk"], "seed": 7, "tolerance": 1e-7})");
  CHECK(!c.all_checks);
  CHECK(c.checks == std::vector<std::string>{"gauss_disk"});
  CHECK(c.seed == 7);
  CHECK(c.criteria.tolerance == 1e-7);
  CHECK_THROWS_AS(suite_config_from_json("[1, 2]"), Error);
  CHECK_THROWS_AS(suite_config_from_json("{\"seed\": \"x\"}"), Error);
  CHECK_THROWS_AS(run_check("no_such_check"), Error);
}

TEST_CASE("suite: empty selection, broken metric and the full catalogue") {
  SuiteConfig empty;
  empty.all_checks = false;
  const auto none = run_suite(empty);
  CHECK(none.empty());
  CHECK(suite_passed(none));

  SuiteConfig broken;
  broken.broken_metric = true;
  for (const auto& r : run_suite(broken)) {
    INFO(r.check_name);
    CHECK(r.status == CheckStatus::invariant_violation);
  }

  const auto reports = run_suite(SuiteConfig{});
  CHECK(reports.size() == check_names().size());
  for (const auto& r : reports) {
    INFO(r.check_name << ": " << r.message);
    CHECK(r.status == CheckStatus::passed);
  }
  CHECK(suite_passed(reports));
  CHECK(suite_json(reports).find("\"check_name\"") != std::string::npos);

  // Deterministic for a fixed seed.
  SuiteConfig one;
  one.all_checks = false;
  one.checks = {"trace_plasma"};
  one.seed = 3;
  CHECK(run_suite(one)[0].residual == run_suite(one)[0].residual);
}
