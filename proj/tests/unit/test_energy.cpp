#include <doctest.h>

#include "mhd2d/energy.hpp"
#include "mhd2d/errors.hpp"
#include "mhd2d/vacuum.hpp"

#include <json.hpp>

#include <cmath>

using namespace mhd2d;

namespace {

constexpr double pi = 3.14159265358979323846;

ChartPtr unit_disk(int nr, int na) {
  auto g = SpectralGrid::disk(nr, na);
  const Field r = g->radial_field(), p = g->angular_field();
  return std::make_shared<const Chart>(g, r * p.cos(), r * p.sin());
}

EnergyFields fields(const ChartPtr& d, const Vec2Field& v, const Vec2Field& H, const Field& q, double mu) {
  return EnergyFields{*d, v, H, q, mu, std::nullopt, {}};
}

EnergyReport report_at(double t, double total, double ecal, bool violated = false) {
  EnergyReport r;
  r.t = t;
  r.E = {total, 0.0, 0.0, 0.0};
  r.E_cal = ecal;
  r.taylor_violated = violated;
  return r;
}

}  // namespace

TEST_CASE("physical energy") {
  const ChartPtr d = unit_disk(16, 32);
  const Field zero = d->grid().zeros();
  CHECK(e0(fields(d, {zero, zero}, {zero, zero}, zero, 1.0)) == 0.0);
  CHECK(e0(fields(d, {d->grid().constant(1.0), zero}, {zero, zero}, zero, 1.0)) ==
        doctest::Approx(pi / 2).epsilon(1e-13));

  const Eigen::ArrayXd phi = Eigen::ArrayXd::LinSpaced(32, 0.0, 2 * pi * 31 / 32);
  const Chart vac = annulus_chart(24, phi.cos(), phi.sin(), 2 * phi.cos(), 2 * phi.sin());
  const Field r2 = vac.x1().square() + vac.x2().square();
  EnergyFields f = fields(d, {zero, zero}, {zero, zero}, zero, 1.0);
  f.vacuum = vac;
  f.H_vacuum = {-vac.x2() / r2, vac.x1() / r2};
  CHECK(e0(f) == doctest::Approx(pi * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("cometric form") {
  const ChartPtr d = unit_disk(24, 32);
  const ClosedCurve gamma = interface_curve(*d);
  const InterfaceGeometry geom = compute_geometry(gamma);
  const CutoffCometric q = cutoff_cometric(gamma, geom, d->x1(), d->x2(), 0.5 * geom.iota0);
  // A generic rank-2 tensor.
  TensorField a(2, Domain::plasma, 24, 32);
  a[0] = d->x1() + 1.0;
  a[1] = d->x2().square();
  a[2] = d->x1() * d->x2();
  a[3] = d->x1().cos();
  const Field Qaa = cometric_product(a, a, q.q11, q.q12, q.q22, 2);
  Field norm = Field::Zero(24, 32);
  for (int k = 0; k < 4; ++k) norm += a[k].square();
  CHECK((Qaa <= norm * (1 + 1e-12) + 1e-15).all());
  CHECK((Qaa >= -1e-15).all());
  // On Gamma: Q(a, a) = (a(t, t))^2.
  double worst = 0.0;
  for (int j = 0; j < 32; ++j) {
    const double t1 = geom.t1(j), t2 = geom.t2(j);
    const double att = a[0](0, j) * t1 * t1 + (a[1](0, j) + a[2](0, j)) * t1 * t2 + a[3](0, j) * t2 * t2;
    worst = std::max(worst, std::abs(Qaa(0, j) - att * att));
  }
  CHECK(worst < 1e-10);
  // Where eta vanishes Q is the full norm.
  const auto deep = (q.eta == 0.0);
  CHECK(deep.any());
  CHECK(((Qaa - norm).abs() < 1e-12 || !deep).all());
}

TEST_CASE("higher energies") {
  const double mu = 1.5;
  // The cut-off eta has steep C-infinity transitions; its quadrature reaches
  // 1e-8 relative accuracy near 128 radial nodes.
  const ChartPtr d = unit_disk(128, 32);
  const Chart& c = *d;
  const Field zero = c.grid().zeros();
  const Field r2 = c.x1().square() + c.x2().square();

  EnergyOptions opts;
  const ClosedCurve gamma = interface_curve(c);
  const InterfaceGeometry geom = compute_geometry(gamma);

  SUBCASE("zero and uniform fields") {
    for (const auto& f : {fields(d, {zero, zero}, {zero, zero}, zero, mu),
                          fields(d, {c.grid().constant(0.3), c.grid().constant(-1.0)}, {zero, zero}, zero, mu)}) {
      const WeightedForm form = weighted_form(f, gamma, geom, opts);
      // round-off floor of repeated spectral derivatives at 128 radial nodes
      for (int r = 1; r <= 3; ++r) CHECK(std::abs(e_r(f, r, form).value) < 1e-8);
    }
  }

  SUBCASE("Z-pinch") {
    const EnergyFields f = fields(d, {zero, zero}, {-c.x2(), c.x1()}, mu * (1.0 - r2) / 2, mu);
    const WeightedForm form = weighted_form(f, gamma, geom, opts);
    REQUIRE(form.weight_defined);
    // Independent radial quadrature of int eta^2 over the disk.
    const double d0 = opts.d0_ratio * geom.iota0;
    const int n = 2000000;
    double eta2 = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double r = static_cast<double>(k) / n;
      const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      const double e = cutoff_eta(1.0 - r, d0);
      eta2 += w * e * e * 2 * pi * r;
    }
    eta2 /= 3.0 * n;
    const EnergyTerm e1 = e_r(f, 1, form);
    CHECK(e1.value == doctest::Approx(4 * pi * mu + mu * (2 * pi - eta2)).epsilon(1e-8));
    CHECK(e1.curl == doctest::Approx(4 * pi * mu).epsilon(1e-10));
    CHECK(e1.boundary == 0.0);
    const EnergyTerm e2 = e_r(f, 2, form);
    CHECK(e2.value == doctest::Approx(2 * pi * mu).epsilon(1e-9));
    CHECK(e2.boundary == doctest::Approx(2 * pi * mu).epsilon(1e-10));
    const EnergyTerm e3 = e_r(f, 3, form);
    MESSAGE("Z-pinch E3 noise floor: " << e3.value);
    CHECK(e3.value < 1e-6);

    // The first-order energy carries no boundary term whatever the weight.
    WeightedForm other = form;
    other.weight = Eigen::ArrayXd::Constant(form.weight.size(), 123.0);
    CHECK(e_r(f, 1, other).value == e1.value);
    CHECK(e_r(f, 2, other).value != e2.value);

    const Bounds b = track_bounds(f, geom, form, 0.0);
    CHECK(b.K_cal == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(b.E_cal == doctest::Approx(1 / mu).epsilon(1e-9));
    CHECK_FALSE(b.L_complete);
    const PressureHistory prev{f.q_plus, -0.1};
    const Bounds b2 = track_bounds(f, geom, form, 0.0, &prev);
    CHECK(b2.L_complete);
    CHECK(b2.L == doctest::Approx(mu * std::sqrt(2.0)).epsilon(1e-7));
    CHECK(b2.M == doctest::Approx(mu + std::sqrt(2.0)).epsilon(1e-7));
  }

  SUBCASE("sign violation omits the boundary term") {
    const EnergyFields f = fields(d, {zero, zero}, {zero, zero}, zero, mu);
    const WeightedForm form = weighted_form(f, gamma, geom, opts);
    CHECK_FALSE(form.weight_defined);
    CHECK(e_r(f, 2, form).boundary_omitted);
    CHECK_FALSE(e_r(f, 1, form).boundary_omitted);
    const EnergyReport r = energy_report(f, 0.0);
    CHECK(r.E_cal_infinite);
    CHECK(r.taylor_violated);
  }
}

TEST_CASE("theorem monitor") {
  std::vector<EnergyReport> steady{report_at(0, 1, 1), report_at(0.5, 1, 1), report_at(1, 1, 1)};
  TheoremMonitor m = theorem1_monitor(steady, 1.0);
  CHECK(m.T_obs == 1.0);
  CHECK(m.reached_horizon);
  CHECK(m.ecal_within_bound);

  std::vector<EnergyReport> growing{report_at(0, 1, 1), report_at(0.5, 1.9, 1), report_at(1, 2.1, 1)};
  m = theorem1_monitor(growing, 1.0);
  CHECK(m.T_obs == 0.5);
  CHECK_FALSE(m.reached_horizon);

  std::vector<EnergyReport> bad{report_at(0, 1, 1), report_at(0.5, 1, 1, true)};
  m = theorem1_monitor(bad, 0.5);
  CHECK(m.sign_violated);
  CHECK_THROWS_AS(theorem1_monitor({report_at(0, 1, 1)}, 1.0), Error);
}

TEST_CASE("report output") {
  EnergyReport r = report_at(0.25, 2.0, std::numeric_limits<double>::infinity());
  r.E_cal_infinite = true;
  r.flags = {"Ecal_infinite"};
  const auto j = nlohmann::json::parse(energy_report_json(r));
  CHECK(j["t"] == 0.25);
  CHECK(j["E0"] == 2.0);
  CHECK(j["Ecal"].is_null());
  CHECK(j["flags"][0] == "Ecal_infinite");
  CHECK(energy_csv_header() == "t,E0,E1,E2,E3,Kcal,Ecal,taylor_margin");
  CHECK(energy_csv_row(r).rfind("0.25,2,0,0,0,", 0) == 0);
}
