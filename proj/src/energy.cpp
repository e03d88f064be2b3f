#include "mhd2d/energy.hpp"

#include "mhd2d/errors.hpp"
#include "mhd2d/vacuum.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>

namespace mhd2d {

namespace {

constexpr double infinity = std::numeric_limits<double>::infinity();

// Contract index k (0-based, most significant first) of T with the symmetric
// matrix m (m11, m12, m22).
TensorField apply_index(const TensorField& T, int k, const Field& m11, const Field& m12, const Field& m22) {
  TensorField out(T.rank, T.domain, T.rows(), T.cols());
  const int bit = 1 << (T.rank - 1 - k);
  for (int flat = 0; flat < T.size(); ++flat) {
    const int i = (flat & bit) ? 1 : 0;
    const int base = flat & ~bit;
    const Field& mi0 = i == 0 ? m11 : m12;
    const Field& mi1 = i == 0 ? m12 : m22;
    out[flat] = mi0 * T[base] + mi1 * T[base | bit];
  }
  return out;
}

TensorField derivative(const Field& f, const Chart& c, int r) {
  return cartesian_derivative(TensorField::scalar(f, Domain::plasma), c, r);
}

TensorField derivative(const Vec2Field& w, const Chart& c, int r) {
  return cartesian_derivative(TensorField::vector(w[0], w[1], Domain::plasma), c, r);
}

// Tangential projection of a rank-r tensor given on one chart row.
double tangential_norm2(const TensorField& T, int row, const Eigen::ArrayXd& n1, const Eigen::ArrayXd& n2,
                        int node) {
  // gamma = t t^T with t = (-n2, n1): the projection contracts every index
  // with t, so |Pi T|^2 = (T(t,...,t))^2.
  const double t1 = -n2(node), t2 = n1(node);
  double s = 0.0;
  for (int flat = 0; flat < T.size(); ++flat) {
    double w = 1.0;
    for (int k = 0; k < T.rank; ++k) w *= ((flat >> k) & 1) ? t2 : t1;
    s += w * T[flat](row, node);
  }
  return s * s;
}

}  // namespace

EnergyFields energy_fields(const PlasmaState& plasma, const Chart* vacuum, const Vec2Field* H_vacuum) {
  const EulerianPlasma e = eulerian(plasma);
  EnergyFields f{e.chart, e.v, e.H, plasma.q_plus, plasma.mu, std::nullopt, {}};
  if (vacuum) {
    if (!H_vacuum) throw Error(ErrorKind::shape_error, "vacuum chart given without its field");
    f.vacuum = *vacuum;
    f.H_vacuum = *H_vacuum;
  }
  return f;
}

ClosedCurve interface_curve(const Chart& plasma) {
  return ClosedCurve(plasma.x1().row(0).transpose(), plasma.x2().row(0).transpose());
}

WeightedForm weighted_form(const EnergyFields& f, const ClosedCurve& gamma, const InterfaceGeometry& geom,
                           const EnergyOptions& options) {
  WeightedForm w;
  w.cometric = cutoff_cometric(gamma, geom, f.plasma.x1(), f.plasma.x2(), options.d0_ratio * geom.iota0);
  Field qm;
  if (f.vacuum) qm = magnetic_pressure(f.H_vacuum, f.mu);
  const TaylorSign ts = taylor_sign(f.plasma, f.q_plus, f.vacuum ? &*f.vacuum : nullptr, f.vacuum ? &qm : nullptr);
  w.grad_n_P = ts.grad_n_P;
  w.weight_defined = !ts.violated;
  w.weight = w.weight_defined ? Eigen::ArrayXd(-1.0 / ts.grad_n_P) : Eigen::ArrayXd::Zero(ts.grad_n_P.size());
  return w;
}

Field cometric_product(const TensorField& a, const TensorField& b, const Field& q11, const Field& q12,
                       const Field& q22, int n_q) {
  if (a.rank != b.rank || n_q > a.rank) throw Error(ErrorKind::shape_error, "cometric product rank mismatch");
  TensorField qa = a;
  for (int k = 0; k < n_q; ++k) qa = apply_index(qa, k, q11, q12, q22);
  Field s = Field::Zero(a.rows(), a.cols());
  for (int flat = 0; flat < a.size(); ++flat) s += qa[flat] * b[flat];
  return s;
}

double e0(const EnergyFields& f) {
  const Field plasma = 0.5 * (f.v[0].square() + f.v[1].square()) + 0.5 * f.mu * (f.H[0].square() + f.H[1].square());
  double e = f.plasma.integrate(plasma);
  if (f.vacuum) e += f.vacuum->integrate(magnetic_pressure(f.H_vacuum, f.mu));
  return e;
}

EnergyTerm e_r(const EnergyFields& f, int r, const WeightedForm& form) {
  if (r < 1 || r > 3) throw Error(ErrorKind::configuration_error, "energy order must be 1, 2 or 3");
  const Chart& c = f.plasma;
  const CutoffCometric& q = form.cometric;
  EnergyTerm e;
  const TensorField dv = derivative(f.v, c, r);
  const TensorField dH = derivative(f.H, c, r);
  e.interior = c.integrate(cometric_product(dv, dv, q.q11, q.q12, q.q22, r)) +
               f.mu * c.integrate(cometric_product(dH, dH, q.q11, q.q12, q.q22, r));
  // grad-perp . w = d2 w1 - d1 w2 = -curl w
  const Field cv = c.curl(f.v), cH = c.curl(f.H);
  const TensorField dcv = derivative(cv, c, r - 1), dcH = derivative(cH, c, r - 1);
  Field curl = Field::Zero(c.grid().n_radial(), c.grid().n_angular());
  for (int k = 0; k < dcv.size(); ++k) curl += dcv[k].square() + f.mu * dcH[k].square();
  e.curl = c.integrate(curl);
  if (r >= 2) {
    if (!form.weight_defined) {
      e.boundary_omitted = true;
    } else {
      const TensorField dp = derivative(f.q_plus, c, r);
      std::optional<TensorField> dm;
      if (f.vacuum) dm = cartesian_derivative(TensorField::scalar(magnetic_pressure(f.H_vacuum, f.mu), Domain::vacuum),
                                              *f.vacuum, r);
      const BoundaryRow b = c.boundary_row(0);
      Eigen::ArrayXd integrand(b.n1.size());
      for (Eigen::Index j = 0; j < integrand.size(); ++j) {
        TensorField jump = dp;
        if (dm)
          for (int k = 0; k < jump.size(); ++k) jump[k](0, j) -= (*dm)[k](0, j);
        integrand(j) = tangential_norm2(jump, 0, b.n1, b.n2, static_cast<int>(j)) * form.weight(j);
      }
      e.boundary = c.line_integral(0, integrand);
    }
  }
  e.value = e.interior + e.curl + e.boundary;
  return e;
}

Bounds track_bounds(const EnergyFields& f, const InterfaceGeometry& geom, const WeightedForm& form, double t,
                    const PressureHistory* previous) {
  Bounds b;
  b.K_cal = std::max(geom.theta.abs().maxCoeff(), 1.0 / geom.iota0);
  if (form.weight_defined) {
    b.E_cal = (1.0 / form.grad_n_P.abs()).maxCoeff();
  } else {
    b.E_cal = infinity;
    b.E_cal_infinite = true;
  }
  const Chart& c = f.plasma;
  const Vec2Field gp = c.grad(f.q_plus);
  Field m = (gp[0].square() + gp[1].square()).sqrt();
  const TensorField dv = derivative(f.v, c, 1), dH = derivative(f.H, c, 1);
  Field nv = Field::Zero(m.rows(), m.cols()), nH = nv;
  for (int k = 0; k < 4; ++k) {
    nv += dv[k].square();
    nH += dH[k].square();
  }
  m += nv.sqrt() + nH.sqrt();
  b.M = m.maxCoeff();
  const TensorField hess = derivative(f.q_plus, c, 2);
  Eigen::ArrayXd l = Eigen::ArrayXd::Zero(c.grid().n_angular());
  for (int k = 0; k < 4; ++k) l += hess[k].row(0).transpose().square();
  l = l.sqrt();
  if (previous && t > previous->t) {
    const Field dtp = (f.q_plus - previous->q_plus) / (t - previous->t);
    const Vec2Field g = c.grad(dtp);
    const BoundaryRow row = c.boundary_row(0);
    l += (row.n1 * g[0].row(0).transpose() + row.n2 * g[1].row(0).transpose()).abs();
    b.L_complete = true;
  }
  b.L = l.maxCoeff();
  return b;
}

EnergyReport energy_report(const EnergyFields& f, double t, const EnergyOptions& options,
                           const PressureHistory* previous) {
  EnergyReport r;
  r.t = t;
  const ClosedCurve gamma = interface_curve(f.plasma);
  const InterfaceGeometry geom = compute_geometry(gamma, {options.epsilon1});
  const WeightedForm form = weighted_form(f, gamma, geom, options);
  r.E[0] = e0(f);
  for (int s = 1; s <= 3; ++s) {
    r.terms[s - 1] = e_r(f, s, form);
    r.E[s] = r.terms[s - 1].value;
    if (r.terms[s - 1].boundary_omitted) r.flags.push_back("E" + std::to_string(s) + "_boundary_omitted");
  }
  const Bounds b = track_bounds(f, geom, form, t, previous);
  r.K_cal = b.K_cal;
  r.E_cal = b.E_cal;
  r.E_cal_infinite = b.E_cal_infinite;
  r.M = b.M;
  r.L = b.L;
  r.L_complete = b.L_complete;
  if (!b.L_complete) r.flags.push_back("L_partial");
  r.taylor_margin = form.grad_n_P.size() ? -form.grad_n_P.maxCoeff() : 0.0;
  r.taylor_violated = !form.weight_defined;
  if (r.taylor_violated) r.flags.push_back("taylor_sign_violated");
  if (r.E_cal_infinite) r.flags.push_back("Ecal_infinite");
  r.vol_omega = f.plasma.area();
  return r;
}

TheoremMonitor theorem1_monitor(const std::vector<EnergyReport>& reports, double horizon) {
  TheoremMonitor m;
  if (reports.size() < 2) throw Error(ErrorKind::insufficient_history, "the monitor needs at least two reports");
  for (const auto& r : reports)
    if (r.taylor_violated) m.sign_violated = true;
  if (m.sign_violated) return m;
  auto total = [](const EnergyReport& r) { return r.E[0] + r.E[1] + r.E[2] + r.E[3]; };
  const double bound = 2.0 * total(reports.front());
  const double ebound = 2.0 * reports.front().E_cal;
  m.ecal_within_bound = true;
  const double t0 = reports.front().t;
  for (const auto& r : reports) {
    if (!(total(r) <= bound)) break;
    m.T_obs = r.t - t0;
    if (r.E_cal_infinite || !(r.E_cal <= ebound)) m.ecal_within_bound = false;
  }
  m.reached_horizon = m.T_obs >= horizon * (1.0 - 1e-12);
  return m;
}

std::string energy_report_json(const EnergyReport& r) {
  auto num = [](double x) -> nlohmann::json { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["t"] = r.t;
  for (int s = 0; s < 4; ++s) j["E" + std::to_string(s)] = num(r.E[s]);
  j["Kcal"] = num(r.K_cal);
  j["Ecal"] = num(r.E_cal);
  j["M"] = num(r.M);
  j["L"] = num(r.L);
  j["taylor_margin"] = num(r.taylor_margin);
  j["vol_omega"] = r.vol_omega;
  j["flags"] = r.flags;
  return j.dump();
}

std::string energy_csv_header() { return "t,E0,E1,E2,E3,Kcal,Ecal,taylor_margin"; }

std::string energy_csv_row(const EnergyReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.t, r.E[0], r.E[1], r.E[2],
                r.E[3], r.K_cal, r.E_cal, r.taylor_margin);
  return buf;
}

}  // namespace mhd2d
