#include "mhd2d/verifier.hpp"

#include "mhd2d/errors.hpp"
#include "mhd2d/geometry.hpp"
#include "mhd2d/plasma.hpp"
#include "mhd2d/vacuum.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace mhd2d {

namespace {

using Array = Eigen::ArrayXd;

Array row_of(const Field& f, int row) { return f.row(row).transpose(); }
Field as_row(const Array& a) { return Field(a.transpose()); }

// Contract every index of T, restricted to one row, with the given per-node
// vectors (one per index).
Array along(const TensorField& T, int row, const std::vector<std::array<Array, 2>>& vecs) {
  Array sum = Array::Zero(T.cols());
  for (int flat = 0; flat < T.size(); ++flat) {
    const auto idx = T.indices(flat);
    Array term = row_of(T[flat], row);
    for (int k = 0; k < T.rank; ++k) term *= vecs[k][idx[k]];
    sum += term;
  }
  return sum;
}

Field frobenius_squared(const TensorField& T) {
  Field s = Field::Zero(T.rows(), T.cols());
  for (const auto& c : T.comp) s += c.square();
  return s;
}

std::vector<int> interior_rows(const SpectralGrid& g) {
  const auto b = g.boundary_rows();
  std::vector<int> rows;
  for (int i = 0; i < g.n_radial(); ++i)
    if (std::find(b.begin(), b.end(), i) == b.end()) rows.push_back(i);
  return rows;
}

}  // namespace

// ---- single-resolution residuals -------------------------------------------

GaussSides gauss_sides(const MetricState& metric, const Vec2Field& F) {
  const Chart& y = *metric.labels();
  const Field& vol = metric.volume();
  // nabla_a F^a dmu_g = d_a (sqrt g F^a) dy
  const double interior = y.integrate(y.partial(vol * F[0], 0) + y.partial(vol * F[1], 1));
  double boundary = 0.0;
  for (int row : y.grid().boundary_rows()) {
    const double sign = (y.grid().kind() == GridKind::annulus && row == 0) ? -1.0 : 1.0;
    const BoundaryRow b = y.boundary_row(row);
    auto g = [&](int a, int c) { return row_of(metric.g(a, c), row); };
    auto gi = [&](int a, int c) { return row_of(metric.ginv(a, c), row); };
    // Unit conormal N_a = n_a / |n|_g and the induced length |t|_g.
    const Array n_len = (gi(0, 0) * b.n1.square() + 2.0 * gi(0, 1) * b.n1 * b.n2 + gi(1, 1) * b.n2.square()).sqrt();
    const Array t_len = (g(0, 0) * b.t1.square() + 2.0 * g(0, 1) * b.t1 * b.t2 + g(1, 1) * b.t2.square()).sqrt();
    const Array flux = (b.n1 * row_of(F[0], row) + b.n2 * row_of(F[1], row)) / n_len;
    boundary += sign * (b.line_weight * flux * t_len).sum();
  }
  return {interior, boundary};
}

double gauss_residual(const MetricState& metric, const Vec2Field& F) {
  const GaussSides s = gauss_sides(metric, F);
  return std::abs(s.interior - s.boundary);
}

ProjectionResidual projection_identity_residual(const Chart& chart, const Field& q) {
  const int m = chart.grid().n_angular();
  const Eigen::MatrixXd D = fourier_diff(m);
  auto dphi = [&](const Array& f) -> Array { return (D * f.matrix()).array(); };
  const BoundaryRow b = chart.boundary_row(0);
  auto ds = [&](const Array& f) -> Array { return dphi(f) / b.speed; };
  const Array dx1 = dphi(b.x1), dx2 = dphi(b.x2);
  const Array kappa = (dx1 * dphi(dx2) - dx2 * dphi(dx1)) / b.speed.cube();
  const std::array<Array, 2> t{b.t1, b.t2}, n{b.n1, b.n2};

  const TensorField Q = TensorField::scalar(q, Domain::plasma);
  const TensorField d1 = cartesian_derivative(Q, chart, 1);
  const TensorField d2 = cartesian_derivative(d1, chart, 1);
  const TensorField d3 = cartesian_derivative(d2, chart, 1);

  const Array f = row_of(q, 0);
  const Array f1 = ds(f), f2 = ds(f1), f3 = ds(f2);
  const Array qn = along(d1, 0, {n});
  const Array qn_s = ds(qn);
  const Array kappa_s = ds(kappa);

  ProjectionResidual r;
  r.second = (along(d2, 0, {t, t}) - (f2 + kappa * qn)).abs().maxCoeff();
  r.third = (along(d3, 0, {t, t, t}) - (f3 - 2.0 * kappa.square() * f1 + kappa_s * qn + 3.0 * kappa * qn_s))
                .abs()
                .maxCoeff();
  return r;
}

BoundaryEvolutionResidual boundary_evolution_residual(const std::vector<FlowMap>& maps, const Vec2Field& v) {
  if (maps.size() < 2)
    throw Error(ErrorKind::insufficient_history, "boundary evolution needs at least two time levels");
  if (maps.size() > 2 && maps.size() % 2 == 0)
    throw Error(ErrorKind::shape_error, "boundary evolution uses two levels or an odd count");
  std::vector<TensorField> normals, lengths;
  std::vector<double> times;
  for (const auto& map : maps) {
    const Chart c = map.current();
    const BoundaryRow b = c.boundary_row(0);
    const auto F = map.jacobian();
    TensorField N(1, Domain::interface, 1, b.n1.size());
    for (int a = 0; a < 2; ++a) N[a] = as_row(row_of(F[a], 0) * b.n1 + row_of(F[2 + a], 0) * b.n2);
    normals.push_back(N);
    lengths.push_back(TensorField::scalar(as_row(b.speed), Domain::interface));
    times.push_back(map.time());
  }
  const TensorField dN = material_derivative_field(normals, times);
  const TensorField dL = material_derivative_field(lengths, times);

  TensorField N_eval, L_eval;
  std::optional<Chart> eval;
  if (maps.size() > 2) {
    const std::size_t mid = maps.size() / 2;
    N_eval = normals[mid];
    L_eval = lengths[mid];
    eval.emplace(maps[mid].current());
  } else {
    N_eval = 0.5 * (normals[0] + normals[1]);
    L_eval = 0.5 * (lengths[0] + lengths[1]);
    eval.emplace(maps[0].labels()->grid_ptr(), 0.5 * (maps[0].x1() + maps[1].x1()),
                 0.5 * (maps[0].x2() + maps[1].x2()));
  }
  const BoundaryRow b = eval->boundary_row(0);
  const std::array<Array, 2> n{b.n1, b.n2};
  Array h_nn = Array::Zero(b.n1.size()), div = Array::Zero(b.n1.size());
  for (int j = 0; j < 2; ++j) {
    const Vec2Field dv = eval->grad(v[j]);  // d_i v_j
    div += row_of(dv[j], 0);
    for (int i = 0; i < 2; ++i) h_nn += n[i] * n[j] * row_of(dv[i], 0);
  }
  BoundaryEvolutionResidual r;
  for (int a = 0; a < 2; ++a)
    r.normal = std::max(r.normal, (row_of(dN[a], 0) - h_nn * row_of(N_eval[a], 0)).abs().maxCoeff());
  r.length = (row_of(dL[0], 0) - (div - h_nn) * row_of(L_eval[0], 0)).abs().maxCoeff();
  return r;
}

double divcurl_constant(const Chart& chart, const Vec2Field& f, int r, double floor) {
  if (r < 0 || r > 1) throw Error(ErrorKind::configuration_error, "div-curl check supports r = 0 or 1");
  const TensorField fv = TensorField::vector(f[0], f[1], Domain::plasma);
  const TensorField w = r == 0 ? fv : cartesian_derivative(fv, chart, r);
  const TensorField dw = cartesian_derivative(w, chart, 1);  // (c, A, a)
  const double scale = max_abs(frobenius_squared(dw));
  double c_fit = 0.0;
  for (int row : chart.grid().boundary_rows()) {
    const BoundaryRow b = chart.boundary_row(row);
    const std::array<Array, 2> t{b.t1, b.t2};
    const Array grad2 = row_of(frobenius_squared(dw), row);
    Array tangential = Array::Zero(b.t1.size());
    for (int a = 0; a < 2; ++a) {
      Array s = Array::Zero(b.t1.size());
      for (int flat = 0; flat < dw.size(); ++flat) {
        const auto idx = dw.indices(flat);
        if (idx.back() != a) continue;
        Array term = row_of(dw[flat], row);
        for (int k = 0; k + 1 < dw.rank; ++k) term *= t[idx[k]];
        s += term;
      }
      tangential += s.square();
    }
    Array div2 = Array::Zero(b.t1.size()), curl2 = Array::Zero(b.t1.size());
    for (int A = 0; A < (r == 0 ? 1 : 2); ++A) {
      auto comp = [&](int c, int a) -> Array {
        return r == 0 ? row_of(dw.at({c, a}), row) : row_of(dw.at({c, A, a}), row);
      };
      div2 += (comp(0, 0) + comp(1, 1)).square();
      curl2 += 2.0 * (comp(0, 1) - comp(1, 0)).square();
    }
    const Array denom = (tangential + div2 + curl2).max(floor * std::max(scale, 1e-300));
    c_fit = std::max(c_fit, (grad2 / denom).maxCoeff());
  }
  return c_fit;
}

double pressure_identity_residual(const Chart& chart, const Vec2Field& v, const Vec2Field& H, double mu,
                                  const Field& q) {
  const PressureProblem p = pressure_problem(chart, v, H, mu, Array::Zero(chart.grid().n_angular()));
  const Field r = chart.laplacian(q) - p.rhs;
  double out = 0.0;
  for (int row : interior_rows(chart.grid())) out = std::max(out, r.row(row).abs().maxCoeff());
  return out;
}

// ---- fitted constants ---------------------------------------------------------

double l2_norm(const Chart& chart, const TensorField& T) {
  return std::sqrt(std::max(0.0, chart.integrate(frobenius_squared(T))));
}

double boundary_norm(const Chart& chart, const TensorField& T, int p) {
  const Field s = frobenius_squared(T);
  double sum = 0.0;
  for (int row : chart.grid().boundary_rows()) {
    const Array v = row_of(s, row);
    sum += chart.line_integral(row, p == 1 ? Array(v.sqrt()) : v);
  }
  return p == 1 ? sum : std::sqrt(sum);
}

double geometric_bound(const Chart& chart) {
  double K = 0.0;
  for (int row : chart.grid().boundary_rows()) {
    const ClosedCurve curve(row_of(chart.x1(), row), row_of(chart.x2(), row));
    K = std::max(K, compute_geometry(curve).K);
  }
  return K;
}

std::array<double, 3> vacuum_derivative_ratios(const Chart& vacuum, const Vec2Field& H, double K) {
  std::array<double, 3> out{};
  TensorField T = TensorField::vector(H[0], H[1], Domain::vacuum);
  double prev = l2_norm(vacuum, T);
  for (int r = 0; r < 3; ++r) {
    T = cartesian_derivative(T, vacuum, 1);
    const double next = l2_norm(vacuum, T);
    out[r] = next / (K * prev);
    prev = next;
  }
  return out;
}

double vacuum_boundary_ratio(const Chart& vacuum, const Vec2Field& H, double K, int r) {
  const TensorField T = cartesian_derivative(TensorField::vector(H[0], H[1], Domain::vacuum), vacuum, r);
  const double inside = l2_norm(vacuum, T);
  const double edge = boundary_norm(vacuum, T, 2);
  return edge * edge / (K * inside * inside);
}

double trace_constant(const Chart& chart, const TensorField& alpha) {
  auto l1 = [&](const TensorField& T) { return chart.integrate(frobenius_squared(T).sqrt()); };
  return boundary_norm(chart, alpha, 1) / (l1(cartesian_derivative(alpha, chart, 1)) + l1(alpha));
}

double elliptic_constant(const Chart& chart, const Field& q, int r) {
  if (r < 2 || r > 3) throw Error(ErrorKind::configuration_error, "elliptic estimate check supports r = 2 or 3");
  const TensorField Q = TensorField::scalar(q, Domain::plasma);
  const TensorField lower = cartesian_derivative(Q, chart, r - 1);
  const TensorField top = cartesian_derivative(lower, chart, 1);
  const BoundaryRow b = chart.boundary_row(0);
  const std::array<Array, 2> t{b.t1, b.t2};
  auto gamma_l2 = [&](const Array& v2) { return std::sqrt(chart.line_integral(0, v2)); };
  const double lhs = gamma_l2(row_of(frobenius_squared(lower), 0)) + l2_norm(chart, top);
  const std::vector<std::array<Array, 2>> ts(r, t);
  double rhs = gamma_l2(along(top, 0, ts).square());
  const TensorField lap = TensorField::scalar(chart.laplacian(q), Domain::plasma);
  rhs += l2_norm(chart, lap);
  if (r == 3) rhs += l2_norm(chart, cartesian_derivative(lap, chart, 1));
  return lhs / rhs;
}

// ---- reports ------------------------------------------------------------------

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::passed: return "passed";
    case CheckStatus::failed: return "failed";
    case CheckStatus::invariant_violation: return "invariant-violation";
  }
  return "unknown";
}

ResidualReport identity_report(const std::string& name, NormKind norm, std::vector<LevelResult> levels,
                               const Criteria& criteria, double min_order) {
  if (min_order < 0.0) min_order = criteria.min_order;
  ResidualReport rep;
  rep.check_name = name;
  rep.kind = CheckKind::identity;
  rep.norm_used = norm;
  rep.levels = std::move(levels);
  if (rep.levels.empty()) {
    rep.status = CheckStatus::failed;
    rep.message = "no levels";
    return rep;
  }
  rep.residual = rep.levels.back().value;
  rep.resolution = rep.levels.back().resolution;
  rep.at_floor = rep.residual <= criteria.floor;
  for (std::size_t i = 0; i + 1 < rep.levels.size(); ++i) {
    const auto& a = rep.levels[i];
    const auto& b = rep.levels[i + 1];
    if (b.value > a.value) rep.unreliable = true;
    if (b.value <= criteria.floor || a.value <= criteria.floor) continue;
    const double p = std::log(a.value / b.value) / std::log(a.h / b.h);
    rep.convergence_order = rep.convergence_order ? std::min(*rep.convergence_order, p) : p;
  }
  std::ostringstream msg;
  bool ok = std::isfinite(rep.residual) && rep.residual <= criteria.tolerance;
  if (!ok) msg << "finest residual above " << criteria.tolerance << "; ";
  if (rep.convergence_order) {
    if (*rep.convergence_order < min_order - criteria.order_slack) {
      ok = false;
      msg << "order below " << min_order << "; ";
    }
  } else if (rep.levels.size() >= 2 && !rep.at_floor) {
    ok = false;
    msg << "no measurable order; ";
  }
  if (rep.at_floor && !rep.convergence_order) msg << "residual at roundoff, order n/a; ";
  if (rep.unreliable) msg << "non-monotone residuals, order unreliable; ";
  rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
  rep.message = msg.str();
  return rep;
}

ResidualReport inequality_report(const std::string& name, NormKind norm, std::vector<LevelResult> levels,
                                 const Criteria& criteria) {
  ResidualReport rep;
  rep.check_name = name;
  rep.kind = CheckKind::inequality;
  rep.norm_used = norm;
  rep.levels = std::move(levels);
  if (rep.levels.empty()) {
    rep.status = CheckStatus::failed;
    rep.message = "no levels";
    return rep;
  }
  rep.residual = rep.levels.back().value;
  rep.resolution = rep.levels.back().resolution;
  bool ok = true;
  std::ostringstream msg;
  for (const auto& l : rep.levels)
    if (!std::isfinite(l.value) || l.value < 0.0) ok = false;
  if (!ok) msg << "fitted constant not finite; ";
  for (std::size_t i = 0; i + 1 < rep.levels.size(); ++i) {
    if (rep.levels[i].value <= 0.0) continue;
    const double g = rep.levels[i + 1].value / rep.levels[i].value;
    rep.growth = rep.growth ? std::max(*rep.growth, g) : g;
  }
  if (rep.growth && !(*rep.growth < criteria.max_growth)) {
    ok = false;
    msg << "fitted constant grows by " << *rep.growth << " under refinement; ";
  }
  rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
  rep.message = msg.str();
  return rep;
}

// ---- the check catalogue --------------------------------------------------------

namespace {

using std::numbers::pi;

std::string grid_label(int nr, int na) { return std::to_string(nr) + "x" + std::to_string(na); }

// Deterministic uniform draws (independent of the standard library's
// distribution implementations).
double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct Wave {
  double k1, k2, phase, amplitude;
};

std::vector<Wave> random_waves(std::mt19937_64& rng, int count, double kmax) {
  std::vector<Wave> w;
  for (int i = 0; i < count; ++i) {
    const double k = uniform(rng, 0.5, kmax), a = uniform(rng, 0.0, 2.0 * pi);
    w.push_back({k * std::cos(a), k * std::sin(a), uniform(rng, 0.0, 2.0 * pi), uniform(rng, 0.2, 1.0)});
  }
  return w;
}

Field eval_waves(const std::vector<Wave>& waves, const Field& x1, const Field& x2) {
  Field f = Field::Zero(x1.rows(), x1.cols());
  for (const auto& w : waves) f += w.amplitude * (w.k1 * x1 + w.k2 * x2 + w.phase).sin();
  return f;
}

// A smooth compressible test flow x = y + t a(y) + t^2 b(y).
constexpr double flow_time = 0.3;
Vec2Field flow_a(const Field& y1, const Field& y2) { return {0.3 * y2.sin(), 0.2 * y1.sin() + 0.1 * y1 * y2}; }
Vec2Field flow_b(const Field& y1, const Field& y2) { return {0.1 * y1 * y2, -0.05 * y1.square()}; }

FlowMap flow_map(const ChartPtr& labels, double t) {
  const Field& y1 = labels->x1();
  const Field& y2 = labels->x2();
  const auto a = flow_a(y1, y2), b = flow_b(y1, y2);
  return FlowMap(labels, Domain::plasma, y1 + t * a[0] + t * t * b[0], y2 + t * a[1] + t * t * b[1], t);
}

Vec2Field flow_velocity(const ChartPtr& labels, double t) {
  const auto a = flow_a(labels->x1(), labels->x2()), b = flow_b(labels->x1(), labels->x2());
  return {a[0] + 2.0 * t * b[0], a[1] + 2.0 * t * b[1]};
}

// Eulerian test scalar and covector.
Field test_scalar(const Field& x1, const Field& x2) { return (x1 + 0.3).sin() * (2.0 * x2).cos() + 0.5 * x1 * x2; }
Vec2Field test_covector(const Field& x1, const Field& x2) { return {x2.cos() + x1.square(), x1.sin() * x2}; }

// Pulled-back metric from the map Jacobian; the four components are formed
// independently so that a corrupted (non-symmetric) metric is detected.
MetricState checked_metric(const FlowMap& map, const SuiteConfig& cfg) {
  const auto F = map.jacobian();
  const Field g11 = F[0] * F[0] + F[2] * F[2];
  const Field g12 = F[0] * F[1] + F[2] * F[3];
  Field g21 = F[1] * F[0] + F[3] * F[2];
  const Field g22 = F[1] * F[1] + F[3] * F[3];
  if (cfg.broken_metric) g21 += 0.01 * (1.0 + map.labels()->x1());
  const double scale = std::max({max_abs(g11), max_abs(g22), 1.0});
  if (max_abs(g12 - g21) > 1e-12 * scale) throw Error(ErrorKind::geometry_failure, "metric is not symmetric");
  return MetricState::from_components(map.labels(), g11, g12, g22);
}

// The metric of a chart itself (identity map), validated the same way.
MetricState chart_metric(const ChartPtr& chart, const SuiteConfig& cfg) {
  return checked_metric(FlowMap(chart, Domain::plasma), cfg);
}

ChartPtr disk_labels(int nr) { return std::make_shared<const Chart>(disk_chart(SpectralGrid::disk(nr, 2 * nr))); }

constexpr double standard_amplitude = 0.05;
constexpr int standard_mode = 3;
constexpr double standard_wall = 2.0;

ChartPtr perturbed_labels(int nr) {
  return std::make_shared<const Chart>(
      perturbed_disk_chart(SpectralGrid::disk(nr, 2 * nr), standard_amplitude, standard_mode));
}

ChartPtr standard_vacuum(int nr, int na) {
  const Array phi = Array::LinSpaced(na, 0.0, 2.0 * pi * (na - 1) / na);
  const Field c = as_row(phi.cos()), s = as_row(phi.sin());
  const auto g = perturbed_disk_map(c, s, standard_amplitude, standard_mode);
  return std::make_shared<const Chart>(annulus_chart(nr, row_of(g[0], 0), row_of(g[1], 0),
                                                     standard_wall * phi.cos(), standard_wall * phi.sin()));
}

// ---- identities ----

// Exact flux of sqrt(g) F through the label boundary curves: a fine
// trapezoid rule on the analytic curves with the analytic Jacobian of the
// test flow at flow_time.
double reference_label_flux(bool annulus, const std::vector<Wave>& w1, const std::vector<Wave>& w2) {
  const int M = 4096;
  const double t = flow_time;
  const Array phi = Array::LinSpaced(M, 0.0, 2.0 * pi * (M - 1) / M);
  auto curve_flux = [&](const Array& y1, const Array& y2, const Array& dy1, const Array& dy2) {
    const Field Y1 = as_row(y1), Y2 = as_row(y2);
    const Array F1 = row_of(eval_waves(w1, Y1, Y2), 0), F2 = row_of(eval_waves(w2, Y1, Y2), 0);
    const Array j11 = 1.0 + t * t * 0.1 * y2, j12 = t * 0.3 * y2.cos() + t * t * 0.1 * y1;
    const Array j21 = t * (0.2 * y1.cos() + 0.1 * y2) - t * t * 0.1 * y1, j22 = 1.0 + t * 0.1 * y1;
    return ((j11 * j22 - j12 * j21) * (F1 * dy2 - F2 * dy1)).sum() * (2.0 * pi / M);
  };
  // Interface: z + a conj(z)^(m-1) on the unit circle.
  const double a = standard_amplitude;
  const int k = standard_mode - 1;
  const Array g1 = phi.cos() + a * (k * phi).cos(), g2 = phi.sin() - a * (k * phi).sin();
  const Array dg1 = -phi.sin() - a * k * (k * phi).sin(), dg2 = phi.cos() - a * k * (k * phi).cos();
  const double gamma = curve_flux(g1, g2, dg1, dg2);
  if (!annulus) return gamma;
  const double R = standard_wall;
  return curve_flux(R * phi.cos(), R * phi.sin(), -R * phi.sin(), R * phi.cos()) - gamma;
}

ResidualReport check_gauss(const std::string& name, bool annulus, const SuiteConfig& cfg) {
  std::vector<LevelResult> levels;
  std::mt19937_64 rng(cfg.seed);
  const auto w1 = random_waves(rng, 4, 3.0), w2 = random_waves(rng, 4, 3.0);
  const double exact = reference_label_flux(annulus, w1, w2);
  for (int nr : {6, 8, 10}) {
    const ChartPtr labels = annulus ? standard_vacuum(nr, 2 * nr) : perturbed_labels(nr);
    const MetricState m = checked_metric(flow_map(labels, flow_time), cfg);
    const Vec2Field F{eval_waves(w1, labels->x1(), labels->x2()), eval_waves(w2, labels->x1(), labels->x2())};
    // The discrete sides agree to roundoff (summation by parts); the volume
    // side is measured against the exact boundary flux.
    const GaussSides sides = gauss_sides(m, F);
    levels.push_back({grid_label(nr, 2 * nr), 1.0 / nr, std::abs(sides.interior - exact)});
  }
  return identity_report(name, NormKind::linf, levels, cfg.criteria, 4.0);
}

enum class Rate { metric, covector, laplacian, second, third };

// Five levels centred on the test time: the rate is differentiated to fourth
// order, so the truncation error dominates roundoff at moderate steps.
std::vector<double> stencil_times(double dt) {
  return {flow_time - 2.0 * dt, flow_time - dt, flow_time, flow_time + dt, flow_time + 2.0 * dt};
}

// One time-differencing level of a rate identity along the test flow.
double rate_residual(Rate which, const ChartPtr& labels, double dt, const SuiteConfig& cfg) {
  const std::vector<double> times = stencil_times(dt);
  const std::size_t mid = times.size() / 2;
  std::vector<FlowMap> maps;
  std::vector<MetricState> metrics;
  for (double t : times) {
    maps.push_back(flow_map(labels, t));
    metrics.push_back(checked_metric(maps.back(), cfg));
  }
  const MetricState& m = metrics[mid];
  const auto F = maps[mid].jacobian();
  const Vec2Field vel = flow_velocity(labels, flow_time);
  const TensorField u = pullback(TensorField::vector(vel[0], vel[1], Domain::plasma), F);
  const TensorField du = covariant_derivative(u, m);  // (a, b): nabla_a u_b
  const auto rows = labels->x1().rows(), cols = labels->x1().cols();
  TensorField h(2, Domain::plasma, rows, cols);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) h.at({a, b}) = 0.5 * (du.at({a, b}) + du.at({b, a}));
  const TensorField h_up = raise_all(h, m);
  const Field tr_h = m.ginv(0, 0) * h.at({0, 0}) + 2.0 * m.ginv(0, 1) * h.at({0, 1}) + m.ginv(1, 1) * h.at({1, 1});

  auto scalar_levels = [&]() {
    std::vector<TensorField> q;
    for (const auto& map : maps) q.push_back(TensorField::scalar(test_scalar(map.x1(), map.x2()), Domain::plasma));
    return q;
  };
  auto nabla = [](TensorField T, const MetricState& metric, int times_applied) {
    for (int k = 0; k < times_applied; ++k) T = covariant_derivative(T, metric);
    return T;
  };

  switch (which) {
    case Rate::metric: {
      std::vector<TensorField> g, gi, vol;
      for (const auto& mm : metrics) {
        TensorField a(2, Domain::plasma, rows, cols), b(2, Domain::plasma, rows, cols);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            a.at({i, j}) = mm.g(i, j);
            b.at({i, j}) = mm.ginv(i, j);
          }
        g.push_back(a);
        gi.push_back(b);
        vol.push_back(TensorField::scalar(mm.volume(), Domain::plasma));
      }
      const TensorField dg = material_derivative_field(g, times);
      const TensorField dgi = material_derivative_field(gi, times);
      const TensorField dvol = material_derivative_field(vol, times);
      double r = (dg - 2.0 * h).max_abs();
      r = std::max(r, (dgi + 2.0 * h_up).max_abs());
      return std::max(r, max_abs(dvol[0] - tr_h * m.volume()));
    }
    case Rate::covector: {
      std::vector<TensorField> T, dT;
      for (std::size_t k = 0; k < maps.size(); ++k) {
        const Vec2Field w = test_covector(maps[k].x1(), maps[k].x2());
        T.push_back(pullback(TensorField::vector(w[0], w[1], Domain::plasma), maps[k].jacobian()));
        dT.push_back(covariant_derivative(T.back(), metrics[k]));
      }
      const TensorField lhs =
          material_derivative_field(dT, times) - covariant_derivative(material_derivative_field(T, times), m);
      // -(nabla_b nabla_a u^d) T_d at (a, b)
      const TensorField ddu = nabla(u, m, 2);  // (b, a, e)
      TensorField rhs(2, Domain::plasma, rows, cols);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int d = 0; d < 2; ++d)
            for (int e = 0; e < 2; ++e) rhs.at({a, b}) -= m.ginv(d, e) * ddu.at({b, a, e}) * T[mid][d];
      return (lhs - rhs).max_abs();
    }
    case Rate::laplacian: {
      const auto q = scalar_levels();
      std::vector<TensorField> lap;
      for (std::size_t k = 0; k < maps.size(); ++k) {
        const TensorField hess = nabla(q[k], metrics[k], 2);
        Field s = Field::Zero(rows, cols);
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) s += metrics[k].ginv(a, b) * hess.at({a, b});
        lap.push_back(TensorField::scalar(s, Domain::plasma));
      }
      const TensorField Dq = material_derivative_field(q, times);
      const TensorField hess_Dq = nabla(Dq, m, 2);
      Field lap_Dq = Field::Zero(rows, cols);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) lap_Dq += m.ginv(a, b) * hess_Dq.at({a, b});
      const Field lhs = material_derivative_field(lap, times)[0] - lap_Dq;
      const TensorField hess = nabla(q[mid], m, 2);
      const TensorField dq = nabla(q[mid], m, 1);
      const TensorField ddu = nabla(u, m, 2);  // (a, b, e)
      Field rhs = Field::Zero(rows, cols);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          rhs -= 2.0 * h_up.at({a, b}) * hess.at({a, b});
          for (int e = 0; e < 2; ++e)
            for (int f = 0; f < 2; ++f) rhs -= m.ginv(a, b) * ddu.at({a, b, e}) * m.ginv(e, f) * dq[f];
        }
      return max_abs(lhs - rhs);
    }
    case Rate::second:
    case Rate::third: {
      const int r = which == Rate::second ? 2 : 3;
      const auto q = scalar_levels();
      std::vector<TensorField> dq;
      for (std::size_t k = 0; k < maps.size(); ++k) dq.push_back(nabla(q[k], metrics[k], r));
      const TensorField lhs =
          material_derivative_field(dq, times) - nabla(material_derivative_field(q, times), m, r);
      TensorField rhs(r, Domain::plasma, rows, cols);
      for (int s = 1; s <= r - 1; ++s) {
        const double binom = s + 1 == r ? 1.0 : 3.0;  // C(r, s+1) for r <= 3
        const TensorField term = symmetrize(dot_last(nabla(u, m, s + 1), nabla(q[mid], m, r - s), m));
        rhs = rhs - binom * term;
      }
      return (lhs - rhs).max_abs();
    }
  }
  return 0.0;
}

const std::vector<double> rate_steps{0.1, 0.05, 0.025};

ResidualReport check_rate(const std::string& name, Rate which, const SuiteConfig& cfg) {
  // Roundoff in the third derivative grows fast with resolution and is
  // amplified by the time differencing; a coarser grid keeps it below the
  // truncation error.
  const int nr = which == Rate::third ? 16 : 24;
  const ChartPtr labels = disk_labels(nr);
  std::vector<LevelResult> levels;
  for (double dt : rate_steps)
    levels.push_back({grid_label(nr, 2 * nr) + " dt=" + std::to_string(dt), dt, rate_residual(which, labels, dt, cfg)});
  return identity_report(name, NormKind::linf, levels, cfg.criteria);
}

ResidualReport check_boundary_rate(const std::string& name, bool normal, const SuiteConfig& cfg) {
  const int nr = 16;
  const ChartPtr labels = perturbed_labels(nr);
  std::vector<LevelResult> levels;
  for (double dt : rate_steps) {
    std::vector<FlowMap> maps;
    for (double t : stencil_times(dt)) {
      maps.push_back(flow_map(labels, t));
      checked_metric(maps.back(), cfg);
    }
    const auto r = boundary_evolution_residual(maps, flow_velocity(labels, flow_time));
    levels.push_back({grid_label(nr, 2 * nr) + " dt=" + std::to_string(dt), dt, normal ? r.normal : r.length});
  }
  return identity_report(name, NormKind::linf, levels, cfg.criteria);
}

// q = (1 - rho^2) s(x) vanishes on the interface of the perturbed disk.
Field interface_vanishing_scalar(const Chart& chart) {
  const Field rho = chart.grid().radial_field();
  return (1.0 - rho.square()) * ((0.7 * chart.x1()).exp() * (1.3 * chart.x2() + 0.2).cos());
}

ResidualReport check_projection(const std::string& name, bool third, const SuiteConfig& cfg) {
  // The third derivative resolves the boundary speed more slowly.
  const std::vector<int> sizes = third ? std::vector<int>{20, 24, 32} : std::vector<int>{8, 10, 12};
  std::vector<LevelResult> levels;
  for (int nr : sizes) {
    const ChartPtr chart = perturbed_labels(nr);
    chart_metric(chart, cfg);
    const auto r = projection_identity_residual(*chart, interface_vanishing_scalar(*chart));
    levels.push_back({grid_label(nr, 2 * nr), 1.0 / nr, third ? r.third : r.second});
  }
  return identity_report(name, NormKind::linf, levels, cfg.criteria);
}

// Manufactured divergence-free fields for the pressure checks.
Vec2Field mms_velocity(const Chart& c) {
  // perp grad of sin(x1) sin(x2) + x1^3 / 3
  return {c.x2().cos() * c.x1().sin(), -(c.x1().cos() * c.x2().sin() + c.x1().square())};
}
Vec2Field mms_field(const Chart& c) {
  // perp grad of exp(x1 / 2) cos(x2)
  return {-(0.5 * c.x1()).exp() * c.x2().sin(), -0.5 * (0.5 * c.x1()).exp() * c.x2().cos()};
}
Array mms_trace(const Chart& c) { return row_of(0.1 * c.x1().cos() + 0.05 * c.x2(), 0); }
constexpr double mms_mu = 0.7;

Field mms_pressure(const Chart& c) {
  const PressureProblem p = pressure_problem(c, mms_velocity(c), mms_field(c), mms_mu, mms_trace(c));
  return pressure_solve(p, c);
}

ResidualReport check_pressure_mms(const std::string& name, const SuiteConfig& cfg) {
  std::vector<LevelResult> levels;
  for (int nr : {8, 12, 16}) {
    const ChartPtr coarse = perturbed_labels(nr);
    chart_metric(coarse, cfg);
    const Field q = mms_pressure(*coarse);
    // Evaluate the identity off the collocation nodes: on a doubled grid.
    const ChartPtr fine = perturbed_labels(2 * nr);
    const Field qf = coarse->grid().resample(q, fine->grid());
    levels.push_back({grid_label(nr, 2 * nr), 1.0 / nr,
                      pressure_identity_residual(*fine, mms_velocity(*fine), mms_field(*fine), mms_mu, qf)});
  }
  return identity_report(name, NormKind::linf, levels, cfg.criteria);
}

ResidualReport check_pressure_equilibrium(const std::string& name, const SuiteConfig& cfg) {
  const int nr = 24;
  const ChartPtr c = disk_labels(nr);
  chart_metric(c, cfg);
  const double mu = 1.0;
  const Vec2Field v{c->grid().zeros(), c->grid().zeros()};
  const Vec2Field H{-c->x2(), c->x1()};
  const Field q = pressure_solve(pressure_problem(*c, v, H, mu, Array::Zero(2 * nr)), *c);
  Criteria crit = cfg.criteria;
  crit.tolerance = 1e-8;
  return identity_report(name, NormKind::linf,
                         {{grid_label(nr, 2 * nr), 1.0 / nr, pressure_identity_residual(*c, v, H, mu, q)}}, crit);
}

// ---- inequalities ----

const std::vector<int> estimate_levels{12, 24, 48};

ResidualReport check_vacuum_ratio(const std::string& name, int r, bool boundary, const SuiteConfig& cfg) {
  std::vector<LevelResult> levels;
  for (int nr : estimate_levels) {
    const ChartPtr vac = standard_vacuum(nr, 2 * nr);
    chart_metric(vac, cfg);
    const HarmonicField hf = solve_harmonic_field(*vac, 2.0 * pi);
    const double K = geometric_bound(*vac);
    const double value =
        boundary ? vacuum_boundary_ratio(*vac, hf.H, K, r) : vacuum_derivative_ratios(*vac, hf.H, K)[r];
    levels.push_back({grid_label(nr, 2 * nr), 1.0 / nr, value});
  }
  return inequality_report(name, NormKind::l2, levels, cfg.criteria);
}

ResidualReport check_trace(const std::string& name, bool vacuum, const SuiteConfig& cfg) {
  std::vector<LevelResult> levels;
  for (int nr : estimate_levels) {
    std::mt19937_64 rng(cfg.seed);
    const auto w1 = random_waves(rng, 4, 3.0), w2 = random_waves(rng, 4, 3.0);
    const ChartPtr c = vacuum ? standard_vacuum(nr, 2 * nr) : perturbed_labels(nr);
    chart_metric(c, cfg);
    TensorField alpha;
    if (vacuum) {
      const HarmonicField hf = solve_harmonic_field(*c, 2.0 * pi);
      alpha = TensorField::vector(hf.H[0], hf.H[1], Domain::vacuum);
    } else {
      alpha = TensorField::vector(eval_waves(w1, c->x1(), c->x2()), eval_waves(w2, c->x1(), c->x2()), Domain::plasma);
    }
    levels.push_back({grid_label(nr, 2 * nr), 1.0 / nr, trace_constant(*c, alpha)});
  }
  return inequality_report(name, NormKind::l2, levels, cfg.criteria);
}

ResidualReport check_divcurl(const std::string& name, int r, bool harmonic, const SuiteConfig& cfg) {
  std::vector<LevelResult> levels;
  for (int nr : estimate_levels) {
    std::mt19937_64 rng(cfg.seed);
    const auto w1 = random_waves(rng, 4, 3.0), w2 = random_waves(rng, 4, 3.0);
    const ChartPtr c = harmonic ? standard_vacuum(nr, 2 * nr) : perturbed_labels(nr);
    chart_metric(c, cfg);
    Vec2Field f;
    if (harmonic) {
      f = solve_harmonic_field(*c, 2.0 * pi).H;
    } else {
      f = {eval_waves(w1, c->x1(), c->x2()), eval_waves(w2, c->x1(), c->x2())};
    }
    levels.push_back({grid_label(nr, 2 * nr), 1.0 / nr, divcurl_constant(*c, f, r)});
  }
  return inequality_report(name, NormKind::linf, levels, cfg.criteria);
}

ResidualReport check_elliptic(const std::string& name, int r, const SuiteConfig& cfg) {
  std::vector<LevelResult> levels;
  for (int nr : estimate_levels) {
    const ChartPtr c = perturbed_labels(nr);
    chart_metric(c, cfg);
    levels.push_back({grid_label(nr, 2 * nr), 1.0 / nr, elliptic_constant(*c, mms_pressure(*c), r)});
  }
  return inequality_report(name, NormKind::l2, levels, cfg.criteria);
}

using CheckFn = std::function<ResidualReport(const std::string&, const SuiteConfig&)>;

const std::map<std::string, CheckFn>& catalogue() {
  static const std::map<std::string, CheckFn> checks = [] {
    std::map<std::string, CheckFn> c;
    using S = const std::string&;
    using C = const SuiteConfig&;
    c["gauss_disk"] = [](S n, C k) { return check_gauss(n, false, k); };
    c["gauss_annulus"] = [](S n, C k) { return check_gauss(n, true, k); };
    c["metric_rate"] = [](S n, C k) { return check_rate(n, Rate::metric, k); };
    c["covector_commutator"] = [](S n, C k) { return check_rate(n, Rate::covector, k); };
    c["laplacian_commutator"] = [](S n, C k) { return check_rate(n, Rate::laplacian, k); };
    c["second_derivative_commutator"] = [](S n, C k) { return check_rate(n, Rate::second, k); };
    c["third_derivative_commutator"] = [](S n, C k) { return check_rate(n, Rate::third, k); };
    c["boundary_normal_rate"] = [](S n, C k) { return check_boundary_rate(n, true, k); };
    c["boundary_length_rate"] = [](S n, C k) { return check_boundary_rate(n, false, k); };
    c["tangential_hessian"] = [](S n, C k) { return check_projection(n, false, k); };
    c["tangential_third_derivative"] = [](S n, C k) { return check_projection(n, true, k); };
    c["pressure_identity"] = [](S n, C k) { return check_pressure_mms(n, k); };
    c["pressure_identity_equilibrium"] = [](S n, C k) { return check_pressure_equilibrium(n, k); };
    for (int r = 0; r < 3; ++r) {
      c["vacuum_derivative_ratio_r" + std::to_string(r)] = [r](S n, C k) { return check_vacuum_ratio(n, r, false, k); };
      c["vacuum_boundary_ratio_r" + std::to_string(r)] = [r](S n, C k) { return check_vacuum_ratio(n, r, true, k); };
    }
    c["trace_vacuum"] = [](S n, C k) { return check_trace(n, true, k); };
    c["trace_plasma"] = [](S n, C k) { return check_trace(n, false, k); };
    c["divcurl_r0"] = [](S n, C k) { return check_divcurl(n, 0, false, k); };
    c["divcurl_r1"] = [](S n, C k) { return check_divcurl(n, 1, false, k); };
    c["divcurl_harmonic"] = [](S n, C k) { return check_divcurl(n, 0, true, k); };
    c["elliptic_r2"] = [](S n, C k) { return check_elliptic(n, 2, k); };
    c["elliptic_r3"] = [](S n, C k) { return check_elliptic(n, 3, k); };
    return c;
  }();
  return checks;
}

}  // namespace

std::vector<std::string> check_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : catalogue()) names.push_back(name);
  return names;
}

ResidualReport run_check(const std::string& name, const SuiteConfig& config) {
  const auto it = catalogue().find(name);
  if (it == catalogue().end()) throw Error(ErrorKind::configuration_error, "unknown check '" + name + "'");
  try {
    return it->second(name, config);
  } catch (const Error& e) {
    ResidualReport rep;
    rep.check_name = name;
    const bool invariant = e.kind() == ErrorKind::geometry_failure || e.kind() == ErrorKind::map_degeneracy;
    rep.status = invariant ? CheckStatus::invariant_violation : CheckStatus::failed;
    rep.residual = std::numeric_limits<double>::quiet_NaN();
    rep.message = e.what();
    return rep;
  }
}

std::vector<ResidualReport> run_suite(const SuiteConfig& config) {
  std::vector<std::string> names = config.all_checks ? check_names() : config.checks;
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  for (const auto& n : names)
    if (!catalogue().count(n)) throw Error(ErrorKind::configuration_error, "unknown check '" + n + "'");
  std::vector<ResidualReport> out;
  if (config.parallel) {
    std::vector<std::future<ResidualReport>> jobs;
    for (const auto& n : names) jobs.push_back(std::async(std::launch::async, [&config, n] { return run_check(n, config); }));
    for (auto& j : jobs) out.push_back(j.get());
  } else {
    for (const auto& n : names) out.push_back(run_check(n, config));
  }
  return out;
}

bool suite_passed(const std::vector<ResidualReport>& reports) {
  return std::all_of(reports.begin(), reports.end(),
                     [](const ResidualReport& r) { return r.status == CheckStatus::passed; });
}

SuiteConfig suite_config_from_json(const std::string& text) {
  SuiteConfig cfg;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw Error(ErrorKind::configuration_error, "suite config must be a JSON object");
    if (j.contains("checks")) {
      cfg.all_checks = false;
      cfg.checks = j.at("checks").get<std::vector<std::string>>();
    }
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.broken_metric = j.value("broken_metric", false);
    cfg.parallel = j.value("parallel", true);
    cfg.criteria.tolerance = j.value("tolerance", cfg.criteria.tolerance);
    cfg.criteria.min_order = j.value("min_order", cfg.criteria.min_order);
    cfg.criteria.max_growth = j.value("max_growth", cfg.criteria.max_growth);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::configuration_error, std::string("suite config: ") + e.what());
  }
  return cfg;
}

SuiteConfig load_suite_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::configuration_error, "cannot open suite config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return suite_config_from_json(ss.str());
}

std::string suite_table(const std::vector<ResidualReport>& reports) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-32s %-10s %-20s %12s %8s  %s\n", "check", "kind", "finest", "value",
                "order", "status");
  os << line;
  for (const auto& r : reports) {
    char order[32] = "n/a";
    if (r.convergence_order) std::snprintf(order, sizeof order, "%.2f", *r.convergence_order);
    if (r.growth) std::snprintf(order, sizeof order, "x%.2f", *r.growth);
    std::snprintf(line, sizeof line, "%-32s %-10s %-20s %12.3e %8s  %s", r.check_name.c_str(),
                  r.kind == CheckKind::identity ? "identity" : "estimate", r.resolution.c_str(), r.residual, order,
                  to_string(r.status).c_str());
    os << line;
    if (!r.message.empty()) os << "  (" << r.message << ")";
    os << "\n";
  }
  return os.str();
}

std::string suite_json(const std::vector<ResidualReport>& reports) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json j;
    j["check_name"] = r.check_name;
    j["kind"] = r.kind == CheckKind::identity ? "identity" : "inequality";
    j["norm_used"] = r.norm_used == NormKind::linf ? "Linf" : "L2";
    j["residual"] = num(r.residual);
    j["resolution"] = r.resolution;
    j["convergence_order"] = r.convergence_order ? num(*r.convergence_order) : nlohmann::json(nullptr);
    j["growth"] = r.growth ? num(*r.growth) : nlohmann::json(nullptr);
    j["at_floor"] = r.at_floor;
    j["unreliable"] = r.unreliable;
    j["status"] = to_string(r.status);
    j["message"] = r.message;
    nlohmann::json lv = nlohmann::json::array();
    for (const auto& l : r.levels) lv.push_back({{"resolution", l.resolution}, {"h", l.h}, {"value", num(l.value)}});
    j["levels"] = lv;
    arr.push_back(j);
  }
  return arr.dump(2);
}

}  // namespace mhd2d
