#include "mhd2d/geometry.hpp"

#include "mhd2d/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace mhd2d {

namespace {

constexpr double pi = std::numbers::pi;

Eigen::ArrayXd periodic_derivative(const Eigen::MatrixXd& d, const Eigen::ArrayXd& f) {
  return (d * f.matrix()).array();
}

// Real Fourier coefficients: a_0..a_{n/2}, then b_1..b_{n/2-1}.
Eigen::VectorXd fourier_coefficients(const Eigen::ArrayXd& f) {
  const int n = static_cast<int>(f.size());
  const int half = n / 2;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const double t = 2.0 * pi * j / n;
    c(0) += f(j) / n;
    for (int k = 1; k < half; ++k) {
      c(k) += 2.0 / n * f(j) * std::cos(k * t);
      c(half + k) += 2.0 / n * f(j) * std::sin(k * t);
    }
    c(half) += f(j) * std::cos(half * t) / n;
  }
  return c;
}

// Value and first two derivatives of the trigonometric interpolant.
std::array<double, 3> fourier_eval(const Eigen::VectorXd& c, double t) {
  const int n = static_cast<int>(c.size());
  const int half = n / 2;
  std::array<double, 3> v{c(0), 0.0, 0.0};
  for (int k = 1; k <= half; ++k) {
    const double ck = std::cos(k * t), sk = std::sin(k * t);
    const double a = c(k), b = k < half ? c(half + k) : 0.0;
    v[0] += a * ck + b * sk;
    v[1] += k * (-a * sk + b * ck);
    v[2] += -static_cast<double>(k) * k * (a * ck + b * sk);
  }
  return v;
}

double cross(double a1, double a2, double b1, double b2) { return a1 * b2 - a2 * b1; }

bool segments_intersect(double p1, double p2, double q1, double q2, double r1, double r2, double s1, double s2) {
  const double d1 = cross(q1 - p1, q2 - p2, r1 - p1, r2 - p2);
  const double d2 = cross(q1 - p1, q2 - p2, s1 - p1, s2 - p2);
  const double d3 = cross(s1 - r1, s2 - r2, p1 - r1, p2 - r2);
  const double d4 = cross(s1 - r1, s2 - r2, q1 - r1, q2 - r2);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

double smooth_step_f(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

}  // namespace

ClosedCurve::ClosedCurve(Eigen::ArrayXd x1, Eigen::ArrayXd x2, bool is_fixed)
    : x1_(std::move(x1)), x2_(std::move(x2)), is_fixed_(is_fixed) {
  const int n = static_cast<int>(x1_.size());
  if (x2_.size() != n) throw Error(ErrorKind::shape_error, "curve coordinate arrays differ in length");
  if (n < 8 || n % 2 != 0) throw Error(ErrorKind::resolution_failure, "curve needs an even node count >= 8");
  if (!x1_.allFinite() || !x2_.allFinite()) throw Error(ErrorKind::geometry_failure, "curve has non-finite nodes");
  double perimeter = 0.0, shortest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const double len = std::hypot(x1_(j) - x1_(i), x2_(j) - x2_(i));
    perimeter += len;
    shortest = std::min(shortest, len);
  }
  if (shortest <= 1e-10 * perimeter) throw Error(ErrorKind::resolution_failure, "degenerate node spacing");
  for (int i = 0; i < n; ++i) {
    const int i1 = (i + 1) % n;
    for (int j = i + 2; j < n; ++j) {
      const int j1 = (j + 1) % n;
      if (j1 == i) continue;
      if (segments_intersect(x1_(i), x2_(i), x1_(i1), x2_(i1), x1_(j), x2_(j), x1_(j1), x2_(j1)))
        throw Error(ErrorKind::geometry_failure, "curve is self-intersecting");
    }
  }
  if (signed_area() <= 0.0) throw Error(ErrorKind::geometry_failure, "curve must enclose positive signed area");
  coef1_ = fourier_coefficients(x1_);
  coef2_ = fourier_coefficients(x2_);
}

ClosedCurve ClosedCurve::circle(int n, double radius, double c1, double c2, bool is_fixed) {
  const Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(n, 0.0, 2.0 * pi * (n - 1) / n);
  return ClosedCurve(c1 + radius * t.cos(), c2 + radius * t.sin(), is_fixed);
}

ClosedCurve ClosedCurve::ellipse(int n, double a, double b, bool is_fixed) {
  const Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(n, 0.0, 2.0 * pi * (n - 1) / n);
  return ClosedCurve(a * t.cos(), b * t.sin(), is_fixed);
}

ClosedCurve ClosedCurve::perturbed_circle(int n, double radius, double amplitude, int mode, bool is_fixed) {
  const Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(n, 0.0, 2.0 * pi * (n - 1) / n);
  const Eigen::ArrayXd r = radius * (1.0 + amplitude * (mode * t).cos());
  return ClosedCurve(r * t.cos(), r * t.sin(), is_fixed);
}

Eigen::ArrayXd ClosedCurve::params() const {
  const int n = n_nodes();
  return Eigen::ArrayXd::LinSpaced(n, 0.0, 2.0 * pi * (n - 1) / n);
}

double ClosedCurve::signed_area() const {
  const int n = n_nodes();
  double a = 0.0;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    a += x1_(i) * x2_(j) - x1_(j) * x2_(i);
  }
  return 0.5 * a;
}

ClosedCurve::Sample ClosedCurve::evaluate(double param) const {
  const auto a = fourier_eval(coef1_, param);
  const auto b = fourier_eval(coef2_, param);
  return {a[0], b[0], a[1], b[1], a[2], b[2]};
}

InterfaceGeometry compute_geometry(const ClosedCurve& curve, const GeometryOptions& options) {
  if (!(options.epsilon1 > 0.0 && options.epsilon1 < 2.0))
    throw Error(ErrorKind::configuration_error, "epsilon1 must lie in (0, 2)");
  const int n = curve.n_nodes();
  const Eigen::MatrixXd d = fourier_diff(n);
  const Eigen::ArrayXd& x1 = curve.x1();
  const Eigen::ArrayXd& x2 = curve.x2();
  const Eigen::ArrayXd dx1 = periodic_derivative(d, x1), dx2 = periodic_derivative(d, x2);
  const Eigen::ArrayXd ddx1 = periodic_derivative(d, dx1), ddx2 = periodic_derivative(d, dx2);

  InterfaceGeometry g;
  g.epsilon1 = options.epsilon1;
  g.speed = (dx1.square() + dx2.square()).sqrt();
  if (g.speed.minCoeff() <= 0.0) throw Error(ErrorKind::resolution_failure, "curve parameterization degenerates");
  g.t1 = dx1 / g.speed;
  g.t2 = dx2 / g.speed;
  g.n1 = g.t2;
  g.n2 = -g.t1;
  g.gamma11 = 1.0 - g.n1 * g.n1;
  g.gamma12 = -g.n1 * g.n2;
  g.gamma22 = 1.0 - g.n2 * g.n2;
  g.theta = (dx1 * ddx2 - dx2 * ddx1) / g.speed.cube();
  g.mean_curvature = g.theta;

  // Injectivity radius: the largest ball tangent at x_i (on either side) that
  // contains no other node has radius |x_j - x_i|^2 / (2 |(x_j - x_i).N_i|).
  double iota0 = 1.0 / std::max(g.theta.abs().maxCoeff(), 1e-300);
  double iota1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double e1 = x1(j) - x1(i), e2 = x2(j) - x2(i);
      const double dist2 = e1 * e1 + e2 * e2;
      const double normal = std::abs(e1 * g.n1(i) + e2 * g.n2(i));
      if (normal > 0.0) iota0 = std::min(iota0, dist2 / (2.0 * normal));
      const double dn = std::hypot(g.n1(i) - g.n1(j), g.n2(i) - g.n2(j));
      if (dn > options.epsilon1) iota1 = std::min(iota1, std::sqrt(dist2));
    }
  }
  if (!(iota0 > 0.0) || !std::isfinite(iota1))
    throw Error(ErrorKind::geometry_failure, "could not determine injectivity radii");
  g.iota0 = iota0;
  g.iota1 = iota1;
  g.K = std::max(g.theta.abs().maxCoeff(), 1.0 / iota0);
  return g;
}

TensorField project_tangential(const TensorField& T, const InterfaceGeometry& geom) {
  const Eigen::Index n = geom.n1.size();
  T.check_shape(1, n);
  const Eigen::ArrayXXd g11 = geom.gamma11.transpose(), g12 = geom.gamma12.transpose(),
                        g22 = geom.gamma22.transpose();
  const std::array<const Eigen::ArrayXXd*, 4> gamma{&g11, &g12, &g12, &g22};
  TensorField out = T;
  // Contract one index at a time.
  for (int slot = 0; slot < T.rank; ++slot) {
    TensorField next = out;
    for (int flat = 0; flat < out.size(); ++flat) {
      auto idx = out.indices(flat);
      const int a = idx[slot];
      Field acc = Field::Zero(1, n);
      for (int c = 0; c < 2; ++c) {
        idx[slot] = c;
        acc += *gamma[2 * a + c] * out[out.flat_index(idx)];
      }
      next[flat] = acc;
    }
    out = std::move(next);
  }
  out.domain = Domain::interface;
  return out;
}

DistanceResult signed_distance(const ClosedCurve& curve, const Field& x1, const Field& x2, double iota0,
                               double cutoff) {
  if (x1.rows() != x2.rows() || x1.cols() != x2.cols())
    throw Error(ErrorKind::shape_error, "point coordinate fields differ in shape");
  const int n = curve.n_nodes();
  const double h = 2.0 * pi / n;
  const Eigen::ArrayXd t = curve.params();
  DistanceResult r;
  r.d.resize(x1.rows(), x1.cols());
  r.xbar1 = r.d;
  r.xbar2 = r.d;
  r.n1 = r.d;
  r.n2 = r.d;
  r.inside.resize(x1.rows(), x1.cols());
  r.far.resize(x1.rows(), x1.cols());
  Eigen::ArrayXd dist(n);

  auto refine = [&](double p1, double p2, double t0) {
    double s = t0;
    for (int it = 0; it < 50; ++it) {
      const auto c = curve.evaluate(s);
      const double e1 = c.x1 - p1, e2 = c.x2 - p2;
      const double g = e1 * c.dx1 + e2 * c.dx2;
      double hess = c.dx1 * c.dx1 + c.dx2 * c.dx2 + e1 * c.ddx1 + e2 * c.ddx2;
      double step = hess > 0.0 ? -g / hess : -std::copysign(h, g);
      step = std::clamp(step, -h, h);
      s += step;
      if (std::abs(step) < 1e-15) break;
    }
    return s;
  };

  for (Eigen::Index j = 0; j < x1.cols(); ++j) {
    for (Eigen::Index i = 0; i < x1.rows(); ++i) {
      const double p1 = x1(i, j), p2 = x2(i, j);
      dist = ((curve.x1() - p1).square() + (curve.x2() - p2).square()).sqrt();
      Eigen::Index best = 0;
      const double dmin = dist.minCoeff(&best);
      if (cutoff > 0.0 && dmin > cutoff + h * 2.0 * dist.maxCoeff()) {
        r.d(i, j) = dmin;
        r.xbar1(i, j) = curve.x1()(best);
        r.xbar2(i, j) = curve.x2()(best);
        const auto c = curve.evaluate(t(best));
        const double sp = std::hypot(c.dx1, c.dx2);
        r.n1(i, j) = c.dx2 / sp;
        r.n2(i, j) = -c.dx1 / sp;
        r.inside(i, j) = (p1 - r.xbar1(i, j)) * r.n1(i, j) + (p2 - r.xbar2(i, j)) * r.n2(i, j) <= 0.0;
        r.far(i, j) = iota0 > 0.0 && dmin >= iota0;
        continue;
      }
      // Candidate local minima of the node distances (ties count).
      std::vector<int> candidates;
      for (int k = 0; k < n; ++k) {
        const double prev = dist((k + n - 1) % n), next = dist((k + 1) % n);
        if (dist(k) <= prev && dist(k) <= next) candidates.push_back(k);
      }
      double best_d = std::numeric_limits<double>::infinity(), second_d = best_d;
      double best_s = t(best), best_c1 = 0, best_c2 = 0, second_c1 = 0, second_c2 = 0;
      for (int k : candidates) {
        const double s = refine(p1, p2, t(k));
        const auto c = curve.evaluate(s);
        const double dd = std::hypot(c.x1 - p1, c.x2 - p2);
        if (dd < best_d) {
          second_d = best_d;
          second_c1 = best_c1;
          second_c2 = best_c2;
          best_d = dd;
          best_s = s;
          best_c1 = c.x1;
          best_c2 = c.x2;
        } else if (dd < second_d && std::hypot(c.x1 - best_c1, c.x2 - best_c2) > 1e-8) {
          second_d = dd;
          second_c1 = c.x1;
          second_c2 = c.x2;
        }
      }
      const auto c = curve.evaluate(best_s);
      const double sp = std::hypot(c.dx1, c.dx2);
      r.d(i, j) = best_d;
      r.xbar1(i, j) = c.x1;
      r.xbar2(i, j) = c.x2;
      r.n1(i, j) = c.dx2 / sp;
      r.n2(i, j) = -c.dx1 / sp;
      r.inside(i, j) = (p1 - c.x1) * r.n1(i, j) + (p2 - c.x2) * r.n2(i, j) <= 1e-14;
      const bool ambiguous = std::isfinite(second_d) &&
                             std::hypot(second_c1 - best_c1, second_c2 - best_c2) > 1e-8 &&
                             second_d - best_d <= 1e-9 * std::max(1.0, best_d);
      r.far(i, j) = ambiguous || (iota0 > 0.0 && best_d >= iota0);
    }
  }
  return r;
}

double cutoff_eta(double d, double d0) {
  const double quarter = 0.25 * d0;
  if (d <= quarter) return 1.0;
  if (d >= 2.0 * quarter) return 0.0;
  const double s = (d - quarter) / quarter;
  const double a = smooth_step_f(1.0 - s), b = smooth_step_f(s);
  return a / (a + b);
}

CutoffCometric cutoff_cometric(const ClosedCurve& curve, const InterfaceGeometry& geom, const Field& x1,
                               const Field& x2, double d0) {
  if (!(d0 > 0.0)) throw Error(ErrorKind::configuration_error, "cut-off width d0 must be positive");
  if (d0 >= geom.iota0)
    throw Error(ErrorKind::configuration_error, "cut-off width d0 must be smaller than the injectivity radius");
  const DistanceResult dr = signed_distance(curve, x1, x2, geom.iota0, 0.5 * d0);
  CutoffCometric q;
  q.d0 = d0;
  q.d = dr.d;
  q.n1 = dr.n1;
  q.n2 = dr.n2;
  q.eta = dr.d.unaryExpr([d0](double d) { return cutoff_eta(d, d0); });
  const Field e2 = q.eta.square();
  q.q11 = 1.0 - e2 * q.n1 * q.n1;
  q.q12 = -e2 * q.n1 * q.n2;
  q.q22 = 1.0 - e2 * q.n2 * q.n2;
  return q;
}

void write_curve_csv(const ClosedCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::configuration_error, "cannot open " + path + " for writing");
  out << "param,x,y\n";
  const Eigen::ArrayXd t = curve.params();
  char line[128];
  for (int k = 0; k < curve.n_nodes(); ++k) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", t(k), curve.x1()(k), curve.x2()(k));
    out << line;
  }
}

ClosedCurve read_curve_csv(const std::string& path, bool is_fixed) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::configuration_error, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("param,x,y", 0) != 0) throw Error(ErrorKind::configuration_error, "curve CSV header must be param,x,y");
  std::vector<double> t, a, b;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f1, f2, f3;
    if (!std::getline(ss, f1, ',') || !std::getline(ss, f2, ',') || !std::getline(ss, f3, ','))
      throw Error(ErrorKind::configuration_error, "malformed curve CSV row: " + line);
    t.push_back(std::stod(f1));
    a.push_back(std::stod(f2));
    b.push_back(std::stod(f3));
  }
  const int n = static_cast<int>(t.size());
  for (int k = 0; k < n; ++k)
    if (std::abs(t[k] - 2.0 * pi * k / n) > 1e-9)
      throw Error(ErrorKind::configuration_error, "curve parameters must be uniformly spaced in [0, 2pi)");
  return ClosedCurve(Eigen::Map<Eigen::ArrayXd>(a.data(), n), Eigen::Map<Eigen::ArrayXd>(b.data(), n), is_fixed);
}

std::string geometry_report_json(const InterfaceGeometry& geom) {
  auto vec = [](const Eigen::ArrayXd& a) { return std::vector<double>(a.data(), a.data() + a.size()); };
  nlohmann::json j;
  j["iota0"] = geom.iota0;
  j["iota1"] = geom.iota1;
  j["K"] = geom.K;
  j["epsilon1"] = geom.epsilon1;
  j["normal"] = {{"n1", vec(geom.n1)}, {"n2", vec(geom.n2)}};
  j["theta"] = vec(geom.theta);
  j["mean_curvature"] = vec(geom.mean_curvature);
  j["gamma"] = {{"g11", vec(geom.gamma11)}, {"g12", vec(geom.gamma12)}, {"g22", vec(geom.gamma22)}};
  return j.dump(2);
}

}  // namespace mhd2d
