#include "mhd2d/kinematics.hpp"

#include "mhd2d/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mhd2d {

namespace {

double bump(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

// Antiderivative (zero mean) of a periodic sample with zero mean, exact for
// the trigonometric interpolant; the Nyquist mode is dropped.
Eigen::ArrayXd periodic_antiderivative(const SpectralGrid& g, const Eigen::ArrayXd& f) {
  const int m = g.n_angular();
  const Eigen::VectorXd c = g.fourier_basis_inverse() * f.matrix();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  const int half = m / 2;
  // cos k -> sin k / k, sin k -> -cos k / k
  for (int k = 1; k < half; ++k) {
    out(half + k) += c(k) / k;
    out(k) -= c(half + k) / k;
  }
  return (g.fourier_basis() * out).array();
}

}  // namespace

FlowMap::FlowMap(ChartPtr labels, Domain domain, double t)
    : labels_(std::move(labels)), domain_(domain), x_{labels_->x1(), labels_->x2()}, t_(t) {}

FlowMap::FlowMap(ChartPtr labels, Domain domain, Field x1, Field x2, double t)
    : labels_(std::move(labels)), domain_(domain), x_{std::move(x1), std::move(x2)}, t_(t) {
  const auto& g = labels_->grid();
  for (const auto& f : x_)
    if (f.rows() != g.n_radial() || f.cols() != g.n_angular())
      throw Error(ErrorKind::shape_error, "flow map positions do not match the label grid");
}

Chart FlowMap::current() const { return Chart(labels_->grid_ptr(), x_[0], x_[1]); }

std::array<Field, 4> FlowMap::jacobian() const {
  std::array<Field, 4> f;
  for (int i = 0; i < 2; ++i) {
    const Vec2Field d = labels_->grad(x_[i]);
    f[2 * i + 0] = d[0];
    f[2 * i + 1] = d[1];
  }
  return f;
}

Field FlowMap::det() const {
  const auto f = jacobian();
  return f[0] * f[3] - f[1] * f[2];
}

double FlowMap::det_drift() const { return (det() - 1.0).abs().maxCoeff(); }

FlowMap advance_map(const FlowMap& map, const VelocityFunction& v, double dt, const AdvanceOptions& options) {
  if (!(dt > 0.0)) throw Error(ErrorKind::configuration_error, "time step must be positive");
  const double t = map.time();
  const Field& x1 = map.x1();
  const Field& x2 = map.x2();
  const Vec2Field k1 = v(t, x1, x2);
  const Vec2Field k2 = v(t + 0.5 * dt, x1 + 0.5 * dt * k1[0], x2 + 0.5 * dt * k1[1]);
  const Vec2Field k3 = v(t + 0.5 * dt, x1 + 0.5 * dt * k2[0], x2 + 0.5 * dt * k2[1]);
  const Vec2Field k4 = v(t + dt, x1 + dt * k3[0], x2 + dt * k3[1]);
  Field y1 = x1 + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
  Field y2 = x2 + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
  FlowMap next(map.labels(), map.domain(), std::move(y1), std::move(y2), t + dt);
  const Field det = next.det();
  if ((det <= 0.0).any()) throw Error(ErrorKind::map_degeneracy, "flow map lost orientation");
  const double drift = (det - 1.0).abs().maxCoeff();
  if (drift > options.det_tolerance)
    throw Error(ErrorKind::incompressibility_violation, "Jacobian determinant drifted by " + std::to_string(drift));
  return next;
}

double MetricState::inverse_defect() const {
  double worst = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Field s = ginv(a, 0) * g(0, b) + ginv(a, 1) * g(1, b);
      if (a == b) s -= 1.0;
      worst = std::max(worst, s.abs().maxCoeff());
    }
  return worst;
}

MetricState MetricState::from_components(ChartPtr labels, Field g11, Field g12, Field g22) {
  MetricState m;
  m.labels_ = std::move(labels);
  const Field det = g11 * g22 - g12 * g12;
  if (!det.allFinite() || (det <= 0.0).any() || (g11 <= 0.0).any())
    throw Error(ErrorKind::map_degeneracy, "metric is not positive definite");
  m.ginv_ = {g22 / det, -g12 / det, g11 / det};
  m.volume_ = det.sqrt();
  m.g_ = {std::move(g11), std::move(g12), std::move(g22)};
  // d_a g_bc
  std::array<Field, 8> dg;
  for (int b = 0; b < 2; ++b)
    for (int c = 0; c < 2; ++c) {
      const Vec2Field d = m.labels_->grad(m.g(b, c));
      dg[4 * 0 + 2 * b + c] = d[0];
      dg[4 * 1 + 2 * b + c] = d[1];
    }
  auto D = [&](int a, int b, int c) -> const Field& { return dg[4 * a + 2 * b + c]; };
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        Field s = Field::Zero(m.volume_.rows(), m.volume_.cols());
        for (int d = 0; d < 2; ++d) s += 0.5 * m.ginv(c, d) * (D(a, b, d) + D(b, a, d) - D(d, a, b));
        m.gamma_[4 * c + 2 * a + b] = std::move(s);
      }
  return m;
}

MetricState pullback_metric(const FlowMap& map) {
  const auto f = map.jacobian();
  Field g11 = f[0] * f[0] + f[2] * f[2];
  Field g12 = f[0] * f[1] + f[2] * f[3];
  Field g22 = f[1] * f[1] + f[3] * f[3];
  return MetricState::from_components(map.labels(), std::move(g11), std::move(g12), std::move(g22));
}

MetricState flat_metric(ChartPtr labels) {
  const Field one = labels->grid().constant(1.0), zero = labels->grid().zeros();
  return MetricState::from_components(std::move(labels), one, zero, one);
}

TensorField covariant_derivative(const TensorField& T, const MetricState& metric) {
  const auto& chart = *metric.labels();
  T.check_shape(chart.grid().n_radial(), chart.grid().n_angular());
  if (T.rank > 4) throw Error(ErrorKind::shape_error, "covariant derivative supports rank <= 4");
  TensorField out(T.rank + 1, T.domain, T.rows(), T.cols());
  const int stride = T.size();
  for (int flat = 0; flat < stride; ++flat) {
    const Vec2Field d = chart.grad(T[flat]);
    out[flat] = d[0];
    out[stride + flat] = d[1];
  }
  for (int a = 0; a < 2; ++a) {
    for (int flat = 0; flat < stride; ++flat) {
      auto idx = T.indices(flat);
      Field& target = out[a * stride + flat];
      for (int k = 0; k < T.rank; ++k) {
        const int bk = idx[k];
        for (int c = 0; c < 2; ++c) {
          idx[k] = c;
          target -= metric.christoffel(c, a, bk) * T[T.flat_index(idx)];
        }
        idx[k] = bk;
      }
    }
  }
  return out;
}

namespace {

// Apply M^{i}_{a} (or its transpose pattern) to every index of T: out_{a..} =
// sum_i M(i, a) T_{i..}.
TensorField transform_all(const TensorField& T, const std::function<const Field&(int, int)>& M) {
  TensorField out = T;
  for (int slot = 0; slot < T.rank; ++slot) {
    TensorField next = out;
    for (int flat = 0; flat < out.size(); ++flat) {
      auto idx = out.indices(flat);
      const int a = idx[slot];
      Field acc = Field::Zero(T.rows(), T.cols());
      for (int i = 0; i < 2; ++i) {
        idx[slot] = i;
        acc += M(i, a) * out[out.flat_index(idx)];
      }
      next[flat] = std::move(acc);
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

TensorField pullback(const TensorField& eulerian, const std::array<Field, 4>& F) {
  return transform_all(eulerian, [&](int i, int a) -> const Field& { return F[2 * i + a]; });
}

TensorField pushforward(const TensorField& lagrangian, const std::array<Field, 4>& F) {
  // (F^{-1})^a_i
  const Field det = F[0] * F[3] - F[1] * F[2];
  const std::array<Field, 4> inv{F[3] / det, -F[1] / det, -F[2] / det, F[0] / det};
  // T_i = (F^{-1})^a_i T_a
  return transform_all(lagrangian, [&](int a, int i) -> const Field& { return inv[2 * a + i]; });
}

TensorField cartesian_derivative(const TensorField& T, const Chart& chart, int times) {
  TensorField cur = T;
  for (int n = 0; n < times; ++n) {
    TensorField out(cur.rank + 1, cur.domain, cur.rows(), cur.cols());
    const int stride = cur.size();
    for (int flat = 0; flat < stride; ++flat) {
      const Vec2Field d = chart.grad(cur[flat]);
      out[flat] = d[0];
      out[stride + flat] = d[1];
    }
    cur = std::move(out);
  }
  return cur;
}

TensorField raise_all(const TensorField& T, const MetricState& metric) {
  return transform_all(T, [&](int i, int a) -> const Field& { return metric.ginv(i, a); });
}

Field contract(const TensorField& S, const TensorField& T, const MetricState& metric) {
  if (S.rank != T.rank) throw Error(ErrorKind::shape_error, "contraction of tensors of different rank");
  const TensorField up = raise_all(T, metric);
  Field sum = Field::Zero(S.rows(), S.cols());
  for (int k = 0; k < S.size(); ++k) sum += S[k] * up[k];
  return sum;
}

TensorField material_derivative_field(const std::vector<TensorField>& levels, const std::vector<double>& times) {
  if (levels.size() < 2 || times.size() != levels.size())
    throw Error(ErrorKind::insufficient_history, "material derivative needs at least two time levels");
  if (levels.size() == 2) {
    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) throw Error(ErrorKind::configuration_error, "time levels must increase");
    return (1.0 / dt) * (levels[1] - levels[0]);
  }
  if (levels.size() % 2 == 0)
    throw Error(ErrorKind::configuration_error, "more than two levels must be an odd count");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw Error(ErrorKind::configuration_error, "time levels must increase");
  // Derivative of the Lagrange interpolant through all levels at the middle
  // one: L_k'(t_m) = prod_{j != k, m} (t_m - t_j) / prod_{j != k} (t_k - t_j)
  // for k != m, and sum_{j != m} 1 / (t_m - t_j) for k = m.
  const std::size_t n = times.size(), mid = n / 2;
  TensorField out = 0.0 * levels[mid];
  for (std::size_t k = 0; k < n; ++k) {
    double c = 0.0;
    if (k == mid) {
      for (std::size_t j = 0; j < n; ++j)
        if (j != mid) c += 1.0 / (times[mid] - times[j]);
    } else {
      double num = 1.0, den = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == k) continue;
        den *= times[k] - times[j];
        if (j != mid) num *= times[mid] - times[j];
      }
      c = num / den;
    }
    out = out + c * levels[k];
  }
  return out;
}

TensorField perp_gradient(const TensorField& q, const MetricState& metric) {
  if (q.rank != 0) throw Error(ErrorKind::shape_error, "perp gradient takes a scalar");
  const Vec2Field d = metric.labels()->grad(q[0]);
  const Field w1 = d[1] / metric.volume(), w2 = -d[0] / metric.volume();
  return TensorField::vector(metric.g(0, 0) * w1 + metric.g(0, 1) * w2, metric.g(1, 0) * w1 + metric.g(1, 1) * w2,
                             q.domain);
}

std::pair<double, double> taper(double s, const ExtensionOptions& options) {
  if (options.profile == TaperProfile::polynomial) {
    const int k = options.order;
    const double w = std::pow(1.0 - s, k - 1);
    return {w * (1.0 - s) * (1.0 + k * s), -k * (k + 1) * s * w};
  }
  const double a = options.band_start, b = options.band_end;
  if (s <= a) return {1.0, 0.0};
  if (s >= b) return {0.0, 0.0};
  const double w = b - a;
  const double x = (s - a) / w;
  const double p = bump(1.0 - x), q = bump(x);
  const double dp = -p / ((1.0 - x) * (1.0 - x));  // d/dx bump(1-x)
  const double dq = q / (x * x);
  const double value = p / (p + q);
  const double deriv = (dp * (p + q) - p * (dp + dq)) / ((p + q) * (p + q));
  return {value, deriv / w};
}

ExtendedVelocity extend_velocity_to_vacuum(const Eigen::ArrayXd& u1, const Eigen::ArrayXd& u2, const Chart& vacuum,
                                           const ExtensionOptions& options) {
  const auto& g = vacuum.grid();
  if (g.kind() != GridKind::annulus) throw Error(ErrorKind::shape_error, "extension needs an annulus chart");
  const int m = g.n_angular(), n = g.n_radial();
  if (u1.size() != m || u2.size() != m) throw Error(ErrorKind::shape_error, "interface velocity has wrong length");
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      gap = std::min(gap, std::hypot(vacuum.x1()(0, i) - vacuum.x1()(n - 1, j), vacuum.x2()(0, i) - vacuum.x2()(n - 1, j)));
  if (gap < options.min_gap) throw Error(ErrorKind::geometry_failure, "interface and wall are too close");

  // psi_v with grad psi = (-v2, v1) on Gamma:
  //   d psi/d phi = x_phi . (-u2, u1) =: a,   d psi/d s = x_s . (-u2, u1) =: lambda.
  const Eigen::ArrayXd x1p = vacuum.jacobian(0, 1).row(0).transpose();
  const Eigen::ArrayXd x2p = vacuum.jacobian(1, 1).row(0).transpose();
  const Eigen::ArrayXd x1s = vacuum.jacobian(0, 0).row(0).transpose();
  const Eigen::ArrayXd x2s = vacuum.jacobian(1, 0).row(0).transpose();
  Eigen::ArrayXd a = -x1p * u2 + x2p * u1;
  const Eigen::ArrayXd lambda = -x1s * u2 + x2s * u1;
  ExtendedVelocity out;
  out.flux_defect = a.mean();
  a -= out.flux_defect;
  const Eigen::ArrayXd psi_gamma = periodic_antiderivative(g, a);
  const double lambda_bar = lambda.mean();
  const Eigen::ArrayXd dl = lambda - lambda_bar;
  const Eigen::ArrayXd dl_phi = (fourier_diff(m) * dl.matrix()).array();
  // The angular derivative of psi_gamma is a minus its Nyquist mode.
  const Eigen::ArrayXd a_resolved = (fourier_diff(m) * psi_gamma.matrix()).array();

  Field psi_s(n, m), psi_p(n, m);
  for (int j = 0; j < n; ++j) {
    const double s = g.radial()(j);
    const auto [chi, dchi] = taper(s, options);
    psi_s.row(j) = (dchi * psi_gamma + dl * (chi + s * dchi) + lambda_bar * chi).transpose();
    psi_p.row(j) = (chi * a_resolved + s * chi * dl_phi).transpose();
  }
  Vec2Field grad;
  for (int i = 0; i < 2; ++i) grad[i] = vacuum.inverse_jacobian(0, i) * psi_s + vacuum.inverse_jacobian(1, i) * psi_p;
  out.v = {grad[1], -grad[0]};
  out.max_boundary_speed = (u1.square() + u2.square()).sqrt().maxCoeff();
  out.max_speed = (out.v[0].square() + out.v[1].square()).sqrt().maxCoeff();
  return out;
}

TensorField symmetrize(const TensorField& T) {
  if (T.rank > 4) throw Error(ErrorKind::shape_error, "symmetrize supports rank <= 4");
  std::vector<int> perm(T.rank);
  std::iota(perm.begin(), perm.end(), 0);
  TensorField out(T.rank, T.domain, T.rows(), T.cols());
  int count = 0;
  do {
    ++count;
    for (int flat = 0; flat < T.size(); ++flat) {
      const auto idx = T.indices(flat);
      std::vector<int> permuted(T.rank);
      for (int k = 0; k < T.rank; ++k) permuted[k] = idx[perm[k]];
      out[flat] += T[T.flat_index(permuted)];
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return (1.0 / count) * out;
}

TensorField dot_last(const TensorField& grad_u, const TensorField& grad_q, const MetricState& metric) {
  if (grad_u.rank < 1 || grad_q.rank < 1) throw Error(ErrorKind::shape_error, "dot product needs rank >= 1");
  const int rank = grad_u.rank + grad_q.rank - 2;
  TensorField out(rank, grad_u.domain, grad_u.rows(), grad_u.cols());
  for (int flat = 0; flat < out.size(); ++flat) {
    const auto idx = out.indices(flat);
    std::vector<int> iu(idx.begin(), idx.begin() + grad_u.rank - 1);
    std::vector<int> iq(idx.begin() + grad_u.rank - 1, idx.end());
    iu.push_back(0);
    iq.push_back(0);
    for (int e = 0; e < 2; ++e)
      for (int d = 0; d < 2; ++d) {
        iu.back() = e;
        iq.back() = d;
        out[flat] += metric.ginv(e, d) * grad_u[grad_u.flat_index(iu)] * grad_q[grad_q.flat_index(iq)];
      }
  }
  return out;
}

}  // namespace mhd2d
