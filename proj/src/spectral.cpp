#include "mhd2d/spectral.hpp"

#include "mhd2d/errors.hpp"

#include <cmath>
#include <numbers>

namespace mhd2d {

namespace {

constexpr double pi = std::numbers::pi;

double sin_integral_quarter(int p) {
  // int_0^{pi/2} sin(p t) dt
  if (p == 0) return 0.0;
  return (1.0 - std::cos(p * pi / 2.0)) / p;
}

// Barycentric interpolation on Chebyshev-Gauss-Lobatto nodes cos(pi j/n).
double cheb_interp(const Eigen::VectorXd& nodes, const Eigen::VectorXd& values, double x) {
  const int n = static_cast<int>(nodes.size()) - 1;
  double num = 0.0, den = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double diff = x - nodes(j);
    if (std::abs(diff) < 1e-15) return values(j);
    double w = (j % 2 == 0) ? 1.0 : -1.0;
    if (j == 0 || j == n) w *= 0.5;
    num += w / diff * values(j);
    den += w / diff;
  }
  return num / den;
}

// Periodic sinc cardinal function for m (even) equispaced nodes.
double periodic_sinc(int m, double theta) {
  const double half = 0.5 * theta;
  const double t = std::tan(half);
  if (std::abs(std::sin(half)) < 1e-14) return 1.0;
  return std::sin(0.5 * m * theta) / (m * t);
}

}  // namespace

Chebyshev chebyshev(int n) {
  if (n < 1) throw Error(ErrorKind::resolution_failure, "Chebyshev grid needs n >= 1");
  Chebyshev c;
  c.nodes.resize(n + 1);
  for (int j = 0; j <= n; ++j) c.nodes(j) = std::cos(pi * j / n);
  Eigen::VectorXd weight(n + 1);
  for (int j = 0; j <= n; ++j) weight(j) = ((j == 0 || j == n) ? 2.0 : 1.0) * ((j % 2 == 0) ? 1.0 : -1.0);
  c.diff.setZero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      if (i == j) continue;
      c.diff(i, j) = weight(i) / weight(j) / (c.nodes(i) - c.nodes(j));
    }
  }
  // Negative-sum trick for the diagonal.
  for (int i = 0; i <= n; ++i) c.diff(i, i) = -c.diff.row(i).sum();
  return c;
}

Eigen::MatrixXd fourier_diff(int m) {
  if (m < 2 || m % 2 != 0) throw Error(ErrorKind::resolution_failure, "angular count must be even");
  const double h = 2.0 * pi / m;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const int k = i - j;
      d(i, j) = 0.5 * ((k % 2 == 0) ? 1.0 : -1.0) / std::tan(0.5 * k * h);
    }
  }
  return d;
}

Eigen::VectorXd chebyshev_quadrature(int n, const Eigen::VectorXd& moments) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n + 1);
  for (int j = 0; j <= n; ++j) {
    const double cj = (j == 0 || j == n) ? 2.0 : 1.0;
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double ck = (k == 0 || k == n) ? 2.0 : 1.0;
      sum += 2.0 / (n * ck * cj) * std::cos(pi * j * k / n) * moments(k);
    }
    w(j) = sum;
  }
  return w;
}

Eigen::VectorXd clenshaw_curtis(int n) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n + 1);
  for (int k = 0; k <= n; k += 2) m(k) = 2.0 / (1.0 - static_cast<double>(k) * k);
  return chebyshev_quadrature(n, m);
}

Eigen::VectorXd abs_weighted_quadrature(int n) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n + 1);
  for (int k = 0; k <= n; k += 2) m(k) = 0.5 * (sin_integral_quarter(2 + k) + sin_integral_quarter(2 - k));
  return chebyshev_quadrature(n, m);
}

Field shift_half_period(const Field& f) {
  const auto m = f.cols();
  Field g(f.rows(), m);
  const auto half = m / 2;
  for (Eigen::Index k = 0; k < m; ++k) g.col(k) = f.col((k + half) % m);
  return g;
}

void SpectralGrid::init_angular(int n_angular) {
  if (n_angular < 4 || n_angular % 2 != 0)
    throw Error(ErrorKind::resolution_failure, "angular resolution must be even and >= 4");
  n_angular_ = n_angular;
  angular_.resize(n_angular);
  for (int k = 0; k < n_angular; ++k) angular_(k) = 2.0 * pi * k / n_angular;
  fdiff_ = fourier_diff(n_angular);

  const int m = n_angular;
  basis_.resize(m, m);
  wavenumbers_.assign(m, 0);
  int col = 0;
  for (int k = 0; k <= m / 2; ++k, ++col) {
    for (int i = 0; i < m; ++i) basis_(i, col) = std::cos(k * angular_(i));
    wavenumbers_[col] = k;
  }
  for (int k = 1; k < m / 2; ++k, ++col) {
    for (int i = 0; i < m; ++i) basis_(i, col) = std::sin(k * angular_(i));
    wavenumbers_[col] = k;
  }
  basis_inv_ = basis_.inverse();
}

std::shared_ptr<const SpectralGrid> SpectralGrid::disk(int n_radial, int n_angular) {
  if (n_radial < 2) throw Error(ErrorKind::resolution_failure, "disk needs at least 2 radial nodes");
  std::shared_ptr<SpectralGrid> g(new SpectralGrid());
  g->kind_ = GridKind::disk;
  g->init_angular(n_angular);
  g->n_radial_ = n_radial;
  const int n = 2 * n_radial - 1;  // odd, so x = 0 is not a node
  const Chebyshev c = chebyshev(n);
  const Eigen::MatrixXd d2 = c.diff * c.diff;
  g->cheb_full_nodes_ = c.nodes;
  g->radial_ = c.nodes.head(n_radial);
  g->d1_same_ = c.diff.topLeftCorner(n_radial, n_radial);
  g->d2_same_ = d2.topLeftCorner(n_radial, n_radial);
  g->d1_mirror_.resize(n_radial, n_radial);
  g->d2_mirror_.resize(n_radial, n_radial);
  for (int i = 0; i < n_radial; ++i) {
    for (int j = 0; j < n_radial; ++j) {
      g->d1_mirror_(i, j) = c.diff(i, n - j);
      g->d2_mirror_(i, j) = d2(i, n - j);
    }
  }
  const Eigen::VectorXd w = abs_weighted_quadrature(n);
  g->weights_.resize(n_radial, n_angular);
  for (int j = 0; j < n_radial; ++j) g->weights_.row(j).setConstant(w(j) * 2.0 * pi / n_angular);
  return g;
}

std::shared_ptr<const SpectralGrid> SpectralGrid::annulus(int n_radial, int n_angular) {
  if (n_radial < 3) throw Error(ErrorKind::resolution_failure, "annulus needs at least 3 radial nodes");
  std::shared_ptr<SpectralGrid> g(new SpectralGrid());
  g->kind_ = GridKind::annulus;
  g->init_angular(n_angular);
  g->n_radial_ = n_radial;
  const int n = n_radial - 1;
  const Chebyshev c = chebyshev(n);
  g->cheb_full_nodes_ = c.nodes;
  // s = (1 - x)/2, ds/dx = -1/2.
  g->radial_ = (1.0 - c.nodes.array()) * 0.5;
  g->ds1_ = -2.0 * c.diff;
  g->ds2_ = g->ds1_ * g->ds1_;
  const Eigen::VectorXd w = 0.5 * clenshaw_curtis(n);
  g->weights_.resize(n_radial, n_angular);
  for (int j = 0; j < n_radial; ++j) g->weights_.row(j).setConstant(w(j) * 2.0 * pi / n_angular);
  return g;
}

Field SpectralGrid::radial_field() const {
  Field f(n_radial_, n_angular_);
  for (int k = 0; k < n_angular_; ++k) f.col(k) = radial_.array();
  return f;
}

Field SpectralGrid::angular_field() const {
  Field f(n_radial_, n_angular_);
  for (int j = 0; j < n_radial_; ++j) f.row(j) = angular_.transpose().array();
  return f;
}

Field SpectralGrid::chart_scale() const {
  return kind_ == GridKind::disk ? radial_field() : constant(1.0);
}

Field SpectralGrid::d_radial(const Field& f) const {
  if (f.rows() != n_radial_ || f.cols() != n_angular_)
    throw Error(ErrorKind::shape_error, "field shape does not match grid");
  if (kind_ == GridKind::disk) {
    const Eigen::MatrixXd a = d1_same_ * f.matrix();
    const Eigen::MatrixXd b = d1_mirror_ * shift_half_period(f).matrix();
    return (a + b).array();
  }
  return (ds1_ * f.matrix()).array();
}

Field SpectralGrid::d_angular(const Field& f) const {
  if (f.rows() != n_radial_ || f.cols() != n_angular_)
    throw Error(ErrorKind::shape_error, "field shape does not match grid");
  return (f.matrix() * fdiff_.transpose()).array();
}

std::vector<int> SpectralGrid::boundary_rows() const {
  if (kind_ == GridKind::disk) return {0};
  return {0, n_radial_ - 1};
}

Eigen::MatrixXd SpectralGrid::radial_diff_mode(int k, int order) const {
  if (kind_ == GridKind::annulus) return order == 1 ? ds1_ : ds2_;
  const double parity = (k % 2 == 0) ? 1.0 : -1.0;
  if (order == 1) return d1_same_ + parity * d1_mirror_;
  return d2_same_ + parity * d2_mirror_;
}

double SpectralGrid::interpolate(const Field& f, double radial, double angle) const {
  auto along_angle = [&](int row, double phi) {
    double sum = 0.0;
    for (int k = 0; k < n_angular_; ++k) sum += f(row, k) * periodic_sinc(n_angular_, phi - angular_(k));
    return sum;
  };
  const int n = static_cast<int>(cheb_full_nodes_.size()) - 1;
  Eigen::VectorXd line(n + 1);
  if (kind_ == GridKind::disk) {
    for (int j = 0; j <= n; ++j) {
      line(j) = j < n_radial_ ? along_angle(j, angle) : along_angle(n - j, angle + pi);
    }
    return cheb_interp(cheb_full_nodes_, line, radial);
  }
  for (int j = 0; j <= n; ++j) line(j) = along_angle(j, angle);
  return cheb_interp(cheb_full_nodes_, line, 1.0 - 2.0 * radial);
}

Field SpectralGrid::resample(const Field& f, const SpectralGrid& target) const {
  if (target.kind() != kind_) throw Error(ErrorKind::shape_error, "resampling needs grids of the same kind");
  Field out = target.zeros();
  for (int i = 0; i < target.n_radial(); ++i)
    for (int j = 0; j < target.n_angular(); ++j) out(i, j) = interpolate(f, target.radial()(i), target.angular()(j));
  return out;
}

}  // namespace mhd2d
