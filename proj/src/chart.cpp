#include "mhd2d/chart.hpp"

#include "mhd2d/errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace mhd2d {

Chart::Chart(GridPtr grid, Field x1, Field x2) : grid_(std::move(grid)), x_{std::move(x1), std::move(x2)} {
  const auto& g = *grid_;
  if (x_[0].rows() != g.n_radial() || x_[0].cols() != g.n_angular() || x_[1].rows() != g.n_radial() ||
      x_[1].cols() != g.n_angular())
    throw Error(ErrorKind::shape_error, "chart positions do not match grid");
  for (int i = 0; i < 2; ++i) {
    jac_[2 * i + 0] = g.d_radial(x_[i]);
    jac_[2 * i + 1] = g.d_angular(x_[i]);
  }
  det_ = jac_[0] * jac_[3] - jac_[1] * jac_[2];
  if ((det_ <= 0.0).any()) throw Error(ErrorKind::map_degeneracy, "chart Jacobian is not positive");
  // [xi_x] = [x_xi]^{-1}
  inv_[0] = jac_[3] / det_;   // d rho / d x1
  inv_[1] = -jac_[1] / det_;  // d rho / d x2
  inv_[2] = -jac_[2] / det_;  // d phi / d x1
  inv_[3] = jac_[0] / det_;   // d phi / d x2
}

Field Chart::area_density() const { return det_ / grid_->chart_scale(); }

Vec2Field Chart::grad(const Field& f) const {
  const Field fr = grid_->d_radial(f);
  const Field fp = grid_->d_angular(f);
  return {inv_[0] * fr + inv_[2] * fp, inv_[1] * fr + inv_[3] * fp};
}

Field Chart::partial(const Field& f, int i) const {
  const Field fr = grid_->d_radial(f);
  const Field fp = grid_->d_angular(f);
  return inv_[i] * fr + inv_[2 + i] * fp;
}

Field Chart::div(const Vec2Field& v) const { return partial(v[0], 0) + partial(v[1], 1); }

Field Chart::curl(const Vec2Field& v) const { return partial(v[1], 0) - partial(v[0], 1); }

Field Chart::laplacian(const Field& f) const { return div(grad(f)); }

Vec2Field Chart::perp_grad(const Field& f) const {
  const Vec2Field g = grad(f);
  return {g[1], -g[0]};
}

double Chart::integrate(const Field& f) const { return (grid_->weights() * area_density() * f).sum(); }

double Chart::area() const { return (grid_->weights() * area_density()).sum(); }

BoundaryRow Chart::boundary_row(int row) const {
  BoundaryRow b;
  b.x1 = x_[0].row(row).transpose();
  b.x2 = x_[1].row(row).transpose();
  const Eigen::ArrayXd dx1 = jac_[1].row(row).transpose();
  const Eigen::ArrayXd dx2 = jac_[3].row(row).transpose();
  b.speed = (dx1.square() + dx2.square()).sqrt();
  b.t1 = dx1 / b.speed;
  b.t2 = dx2 / b.speed;
  b.n1 = b.t2;
  b.n2 = -b.t1;
  b.line_weight = b.speed * (2.0 * std::numbers::pi / grid_->n_angular());
  return b;
}

double Chart::line_integral(int row, const Eigen::ArrayXd& values) const {
  return (boundary_row(row).line_weight * values).sum();
}

Chart disk_chart(const GridPtr& grid) {
  if (grid->kind() != GridKind::disk) throw Error(ErrorKind::shape_error, "disk chart needs a disk grid");
  const Field r = grid->radial_field(), p = grid->angular_field();
  return Chart(grid, r * p.cos(), r * p.sin());
}

Vec2Field perturbed_disk_map(const Field& y1, const Field& y2, double amplitude, int mode) {
  if (mode < 1) throw Error(ErrorKind::configuration_error, "perturbation mode must be >= 1");
  if (std::abs(amplitude) * (mode - 1) >= 1.0)
    throw Error(ErrorKind::geometry_failure, "perturbation amplitude folds the disk");
  Vec2Field x{y1, y2};
  for (Eigen::Index k = 0; k < y1.size(); ++k) {
    const std::complex<double> z(y1(k), y2(k));
    const std::complex<double> w = z + amplitude * std::pow(std::conj(z), mode - 1);
    x[0](k) = w.real();
    x[1](k) = w.imag();
  }
  return x;
}

Chart perturbed_disk_chart(const GridPtr& grid, double amplitude, int mode) {
  const Chart unit = disk_chart(grid);
  auto [x1, x2] = perturbed_disk_map(unit.x1(), unit.x2(), amplitude, mode);
  return Chart(grid, std::move(x1), std::move(x2));
}

double enclosed_area(const Eigen::ArrayXd& x1, const Eigen::ArrayXd& x2) {
  const int m = static_cast<int>(x1.size());
  const Eigen::MatrixXd d = fourier_diff(m);
  const Eigen::ArrayXd dx1 = (d * x1.matrix()).array();
  const Eigen::ArrayXd dx2 = (d * x2.matrix()).array();
  return 0.5 * (x1 * dx2 - x2 * dx1).sum() * (2.0 * std::numbers::pi / m);
}

}  // namespace mhd2d
