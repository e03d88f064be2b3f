#include "mhd2d/elliptic.hpp"

#include "mhd2d/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace mhd2d {

namespace {

constexpr int stall_window = 10;

Eigen::VectorXd flatten(const Field& f) { return Eigen::Map<const Eigen::VectorXd>(f.data(), f.size()); }

Field unflatten(const Eigen::VectorXd& v, int rows, int cols) {
  return Eigen::Map<const Eigen::ArrayXXd>(v.data(), rows, cols);
}

}  // namespace

Eigen::VectorXd gmres(const LinearMap& apply, const LinearMap& precondition, const Eigen::VectorXd& rhs,
                      const Eigen::VectorXd& guess, const GmresOptions& options, SolveStats* stats) {
  const double bnorm = rhs.norm();
  Eigen::VectorXd x = guess;
  if (bnorm == 0.0) {
    x.setZero();
    if (stats) *stats = {0, 0.0};
    return x;
  }
  const double target = std::max(options.tolerance * bnorm, options.absolute_tolerance);
  const double accept = 1e3 * options.tolerance * bnorm + options.absolute_tolerance;
  const int m = options.restart;
  int total = 0;
  double rnorm = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  while (true) {
    Eigen::VectorXd r = rhs - apply(x);
    rnorm = r.norm();
    if (rnorm <= target || total >= options.max_iterations) break;
    // A restart cycle that does not halve the residual has hit the round-off
    // floor of the collocation operator.
    if (rnorm > 0.5 * previous) break;
    previous = rnorm;
    Eigen::MatrixXd v(rhs.size(), m + 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(m), sn = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    g(0) = rnorm;
    v.col(0) = r / rnorm;
    int j = 0;
    bool stalled = false;
    for (; j < m && total < options.max_iterations; ++j, ++total) {
      Eigen::VectorXd w = apply(precondition(v.col(j)));
      for (int i = 0; i <= j; ++i) {
        h(i, j) = w.dot(v.col(i));
        w -= h(i, j) * v.col(i);
      }
      // One reorthogonalization pass keeps the basis clean near round-off.
      for (int i = 0; i <= j; ++i) {
        const double c = w.dot(v.col(i));
        h(i, j) += c;
        w -= c * v.col(i);
      }
      h(j + 1, j) = w.norm();
      if (h(j + 1, j) > 0.0) v.col(j + 1) = w / h(j + 1, j);
      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * h(i, j) + sn(i) * h(i + 1, j);
        h(i + 1, j) = -sn(i) * h(i, j) + cs(i) * h(i + 1, j);
        h(i, j) = t;
      }
      const double denom = std::hypot(h(j, j), h(j + 1, j));
      cs(j) = denom > 0.0 ? h(j, j) / denom : 1.0;
      sn(j) = denom > 0.0 ? h(j + 1, j) / denom : 0.0;
      h(j, j) = denom;
      h(j + 1, j) = 0.0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);
      if (std::abs(g(j + 1)) <= target || h(j, j) == 0.0) {
        ++j;
        ++total;
        break;
      }
      // No halving over the last stall_window iterations while within the
      // accepted band: the residual sits at the round-off floor and a
      // restart would stall again.
      if (j >= stall_window && std::abs(g(j + 1)) <= accept &&
          std::abs(g(j + 1)) > 0.5 * std::abs(g(j + 1 - stall_window))) {
        stalled = true;
        ++j;
        ++total;
        break;
      }
    }
    const Eigen::VectorXd y =
        h.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    x += precondition(v.leftCols(j) * y);
    if (stalled) {
      rnorm = (rhs - apply(x)).norm();
      break;
    }
  }
  if (stats) *stats = {total, rnorm / bnorm};
  if (rnorm > target) {
    // Accept solutions that stagnate at round-off level of the data.
    if (rnorm > accept)
      throw EllipticError("GMRES did not converge", rnorm / bnorm);
  }
  return x;
}

ModalPreconditioner::ModalPreconditioner(GridPtr grid, double inner, double outer)
    : grid_(std::move(grid)), inner_(inner), outer_(outer) {
  const auto& g = *grid_;
  const int n = g.n_radial();
  const int kmax = g.n_angular() / 2;
  const Eigen::VectorXd& rad = g.radial();
  lu_.reserve(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    const Eigen::MatrixXd d1 = g.radial_diff_mode(k, 1);
    const Eigen::MatrixXd d2 = g.radial_diff_mode(k, 2);
    Eigen::MatrixXd l(n, n);
    if (g.kind() == GridKind::disk) {
      const Eigen::VectorXd r = outer * rad;
      const double s = 1.0 / (outer * outer);
      l = s * d2;
      for (int i = 0; i < n; ++i) {
        l.row(i) += (1.0 / (outer * r(i))) * d1.row(i);
        l(i, i) -= k * k / (r(i) * r(i));
      }
      l.row(0).setZero();
      l(0, 0) = 1.0;
    } else {
      const double width = outer - inner;
      const Eigen::VectorXd r = (inner + width * rad.array()).matrix();
      l = d2 / (width * width);
      for (int i = 0; i < n; ++i) {
        l.row(i) += (1.0 / (width * r(i))) * d1.row(i);
        l(i, i) -= k * k / (r(i) * r(i));
      }
      l.row(0).setZero();
      l(0, 0) = 1.0;
      l.row(n - 1).setZero();
      l(n - 1, n - 1) = 1.0;
    }
    lu_.emplace_back(l);
  }
}

Field ModalPreconditioner::apply(const Field& rhs) const {
  const auto& g = *grid_;
  const Eigen::MatrixXd modal = rhs.matrix() * g.fourier_basis_inverse().transpose();
  Eigen::MatrixXd sol(modal.rows(), modal.cols());
  const auto& ks = g.wavenumbers();
  for (int c = 0; c < modal.cols(); ++c) sol.col(c) = lu_[ks[c]].solve(modal.col(c));
  return (sol * g.fourier_basis().transpose()).array();
}

std::pair<double, double> reference_radii(const Chart& chart) {
  const auto& g = chart.grid();
  if (g.kind() == GridKind::disk) return {0.0, std::sqrt(chart.area() / std::numbers::pi)};
  const int last = g.n_radial() - 1;
  const double a_in = enclosed_area(chart.x1().row(0).transpose(), chart.x2().row(0).transpose());
  const double a_out = enclosed_area(chart.x1().row(last).transpose(), chart.x2().row(last).transpose());
  return {std::sqrt(a_in / std::numbers::pi), std::sqrt(a_out / std::numbers::pi)};
}

Field PoissonSolver::residual(const Chart& chart, const Field& q, const Field& rhs, const Field& boundary) {
  Field r = chart.laplacian(q) - rhs;
  for (int row : chart.grid().boundary_rows()) r.row(row) = q.row(row) - boundary.row(row);
  return r;
}

Field PoissonSolver::solve(const Chart& chart, const Field& rhs, const Field& boundary, SolveStats* stats,
                           const ModalPreconditioner* preconditioner, const Field* guess) const {
  const auto& g = chart.grid();
  const int rows = g.n_radial(), cols = g.n_angular();
  std::optional<ModalPreconditioner> own;
  if (!preconditioner) {
    const auto [inner, outer] = reference_radii(chart);
    own.emplace(chart.grid_ptr(), inner, outer);
    preconditioner = &*own;
  }
  const auto brows = g.boundary_rows();
  Field b = rhs;
  for (int row : brows) b.row(row) = boundary.row(row);
  auto apply = [&](const Eigen::VectorXd& v) {
    const Field q = unflatten(v, rows, cols);
    Field out = chart.laplacian(q);
    for (int row : brows) out.row(row) = q.row(row);
    return flatten(out);
  };
  auto precond = [&](const Eigen::VectorXd& v) { return flatten(preconditioner->apply(unflatten(v, rows, cols))); };
  const Eigen::VectorXd x0 = guess ? flatten(*guess) : Eigen::VectorXd(flatten(preconditioner->apply(b)));
  const Eigen::VectorXd x = gmres(apply, precond, flatten(b), x0, options_, stats);
  return unflatten(x, rows, cols);
}

}  // namespace mhd2d
