#pragma once

// Spectral collocation grids for the two reference domains: a polar grid on
// the unit disk (Chebyshev in radius with the double-cover trick, Fourier in
// angle) and a Chebyshev-Fourier grid on the annulus chart s in [0,1].

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <vector>

namespace mhd2d {

/// Grid function; rows index the radial coordinate, columns the angle.
using Field = Eigen::ArrayXXd;
using Vec2Field = std::array<Field, 2>;

/// Chebyshev-Gauss-Lobatto nodes cos(pi j/n), j = 0..n, and the collocation
/// differentiation matrix on [-1,1].
struct Chebyshev {
  Eigen::VectorXd nodes;
  Eigen::MatrixXd diff;
};

Chebyshev chebyshev(int n);

/// Periodic differentiation matrix on m equispaced points of [0, 2pi); m even.
Eigen::MatrixXd fourier_diff(int m);

/// Quadrature weights at the Chebyshev nodes cos(pi j/n) for a weight whose
/// Chebyshev moments int T_k(x) w(x) dx are given (k = 0..n).
Eigen::VectorXd chebyshev_quadrature(int n, const Eigen::VectorXd& moments);

/// Clenshaw-Curtis weights on [-1,1].
Eigen::VectorXd clenshaw_curtis(int n);

/// Weights integrating f(x)|x| over [-1,1].
Eigen::VectorXd abs_weighted_quadrature(int n);

enum class GridKind { disk, annulus };

class SpectralGrid {
 public:
  /// Disk grid with n_radial radii in (0,1] (rho_0 = 1 is the boundary) and
  /// n_angular angles. Radii are the positive half of a Chebyshev grid of
  /// 2*n_radial points, so the origin is never a node.
  static std::shared_ptr<const SpectralGrid> disk(int n_radial, int n_angular);

  /// Annulus chart grid: s_0 = 0 (inner boundary) ... s_{n-1} = 1 (outer).
  static std::shared_ptr<const SpectralGrid> annulus(int n_radial, int n_angular);

  GridKind kind() const { return kind_; }
  int n_radial() const { return n_radial_; }
  int n_angular() const { return n_angular_; }
  const Eigen::VectorXd& radial() const { return radial_; }
  const Eigen::VectorXd& angular() const { return angular_; }

  Field radial_field() const;
  Field angular_field() const;
  Field zeros() const { return Field::Zero(n_radial_, n_angular_); }
  Field constant(double v) const { return Field::Constant(n_radial_, n_angular_, v); }

  /// d/drho (disk) or d/ds (annulus) of a field that is a smooth function on
  /// the physical plane.
  Field d_radial(const Field& f) const;
  Field d_angular(const Field& f) const;

  /// Quadrature weights for the chart measure: rho drho dphi on the disk,
  /// ds dphi on the annulus.
  const Field& weights() const { return weights_; }

  /// rho on the disk, 1 on the annulus; det(dx/dxi) / chart_scale is smooth.
  Field chart_scale() const;

  /// Row indices carrying Dirichlet data (disk: {0}; annulus: {0, n-1}).
  std::vector<int> boundary_rows() const;

  /// Real Fourier basis (cos k phi, k = 0..m/2, then sin k phi, k = 1..m/2-1)
  /// sampled on the angular nodes, its inverse and the wavenumber per column.
  const Eigen::MatrixXd& fourier_basis() const { return basis_; }
  const Eigen::MatrixXd& fourier_basis_inverse() const { return basis_inv_; }
  const std::vector<int>& wavenumbers() const { return wavenumbers_; }

  /// Mode-k radial derivative matrices (first and second order) that act on
  /// the radial profile of cos/sin(k phi) components.
  Eigen::MatrixXd radial_diff_mode(int k, int order) const;

  /// Interpolate a field to a point given in chart coordinates.
  double interpolate(const Field& f, double radial, double angle) const;
  /// Interpolate a field onto the nodes of another grid of the same kind.
  Field resample(const Field& f, const SpectralGrid& target) const;

 private:
  SpectralGrid() = default;
  void init_angular(int n_angular);

  GridKind kind_ = GridKind::disk;
  int n_radial_ = 0;
  int n_angular_ = 0;
  Eigen::VectorXd radial_;
  Eigen::VectorXd angular_;
  Eigen::MatrixXd fdiff_;
  // Disk: the half-grid blocks of the full Chebyshev matrices; the second
  // block acts on the field shifted by pi.
  Eigen::MatrixXd d1_same_, d1_mirror_, d2_same_, d2_mirror_;
  // Annulus: d/ds and d2/ds2.
  Eigen::MatrixXd ds1_, ds2_;
  Field weights_;
  Eigen::MatrixXd basis_, basis_inv_;
  std::vector<int> wavenumbers_;
  Eigen::VectorXd cheb_full_nodes_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

/// Shift columns by half a period: f(rho, phi + pi).
Field shift_half_period(const Field& f);

/// Discrete L-infinity norm.
inline double max_abs(const Field& f) { return f.size() ? f.abs().maxCoeff() : 0.0; }

}  // namespace mhd2d
