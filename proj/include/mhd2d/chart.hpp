#pragma once

// A chart is a spectral grid together with the Cartesian position of every
// node. All calculus on moving domains goes through the chart Jacobian
// dx/dxi, so derivatives are Euclidean derivatives evaluated at the nodes.

#include "mhd2d/spectral.hpp"

namespace mhd2d {

/// Quantities along one boundary row of a chart.
struct BoundaryRow {
  Eigen::ArrayXd x1, x2;
  Eigen::ArrayXd t1, t2;      // unit tangent, counterclockwise
  Eigen::ArrayXd n1, n2;      // unit normal, orientation chosen by the caller
  Eigen::ArrayXd speed;       // |dx/dphi|
  Eigen::ArrayXd line_weight; // speed * dphi: integrates against dS
};

class Chart {
 public:
  Chart(GridPtr grid, Field x1, Field x2);

  const SpectralGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Field& x1() const { return x_[0]; }
  const Field& x2() const { return x_[1]; }
  const Vec2Field& position() const { return x_; }

  /// dx^i/dxi^a with xi = (radial, angular).
  const Field& jacobian(int i, int a) const { return jac_[2 * i + a]; }
  /// dxi^a/dx^i.
  const Field& inverse_jacobian(int a, int i) const { return inv_[2 * a + i]; }
  /// det(dx/dxi).
  const Field& det() const { return det_; }
  /// det(dx/dxi) / chart_scale: the smooth area density.
  Field area_density() const;

  Vec2Field grad(const Field& f) const;
  Field partial(const Field& f, int i) const;
  Field div(const Vec2Field& v) const;
  /// d1 v2 - d2 v1.
  Field curl(const Vec2Field& v) const;
  Field laplacian(const Field& f) const;
  /// (d2 f, -d1 f).
  Vec2Field perp_grad(const Field& f) const;

  /// Integral over the physical domain.
  double integrate(const Field& f) const;
  double area() const;

  /// Boundary row data with the normal pointing to the right of the
  /// counterclockwise tangent (outward for a region the row encloses).
  BoundaryRow boundary_row(int row) const;
  /// Integral along a row of a quantity given per angular node.
  double line_integral(int row, const Eigen::ArrayXd& values) const;

 private:
  GridPtr grid_;
  Vec2Field x_;
  std::array<Field, 4> jac_;
  std::array<Field, 4> inv_;
  Field det_;
};

/// Unit disk x = rho (cos phi, sin phi) on a disk grid.
Chart disk_chart(const GridPtr& grid);

/// The map z -> z + a conj(z)^(m-1) applied to points; its image of the unit
/// circle is close to r = 1 + a cos(m phi). Throws geometry_failure unless
/// a (m - 1) < 1 (the map would fold the unit disk).
Vec2Field perturbed_disk_map(const Field& y1, const Field& y2, double amplitude, int mode);
/// The unit disk grid carried through perturbed_disk_map.
Chart perturbed_disk_chart(const GridPtr& grid, double amplitude, int mode);

/// Area enclosed by a closed polygon-like curve given by spectral samples
/// (computed with the spectral derivative, exact for trigonometric data).
double enclosed_area(const Eigen::ArrayXd& x1, const Eigen::ArrayXd& x2);

}  // namespace mhd2d
