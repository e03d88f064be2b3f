#pragma once

// Closed curves (the free interface and the wall) and the boundary geometry
// consumed by the energies: normals, induced metric, curvature, injectivity
// radii, distance to the curve and the cut-off co-metric q.

#include "mhd2d/tensor.hpp"

#include <string>

namespace mhd2d {

/// A closed curve sampled at uniformly spaced parameters 2 pi k / n.
class ClosedCurve {
 public:
  /// Validates: n even and >= 8, distinct nodes, no self-intersection, positive
  /// enclosed area (counterclockwise orientation).
  ClosedCurve(Eigen::ArrayXd x1, Eigen::ArrayXd x2, bool is_fixed = false);

  static ClosedCurve circle(int n, double radius, double c1 = 0.0, double c2 = 0.0, bool is_fixed = false);
  static ClosedCurve ellipse(int n, double a, double b, bool is_fixed = false);
  /// r(phi) = radius (1 + amplitude cos(mode phi)).
  static ClosedCurve perturbed_circle(int n, double radius, double amplitude, int mode, bool is_fixed = false);

  int n_nodes() const { return static_cast<int>(x1_.size()); }
  const Eigen::ArrayXd& x1() const { return x1_; }
  const Eigen::ArrayXd& x2() const { return x2_; }
  Eigen::ArrayXd params() const;
  bool is_fixed() const { return is_fixed_; }
  double signed_area() const;

  /// Trigonometric interpolant and its first two parameter derivatives.
  struct Sample {
    double x1, x2, dx1, dx2, ddx1, ddx2;
  };
  Sample evaluate(double param) const;

 private:
  Eigen::ArrayXd x1_, x2_;
  bool is_fixed_;
  Eigen::VectorXd coef1_, coef2_;  // real Fourier coefficients
};

struct GeometryOptions {
  double epsilon1 = 0.5;
};

struct InterfaceGeometry {
  // Outward unit normal with respect to the enclosed region. In the Cartesian
  // frame the normal and conormal components coincide.
  Eigen::ArrayXd n1, n2;
  Eigen::ArrayXd t1, t2;                // counterclockwise unit tangent
  Eigen::ArrayXd gamma11, gamma12, gamma22;  // gamma_ij = delta_ij - N_i N_j
  Eigen::ArrayXd theta;                 // second fundamental form (curvature)
  Eigen::ArrayXd mean_curvature;        // tr theta; equals theta for curves
  Eigen::ArrayXd speed;                 // |dx/dparam|
  double iota0 = 0.0;
  double iota1 = 0.0;
  double K = 0.0;
  double epsilon1 = 0.5;
};

InterfaceGeometry compute_geometry(const ClosedCurve& curve, const GeometryOptions& options = {});

/// Contract every index of a boundary tensor (fields with one row and one
/// column per node) with gamma.
TensorField project_tangential(const TensorField& T, const InterfaceGeometry& geom);

struct DistanceResult {
  Field d;             // distance to the curve (>= 0)
  Field xbar1, xbar2;  // nearest boundary point
  Field n1, n2;        // outward normal at the nearest point
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> inside;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> far;  // outside the tubular neighbourhood or ambiguous
};

/// Distance from each point to the curve. Points are flagged far when the
/// nearest point is ambiguous or, if iota0 > 0 is given, when d >= iota0.
/// `cutoff` > 0 skips the refinement for points farther than it (their
/// distance is then the nearest-node distance).
DistanceResult signed_distance(const ClosedCurve& curve, const Field& x1, const Field& x2, double iota0 = 0.0,
                               double cutoff = 0.0);

/// C-infinity cut-off: 1 for d <= d0/4, 0 for d >= d0/2.
double cutoff_eta(double d, double d0);

struct CutoffCometric {
  double d0 = 0.0;
  Field d, eta;
  Field n1, n2;
  Field q11, q12, q22;  // q^{ij} = delta^{ij} - eta^2 n^i n^j
};

/// Throws configuration_error when d0 >= iota0.
CutoffCometric cutoff_cometric(const ClosedCurve& curve, const InterfaceGeometry& geom, const Field& x1,
                               const Field& x2, double d0);

void write_curve_csv(const ClosedCurve& curve, const std::string& path);
ClosedCurve read_curve_csv(const std::string& path, bool is_fixed = false);
/// Per-node arrays and the scalar summaries iota0, iota1, K.
std::string geometry_report_json(const InterfaceGeometry& geom);

}  // namespace mhd2d
