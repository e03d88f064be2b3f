#pragma once

// Lagrangian kinematics: the flow map x(t, y) over a fixed label chart, the
// pulled-back metric g_ab = dx/dy^a . dx/dy^b with its Christoffel symbols,
// covariant differentiation of covariant tensors, time differencing at fixed
// label, and the divergence-free extension of the interface velocity into
// the vacuum.

#include "mhd2d/chart.hpp"
#include "mhd2d/tensor.hpp"

#include <functional>
#include <memory>

namespace mhd2d {

using ChartPtr = std::shared_ptr<const Chart>;

class FlowMap {
 public:
  /// The identity map on the given label chart at time t.
  FlowMap(ChartPtr labels, Domain domain, double t = 0.0);
  FlowMap(ChartPtr labels, Domain domain, Field x1, Field x2, double t);

  const ChartPtr& labels() const { return labels_; }
  Domain domain() const { return domain_; }
  double time() const { return t_; }
  const Field& x1() const { return x_[0]; }
  const Field& x2() const { return x_[1]; }
  const Vec2Field& position() const { return x_; }

  /// The chart of the current positions (throws map_degeneracy if folded).
  Chart current() const;
  /// F^i_a = dx^i/dy^a, stored at 2*i + a.
  std::array<Field, 4> jacobian() const;
  Field det() const;
  double det_drift() const;

 private:
  ChartPtr labels_;
  Domain domain_;
  Vec2Field x_;
  double t_;
};

/// Eulerian velocity as a function of time and position.
using VelocityFunction = std::function<Vec2Field(double t, const Field& x1, const Field& x2)>;

struct AdvanceOptions {
  double det_tolerance = 1e-6;
};

/// One classical RK4 step of dx/dt = v(t, x) for every node; throws
/// incompressibility_violation when |det dx/dy - 1| exceeds the tolerance.
FlowMap advance_map(const FlowMap& map, const VelocityFunction& v, double dt, const AdvanceOptions& options = {});

class MetricState {
 public:
  const ChartPtr& labels() const { return labels_; }
  const Field& g(int a, int b) const { return g_[a + b]; }
  const Field& ginv(int a, int b) const { return ginv_[a + b]; }
  /// Gamma^c_{ab}.
  const Field& christoffel(int c, int a, int b) const { return gamma_[4 * c + 2 * a + b]; }
  /// sqrt(det g): the density of d mu_g with respect to dy.
  const Field& volume() const { return volume_; }
  /// Largest |g^{ac} g_cb - delta^a_b| over the grid.
  double inverse_defect() const;

  /// Metric from components g11, g12, g22 (Christoffels by spectral
  /// differentiation on the label chart). Throws map_degeneracy unless SPD.
  static MetricState from_components(ChartPtr labels, Field g11, Field g12, Field g22);

 private:
  ChartPtr labels_;
  std::array<Field, 3> g_, ginv_;
  std::array<Field, 8> gamma_;
  Field volume_;
};

MetricState pullback_metric(const FlowMap& map);
MetricState flat_metric(ChartPtr labels);

/// nabla_a T_{b1...br}; the new index comes first.
TensorField covariant_derivative(const TensorField& T, const MetricState& metric);

/// Pull a Cartesian covariant tensor back to label components:
/// T_{a1..ar} = F^{i1}_{a1} ... F^{ir}_{ar} T_{i1..ir}.
TensorField pullback(const TensorField& eulerian, const std::array<Field, 4>& F);
/// Inverse of pullback.
TensorField pushforward(const TensorField& lagrangian, const std::array<Field, 4>& F);

/// Repeated Cartesian partial derivatives d_{i1}...d_{ir} T on a chart; the
/// new indices come first.
TensorField cartesian_derivative(const TensorField& T, const Chart& chart, int times = 1);

/// Raise every index with g^{ab}.
TensorField raise_all(const TensorField& T, const MetricState& metric);
/// Full contraction g^{a1b1}...g^{arbr} S_A T_B.
Field contract(const TensorField& S, const TensorField& T, const MetricState& metric);

/// Time derivative at fixed label from consecutive levels. Two levels give
/// the difference quotient (second order at the midpoint); an odd count of
/// three or more gives the derivative of the interpolating polynomial at the
/// middle level (order = count - 1).
TensorField material_derivative_field(const std::vector<TensorField>& levels, const std::vector<double>& times);

/// Covariant components of the rotated gradient: with w^a = eps^{ab} d_b q /
/// sqrt(det g) (eps^{12} = 1), returns w_a = g_ab w^b. On a flat chart this
/// is (d_2 q, -d_1 q).
TensorField perp_gradient(const TensorField& q, const MetricState& metric);

enum class TaperProfile {
  // chi(s) = (1-s)^k (1 + k s): a polynomial, so the stream function is
  // resolved exactly by the Chebyshev grid; v vanishes at W to order k-1.
  polynomial,
  // C-infinity cut-off equal to 1 for s <= band_start and 0 for s >= band_end;
  // v is identically zero near W but the divergence converges slowly.
  compact,
};

struct ExtensionOptions {
  TaperProfile profile = TaperProfile::polynomial;
  int order = 6;
  double band_start = 0.25;
  double band_end = 0.75;
  double min_gap = 1e-3;  // smallest admissible distance between Gamma and W
};

struct ExtendedVelocity {
  Vec2Field v;
  double flux_defect = 0.0;  // mean boundary flux removed before integrating
  double max_boundary_speed = 0.0;
  double max_speed = 0.0;
};

/// Divergence-free extension of the interface velocity (u1, u2 at the nodes
/// of row 0 of the vacuum chart) by a stream function
///   psi = chi(s) (psi_G - mean) + (lambda - mean lambda) s chi(s) + mean lambda int_0^s chi
/// that reproduces u on Gamma and vanishes at W. Throws geometry_failure when
/// the rows 0 and n-1 come closer than min_gap.
ExtendedVelocity extend_velocity_to_vacuum(const Eigen::ArrayXd& u1, const Eigen::ArrayXd& u2, const Chart& vacuum,
                                           const ExtensionOptions& options = {});

/// Taper chi(s) with chi(0) = 1, chi'(0) = 0, chi(1) = 0, and its derivative.
std::pair<double, double> taper(double s, const ExtensionOptions& options = {});

/// Brute-force symmetrisation over all index permutations (rank <= 4).
TensorField symmetrize(const TensorField& T);

/// (nabla^{k} u^d) . (nabla^{m} q): contraction of the last (raised) index of
/// the first factor with the last index of the second; indices ordered as
/// (first factor's free indices, second factor's free indices).
TensorField dot_last(const TensorField& grad_u, const TensorField& grad_q, const MetricState& metric);

}  // namespace mhd2d
