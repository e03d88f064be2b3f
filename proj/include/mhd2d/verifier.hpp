#pragma once

// Residual checks of the exact identities behind the model (Gauss formula,
// metric and commutator rates along the flow, boundary evolution, projected
// derivatives on the interface, the pressure identity) and fitted constants
// for the inequalities (div-curl, traces, vacuum derivative ratios, elliptic
// estimate). Each check runs over a family of resolutions and reports a
// measured convergence order or the growth of its fitted constant.

#include "mhd2d/kinematics.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mhd2d {

// ---- single-resolution residuals -------------------------------------------

/// |int nabla_a F^a dmu_g - int N_a F^a dmu_gamma| on the label chart of the
/// metric, F given by contravariant label components. Disk charts have one
/// boundary (row 0); annulus charts two, with the normal pointing out of the
/// annulus on both.
double gauss_residual(const MetricState& metric, const Vec2Field& F);

struct GaussSides {
  double interior = 0.0;  // int nabla_a F^a dmu_g
  double boundary = 0.0;  // int N_a F^a dmu_gamma
};
GaussSides gauss_sides(const MetricState& metric, const Vec2Field& F);

struct ProjectionResidual {
  double second = 0.0;  // t.t : grad^2 q - (f'' + kappa q_N)
  double third = 0.0;   // grad^3 q (t,t,t) - (f''' - 2 kappa^2 f' + kappa' q_N + 3 kappa d_s q_N)
  double max() const { return std::max(second, third); }
};

/// Tangential projections of the Hessian and third derivative of q on row 0
/// of the chart against their expressions through the arclength derivatives
/// of f = q on the curve, the curvature kappa and the normal derivative q_N.
/// Max norm over the boundary nodes.
ProjectionResidual projection_identity_residual(const Chart& chart, const Field& q);

struct BoundaryEvolutionResidual {
  double normal = 0.0;  // D_t N_a - h_NN N_a
  double length = 0.0;  // D_t |dx/dphi| - (tr h - h_NN) |dx/dphi|
  double max() const { return std::max(normal, length); }
};

/// Rates of the covariant normal and of the boundary length element of row 0,
/// by time differencing flow-map levels at fixed label (two, or an odd count).
/// v is the Eulerian velocity at the middle level, or at the midpoint of two
/// levels. Throws insufficient_history with fewer than two levels.
BoundaryEvolutionResidual boundary_evolution_residual(const std::vector<FlowMap>& maps, const Vec2Field& v);

/// Pointwise div-curl constant on the boundary rows of the chart:
///   max |grad w|^2 / (|tangential grad w|^2 + |div w|^2 + |curl w|^2)
/// for w = grad^r f, r in {0, 1}; the tangential term contracts the
/// derivative index and the indices of grad^r with the unit tangent. The
/// denominator is floored at `floor` times the largest |grad w|^2.
double divcurl_constant(const Chart& chart, const Vec2Field& f, int r, double floor = 1e-12);

/// Max over interior nodes of |Delta q + d_i v^j d_j v^i - mu d_i H^j d_j H^i|.
double pressure_identity_residual(const Chart& chart, const Vec2Field& v, const Vec2Field& H, double mu,
                                  const Field& q);

// ---- fitted constants ---------------------------------------------------------

/// L2 norm over the chart of the pointwise Frobenius norm.
double l2_norm(const Chart& chart, const TensorField& T);
/// L2 (p = 2) or L1 (p = 1) norm over all boundary rows.
double boundary_norm(const Chart& chart, const TensorField& T, int p = 2);

/// max(|curvature|, 1/iota0) over the boundary curves of the chart.
double geometric_bound(const Chart& chart);

/// |grad^{r+1} H|_{L2} / (K |grad^r H|_{L2}) for r = 0, 1, 2.
std::array<double, 3> vacuum_derivative_ratios(const Chart& vacuum, const Vec2Field& H, double K);
/// |grad^r H|^2_{L2(boundary)} / (K |grad^r H|^2_{L2}).
double vacuum_boundary_ratio(const Chart& vacuum, const Vec2Field& H, double K, int r);
/// |alpha|_{L1(boundary)} / (|grad alpha|_{L1} + |alpha|_{L1}).
double trace_constant(const Chart& chart, const TensorField& alpha);
/// (|grad^{r-1} q|_{L2(Gamma)} + |grad^r q|_{L2}) /
/// (|Pi grad^r q|_{L2(Gamma)} + sum_{s <= r-2} |grad^s Delta q|_{L2}), r in {2, 3}.
double elliptic_constant(const Chart& chart, const Field& q, int r);

// ---- reports and the suite ----------------------------------------------------

enum class NormKind { linf, l2 };
enum class CheckKind { identity, inequality };
enum class CheckStatus { passed, failed, invariant_violation };

struct LevelResult {
  std::string resolution;
  double h = 0.0;  // refinement parameter (grid spacing or time step)
  double value = 0.0;
};

struct ResidualReport {
  std::string check_name;
  CheckKind kind = CheckKind::identity;
  NormKind norm_used = NormKind::linf;
  double residual = 0.0;  // finest level: residual or fitted constant
  std::string resolution;
  std::optional<double> convergence_order;  // identities, two or more levels above the floor
  std::optional<double> growth;             // inequalities: largest ratio of consecutive constants
  std::vector<LevelResult> levels;
  bool at_floor = false;    // finest residual at roundoff; order not measurable
  bool unreliable = false;  // non-monotone residuals
  CheckStatus status = CheckStatus::passed;
  std::string message;
};

struct Criteria {
  double tolerance = 1e-6;  // finest identity residual
  double min_order = 2.0;
  double max_growth = 2.0;
  double floor = 1e-12;     // residuals below count as roundoff
  // Pairwise estimates of an exact order-p method scatter around p; orders
  // within this margin of the target count as attained.
  double order_slack = 0.05;
};

/// Build a report from per-level residuals (coarse to fine). The order is the
/// smallest pairwise order among pairs whose finer residual is above the floor.
ResidualReport identity_report(const std::string& name, NormKind norm, std::vector<LevelResult> levels,
                               const Criteria& criteria = {}, double min_order = -1.0);
/// Build a report from per-level fitted constants (coarse to fine).
ResidualReport inequality_report(const std::string& name, NormKind norm, std::vector<LevelResult> levels,
                                 const Criteria& criteria = {});

struct SuiteConfig {
  std::vector<std::string> checks;  // names; all checks when absent
  bool all_checks = true;
  std::uint64_t seed = 0;
  bool broken_metric = false;       // corrupt the metric to exercise invariant detection
  Criteria criteria;
  bool parallel = true;
};

/// Names of every available check, sorted.
std::vector<std::string> check_names();
/// Parse a JSON suite configuration (keys: checks, seed, broken_metric,
/// tolerance, min_order, max_growth, parallel); throws configuration_error.
SuiteConfig suite_config_from_json(const std::string& text);
SuiteConfig load_suite_config(const std::string& path);

/// Run the selected checks (concurrently unless disabled); failures are
/// recorded per check. Reports are sorted by name.
std::vector<ResidualReport> run_suite(const SuiteConfig& config);
/// Run a single named check.
ResidualReport run_check(const std::string& name, const SuiteConfig& config = {});

bool suite_passed(const std::vector<ResidualReport>& reports);
std::string suite_table(const std::vector<ResidualReport>& reports);
std::string suite_json(const std::vector<ResidualReport>& reports);

std::string to_string(CheckStatus status);

}  // namespace mhd2d
