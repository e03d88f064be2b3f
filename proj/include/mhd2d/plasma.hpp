#pragma once

// Plasma region: Lagrangian evolution of the covariant velocity u_a and
// magnetic field beta_a (label components), the total-pressure Poisson
// problem with Dirichlet data from the vacuum, and the Taylor sign monitor.

#include "mhd2d/elliptic.hpp"
#include "mhd2d/kinematics.hpp"

#include <functional>
#include <optional>

namespace mhd2d {

struct PlasmaState {
  FlowMap map;
  TensorField u;     // u_a
  TensorField beta;  // beta_a
  Field q_plus;
  double mu = 1.0;
  bool pressure_fresh = false;
};

/// Cartesian view of a plasma state at one instant.
struct EulerianPlasma {
  Chart chart;
  std::array<Field, 4> F;  // dx^i/dy^a
  Vec2Field v, H;
};

EulerianPlasma eulerian(const PlasmaState& state);
/// Label components of Cartesian fields.
TensorField to_labels(const Vec2Field& w, const std::array<Field, 4>& F, Domain domain = Domain::plasma);

struct PressureProblem {
  Field rhs;                 // interior right-hand side
  Eigen::ArrayXd dirichlet;  // q^- on Gamma, per boundary node
};

/// Delta q+ = -d_i v^j d_j v^i + mu d_i H^j d_j H^i with q+ = q- on Gamma.
PressureProblem pressure_problem(const Chart& chart, const Vec2Field& v, const Vec2Field& H, double mu,
                                 const Eigen::ArrayXd& q_minus);

/// Solves the pressure problem; boundary values equal the data exactly.
Field pressure_solve(const PressureProblem& problem, const Chart& chart, const PoissonSolver& solver = PoissonSolver(),
                     const ModalPreconditioner* preconditioner = nullptr, const Field* guess = nullptr,
                     SolveStats* stats = nullptr);

/// D_t u_a = u^c nabla_a u_c + mu beta^d nabla_d beta_a - nabla_a q+.
/// Throws sequencing_error when the state's pressure is stale.
TensorField momentum_rhs(const PlasmaState& state);
/// D_t beta_a = beta^d nabla_d u_a + beta^c nabla_a u_c.
TensorField induction_rhs(const PlasmaState& state);

struct TaylorSign {
  Eigen::ArrayXd grad_n_P;  // N . (grad q+ - grad q-) per Gamma node
  double margin = 0.0;      // -max grad_n_P
  bool violated = false;    // margin <= 0
  bool degenerate = false;  // grad_n_P vanishes identically
};

/// One-sided normal derivatives of q+ (plasma chart) and q- (vacuum chart,
/// optional) at the interface nodes.
TaylorSign taylor_sign(const Chart& plasma, const Field& q_plus, const Chart* vacuum = nullptr,
                       const Field* q_minus = nullptr, double degenerate_tolerance = 1e-10);

/// Dirichlet (phi = 0 on Gamma) Leray projection w -> w - grad phi with
/// Delta phi = div w. Returns the projected field and the max |grad phi|.
/// The solve is converged relative to the gradient norm of w, or to
/// reference_scale when larger (w itself may be pure roundoff).
std::pair<Vec2Field, double> leray_project(const Chart& chart, const Vec2Field& w, const PoissonSolver& solver,
                                           const ModalPreconditioner* preconditioner = nullptr,
                                           double reference_scale = 0.0);

/// Frobenius norm of the nodal Cartesian gradient of w.
double gradient_scale(const Chart& chart, const Vec2Field& w);

/// q- on Gamma as a function of the current plasma chart.
using QMinusProvider = std::function<Eigen::ArrayXd(const Chart& plasma)>;

struct PlasmaStepOptions {
  bool divergence_cleaning = true;
  double cfl_limit = 0.5;
  GmresOptions gmres;
};

struct PlasmaStepReport {
  double cleaning_u = 0.0;
  double cleaning_beta = 0.0;
  double cfl = 0.0;
  bool stability_warning = false;
  int pressure_iterations = 0;
};

/// Rates of the plasma variables at one stage, with the stage pressure.
struct PlasmaRates {
  Vec2Field dx;
  TensorField du, dbeta;
  Field q_plus;
};

/// Evaluate all plasma rates for the given state and q- trace.
PlasmaRates plasma_rates(const PlasmaState& state, const Eigen::ArrayXd& q_minus, const PoissonSolver& solver,
                         const ModalPreconditioner* preconditioner = nullptr, SolveStats* stats = nullptr);

/// Smallest distance between neighbouring nodes of a chart.
double min_spacing(const Chart& chart);

/// Project u and beta of a state onto divergence-free fields; returns the
/// correction magnitudes (max |grad phi|) for u and beta.
std::pair<double, double> clean_divergence(PlasmaState& state, const PoissonSolver& solver,
                                           const ModalPreconditioner* preconditioner = nullptr);

/// One RK4 step of (x, u, beta) with a pressure solve per stage.
PlasmaState step_plasma(const PlasmaState& state, double dt, const QMinusProvider& q_minus,
                        const PlasmaStepOptions& options = {}, PlasmaStepReport* report = nullptr);

}  // namespace mhd2d
