#pragma once

// Vacuum region between the interface Gamma (row 0) and the wall W (last
// row) of an annulus chart: the harmonic magnetic field, the electric
// potential Xi, the Faraday evolution of the field at fixed vacuum label,
// and the magnetic pressure q- = mu |H|^2 / 2.

#include "mhd2d/elliptic.hpp"
#include "mhd2d/kinematics.hpp"

#include <functional>

namespace mhd2d {

/// Annulus chart x = (1 - s) Gamma(phi) + s W(phi); both curves sampled at
/// the same angular nodes.
Chart annulus_chart(int n_radial, const Eigen::ArrayXd& gamma_x1, const Eigen::ArrayXd& gamma_x2,
                    const Eigen::ArrayXd& wall_x1, const Eigen::ArrayXd& wall_x2);

struct HarmonicField {
  Vec2Field H;          // Eulerian field
  Field psi;            // stream function, H = perp grad psi, psi = 0 on W
  double flux = 0.0;    // psi on Gamma minus psi on W
  double circulation = 0.0;
};

/// Unit harmonic potential: Delta psi0 = 0, psi0 = 1 on Gamma, 0 on W.
Field unit_potential(const Chart& vacuum, const PoissonSolver& solver = PoissonSolver(),
                     const ModalPreconditioner* preconditioner = nullptr);
/// The harmonic field with the given circulation around the annulus.
HarmonicField solve_harmonic_field(const Chart& vacuum, double circulation,
                                   const PoissonSolver& solver = PoissonSolver(),
                                   const ModalPreconditioner* preconditioner = nullptr);
/// The harmonic field with the given flux psi_Gamma - psi_W.
HarmonicField solve_harmonic_flux(const Chart& vacuum, double flux, const PoissonSolver& solver = PoissonSolver(),
                                  const ModalPreconditioner* preconditioner = nullptr);

/// Counterclockwise line integral of H along a chart row; rows outside the
/// chart raise geometry_failure.
double circulation(const Chart& vacuum, const Vec2Field& H, int row);
/// Flux of H across the annulus, psi_Gamma - psi_W, from the integral of
/// grad psi = (-H2, H1) along the chart columns (averaged over columns).
double flux_across(const Chart& vacuum, const Vec2Field& H);

struct VacuumResiduals {
  double div = 0.0;
  double curl = 0.0;
  double normal_gamma = 0.0;
  double normal_wall = 0.0;
  double max() const;
};

/// Max-norm residuals of div H, curl H and H . N on both boundaries,
/// relative to max |H| (absolute when H vanishes).
VacuumResiduals vacuum_residuals(const Chart& vacuum, const Vec2Field& H);

struct MixedProblemData {
  Eigen::ArrayXd f1;  // Dirichlet trace on Gamma
  Eigen::ArrayXd f2;  // oblique trace on Gamma (diagnostic)
};

/// f1 = u_N (H1 N2 - H2 N1), f2 = (d_a u_d) N^d H^a - N^d u^a d_a H_d at the
/// interface nodes, with v the (extended) velocity on the vacuum chart.
MixedProblemData mixed_problem_data(const Chart& vacuum, const Vec2Field& v, const Vec2Field& H);

struct ElectricField {
  Field Xi;
  MixedProblemData data;
  Eigen::ArrayXd oblique_residual;  // (N2, -N1) . grad Xi - f2 on Gamma
  double oblique_l2 = 0.0;          // L2(Gamma) norm of oblique_residual
};

/// Delta Xi = 0, Xi = f1 on Gamma, Xi = 0 on W; the oblique datum is only
/// measured.
ElectricField solve_electric_field(const Chart& vacuum, const Vec2Field& v, const Vec2Field& H,
                                   const PoissonSolver& solver = PoissonSolver(),
                                   const ModalPreconditioner* preconditioner = nullptr, const Field* guess = nullptr);

struct VacuumState {
  FlowMap map;
  TensorField varpi;  // covariant label components of H
  Field Xi;
  double mu = 1.0;
};

/// Eulerian field H of a vacuum state on its current chart.
Vec2Field vacuum_field(const VacuumState& state);
/// mu |H|^2 / 2 over the vacuum chart.
Field magnetic_pressure(const Vec2Field& H, double mu);
/// Row 0 (Gamma) of the magnetic pressure.
Eigen::ArrayXd q_minus_trace(const Vec2Field& H, double mu);

/// Vacuum state with the identity map on the chart and a given field.
VacuumState make_vacuum_state(ChartPtr labels, const Vec2Field& H, double mu);

/// D_t varpi = -perp grad Xi + u^b nabla_b varpi + varpi_b nabla u^b in label
/// components, with v the Eulerian (extended) velocity on the current chart.
TensorField faraday_rhs(const VacuumState& state, const Vec2Field& v, const Field& Xi);

/// Extended vacuum velocity on the current vacuum chart at time t.
using VacuumVelocity = std::function<Vec2Field(const Chart& vacuum, double t)>;

struct VacuumStepOptions {
  bool project_harmonic = false;       // re-project onto the harmonic field with the same flux
  double consistency_limit = 1e-3;     // relative residual above which the step fails
  GmresOptions gmres;
};

struct VacuumStepReport {
  VacuumResiduals residuals;
  double projection_correction = 0.0;
  double oblique_l2 = 0.0;
  int iterations = 0;
};

/// One RK4 step of the vacuum positions and field with a Xi solve per stage.
VacuumState evolve_vacuum(const VacuumState& state, const VacuumVelocity& velocity, double dt,
                          const VacuumStepOptions& options = {}, VacuumStepReport* report = nullptr);

/// Residual of D_t perp grad Xi = u^b nabla_b perp grad Xi + nabla u^b perp grad_b Xi
/// (the relation for an Eulerian-steady Xi), max norm over the rows with
/// band_start <= s <= band_end. The evaluation level is the later of two
/// levels (first order in dt) or the middle of three (second order); v is
/// the Eulerian velocity there.
double evolve_perp_xi_check(const std::vector<FlowMap>& maps, const std::vector<Field>& Xi,
                            const Vec2Field& v, double band_start = 0.2, double band_end = 0.8);

}  // namespace mhd2d
