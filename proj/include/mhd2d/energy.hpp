#pragma once

// Energies E0..E3 of the plasma-vacuum system, the weighted boundary form,
// and the bound-tracking quantities monitored along a run.

#include "mhd2d/geometry.hpp"
#include "mhd2d/plasma.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mhd2d {

/// Eulerian snapshot the energies are evaluated on.
struct EnergyFields {
  Chart plasma;
  Vec2Field v, H;
  Field q_plus;
  double mu = 1.0;
  std::optional<Chart> vacuum;  // row 0 must coincide with the plasma boundary
  Vec2Field H_vacuum;
};

EnergyFields energy_fields(const PlasmaState& plasma, const Chart* vacuum = nullptr,
                           const Vec2Field* H_vacuum = nullptr);

struct EnergyOptions {
  double d0_ratio = 0.5;  // d0 = d0_ratio * iota0
  double epsilon1 = 0.5;
};

/// Cometric q^{ij} over the plasma nodes and the boundary weight
/// theta = (-grad_N P)^{-1}, defined only where the Taylor sign holds.
struct WeightedForm {
  CutoffCometric cometric;
  Eigen::ArrayXd grad_n_P;
  Eigen::ArrayXd weight;  // vartheta per Gamma node (0 where undefined)
  bool weight_defined = false;
};

ClosedCurve interface_curve(const Chart& plasma);
WeightedForm weighted_form(const EnergyFields& f, const ClosedCurve& gamma, const InterfaceGeometry& geom,
                           const EnergyOptions& options = {});

/// Q(alpha, beta) of two rank-r Cartesian tensors whose first `n_q` indices
/// are contracted with q and the rest with delta.
Field cometric_product(const TensorField& a, const TensorField& b, const Field& q11, const Field& q12,
                       const Field& q22, int n_q);

/// Integral over Omega+ of |v|^2/2 + mu |H|^2/2 plus the vacuum magnetic energy.
double e0(const EnergyFields& f);

struct EnergyTerm {
  double value = 0.0;
  double interior = 0.0;  // Q-norms of d^r v and d^r H
  double curl = 0.0;      // |d^{r-1} curl v|^2 + mu |d^{r-1} curl H|^2
  double boundary = 0.0;  // Q(d^r P, d^r P) vartheta on Gamma (r >= 2)
  bool boundary_omitted = false;
};

/// E_r for r = 1, 2, 3. The boundary term is included for r >= 2 when the
/// weight is defined, otherwise omitted and marked.
EnergyTerm e_r(const EnergyFields& f, int r, const WeightedForm& form);

struct EnergyReport {
  double t = 0.0;
  std::array<double, 4> E{};
  std::array<EnergyTerm, 3> terms{};
  double K_cal = 0.0;
  double E_cal = 0.0;
  bool E_cal_infinite = false;
  double M = 0.0;
  double L = 0.0;
  bool L_complete = false;  // |grad_N D_t P| needs a previous pressure level
  double taylor_margin = 0.0;
  bool taylor_violated = false;
  double vol_omega = 0.0;
  std::vector<std::string> flags;
};

/// Previous plasma pressure at fixed label, for D_t P.
struct PressureHistory {
  Field q_plus;
  double t = 0.0;
};

/// K = max(|theta|_inf, 1/iota0), E = |1/grad_N P|_inf, M = sup (|grad P| +
/// |grad v| + |grad H|), L = sup_Gamma (|grad^2 P| + |grad_N D_t P|).
struct Bounds {
  double K_cal = 0.0, E_cal = 0.0, M = 0.0, L = 0.0;
  bool E_cal_infinite = false;
  bool L_complete = false;
};
Bounds track_bounds(const EnergyFields& f, const InterfaceGeometry& geom, const WeightedForm& form,
                    double t, const PressureHistory* previous = nullptr);

/// Full report at one instant.
EnergyReport energy_report(const EnergyFields& f, double t, const EnergyOptions& options = {},
                           const PressureHistory* previous = nullptr);

struct TheoremMonitor {
  double T_obs = 0.0;
  bool reached_horizon = false;
  bool sign_violated = false;
  bool ecal_within_bound = false;  // E_cal(t) <= 2 E_cal(0) for t <= T_obs
};

/// Largest T with sum_s E_s(t) <= 2 sum_s E_s(0) on [0, T]; a Taylor sign
/// violation in any report is reported instead of T.
TheoremMonitor theorem1_monitor(const std::vector<EnergyReport>& reports, double horizon);

std::string energy_report_json(const EnergyReport& r);
/// Header t,E0,E1,E2,E3,Kcal,Ecal,taylor_margin.
std::string energy_csv_header();
std::string energy_csv_row(const EnergyReport& r);

}  // namespace mhd2d
