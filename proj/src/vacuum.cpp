#include "mhd2d/vacuum.hpp"

#include "mhd2d/errors.hpp"

#include <cmath>

namespace mhd2d {

namespace {

TensorField lower(const Vec2Field& w, const std::array<Field, 4>& F) {
  return pullback(TensorField::vector(w[0], w[1], Domain::vacuum), F);
}

Vec2Field raise(const TensorField& t, const std::array<Field, 4>& F) {
  const TensorField e = pushforward(t, F);
  return {e[0], e[1]};
}

void check_annulus(const Chart& vacuum) {
  if (vacuum.grid().boundary_rows().size() != 2)
    throw Error(ErrorKind::geometry_failure, "vacuum chart must be an annulus");
  if (!(vacuum.area() > 0.0)) throw Error(ErrorKind::geometry_failure, "vacuum annulus has no area");
}

Eigen::ArrayXd row_dot(const Vec2Field& a, int row, const Eigen::ArrayXd& n1, const Eigen::ArrayXd& n2) {
  return a[0].row(row).transpose() * n1 + a[1].row(row).transpose() * n2;
}

}  // namespace

Chart annulus_chart(int n_radial, const Eigen::ArrayXd& gamma_x1, const Eigen::ArrayXd& gamma_x2,
                    const Eigen::ArrayXd& wall_x1, const Eigen::ArrayXd& wall_x2) {
  const auto n = gamma_x1.size();
  if (gamma_x2.size() != n || wall_x1.size() != n || wall_x2.size() != n)
    throw Error(ErrorKind::shape_error, "interface and wall must have the same number of nodes");
  auto g = SpectralGrid::annulus(n_radial, static_cast<int>(n));
  const Field s = g->radial_field();
  Field x1(n_radial, n), x2(n_radial, n);
  for (int i = 0; i < n_radial; ++i) {
    x1.row(i) = ((1.0 - s(i, 0)) * gamma_x1 + s(i, 0) * wall_x1).transpose();
    x2.row(i) = ((1.0 - s(i, 0)) * gamma_x2 + s(i, 0) * wall_x2).transpose();
  }
  return Chart(g, x1, x2);
}

Field unit_potential(const Chart& vacuum, const PoissonSolver& solver, const ModalPreconditioner* preconditioner) {
  check_annulus(vacuum);
  Field boundary = vacuum.grid().zeros();
  boundary.row(0).setOnes();
  Field psi = solver.solve(vacuum, vacuum.grid().zeros(), boundary, nullptr, preconditioner);
  psi.row(0).setOnes();
  psi.row(psi.rows() - 1).setZero();
  return psi;
}

namespace {

HarmonicField scaled(const Chart& vacuum, const Field& psi0, double factor) {
  HarmonicField h;
  h.psi = factor * psi0;
  h.H = vacuum.perp_grad(h.psi);
  h.flux = factor;
  h.circulation = circulation(vacuum, h.H, vacuum.grid().n_radial() - 1);
  return h;
}

}  // namespace

HarmonicField solve_harmonic_field(const Chart& vacuum, double circulation_value, const PoissonSolver& solver,
                                   const ModalPreconditioner* preconditioner) {
  const Field psi0 = unit_potential(vacuum, solver, preconditioner);
  const double unit = circulation(vacuum, vacuum.perp_grad(psi0), vacuum.grid().n_radial() - 1);
  if (!(std::abs(unit) > 0.0)) throw Error(ErrorKind::geometry_failure, "degenerate vacuum annulus");
  HarmonicField h = scaled(vacuum, psi0, circulation_value / unit);
  h.circulation = circulation_value;
  return h;
}

HarmonicField solve_harmonic_flux(const Chart& vacuum, double flux, const PoissonSolver& solver,
                                  const ModalPreconditioner* preconditioner) {
  return scaled(vacuum, unit_potential(vacuum, solver, preconditioner), flux);
}

double circulation(const Chart& vacuum, const Vec2Field& H, int row) {
  if (row < 0 || row >= vacuum.grid().n_radial())
    throw Error(ErrorKind::geometry_failure, "circulation loop lies outside the vacuum chart");
  const BoundaryRow b = vacuum.boundary_row(row);
  return vacuum.line_integral(row, row_dot(H, row, b.t1, b.t2));
}

double flux_across(const Chart& vacuum, const Vec2Field& H) {
  const auto& g = vacuum.grid();
  const Field xs1 = g.d_radial(vacuum.x1());
  const Field xs2 = g.d_radial(vacuum.x2());
  // d psi / ds along a column
  const Field dpsi = -H[1] * xs1 + H[0] * xs2;
  const Eigen::VectorXd w = 0.5 * clenshaw_curtis(g.n_radial() - 1);
  const Eigen::ArrayXd columns = (w.transpose() * dpsi.matrix()).transpose().array();
  // integral from W (s = 1) to Gamma (s = 0)
  return -columns.mean();
}

double VacuumResiduals::max() const { return std::max({div, curl, normal_gamma, normal_wall}); }

VacuumResiduals vacuum_residuals(const Chart& vacuum, const Vec2Field& H) {
  const double scale = std::max(1.0, (H[0].square() + H[1].square()).sqrt().maxCoeff());
  const int last = vacuum.grid().n_radial() - 1;
  const BoundaryRow bg = vacuum.boundary_row(0), bw = vacuum.boundary_row(last);
  VacuumResiduals r;
  r.div = max_abs(vacuum.div(H)) / scale;
  r.curl = max_abs(vacuum.curl(H)) / scale;
  r.normal_gamma = row_dot(H, 0, bg.n1, bg.n2).abs().maxCoeff() / scale;
  r.normal_wall = row_dot(H, last, bw.n1, bw.n2).abs().maxCoeff() / scale;
  return r;
}

MixedProblemData mixed_problem_data(const Chart& vacuum, const Vec2Field& v, const Vec2Field& H) {
  const BoundaryRow b = vacuum.boundary_row(0);
  const Eigen::ArrayXd uN = row_dot(v, 0, b.n1, b.n2);
  MixedProblemData d;
  d.f1 = uN * (H[0].row(0).transpose() * b.n2 - H[1].row(0).transpose() * b.n1);
  const std::array<Vec2Field, 2> dv{vacuum.grad(v[0]), vacuum.grad(v[1])};  // dv[d][a] = d_a v_d
  const std::array<Vec2Field, 2> dH{vacuum.grad(H[0]), vacuum.grad(H[1])};
  const std::array<Eigen::ArrayXd, 2> n{b.n1, b.n2};
  d.f2 = Eigen::ArrayXd::Zero(b.n1.size());
  for (int a = 0; a < 2; ++a)
    for (int dd = 0; dd < 2; ++dd) {
      d.f2 += dv[dd][a].row(0).transpose() * n[dd] * H[a].row(0).transpose();
      d.f2 -= n[dd] * v[a].row(0).transpose() * dH[dd][a].row(0).transpose();
    }
  return d;
}

ElectricField solve_electric_field(const Chart& vacuum, const Vec2Field& v, const Vec2Field& H,
                                   const PoissonSolver& solver, const ModalPreconditioner* preconditioner,
                                   const Field* guess) {
  check_annulus(vacuum);
  ElectricField e;
  e.data = mixed_problem_data(vacuum, v, H);
  Field boundary = vacuum.grid().zeros();
  boundary.row(0) = e.data.f1.transpose();
  if ((e.data.f1 == 0.0).all()) {
    e.Xi = vacuum.grid().zeros();
  } else {
    e.Xi = solver.solve(vacuum, vacuum.grid().zeros(), boundary, nullptr, preconditioner, guess);
    e.Xi.row(0) = e.data.f1.transpose();
    e.Xi.row(e.Xi.rows() - 1).setZero();
  }
  const BoundaryRow b = vacuum.boundary_row(0);
  const Vec2Field gx = vacuum.grad(e.Xi);
  e.oblique_residual = row_dot(gx, 0, b.n2, -b.n1) - e.data.f2;
  e.oblique_l2 = std::sqrt(vacuum.line_integral(0, e.oblique_residual.square()));
  return e;
}

Vec2Field vacuum_field(const VacuumState& state) { return raise(state.varpi, state.map.jacobian()); }

Field magnetic_pressure(const Vec2Field& H, double mu) { return 0.5 * mu * (H[0].square() + H[1].square()); }

Eigen::ArrayXd q_minus_trace(const Vec2Field& H, double mu) {
  return magnetic_pressure(H, mu).row(0).transpose();
}

VacuumState make_vacuum_state(ChartPtr labels, const Vec2Field& H, double mu) {
  const FlowMap map(std::move(labels), Domain::vacuum);
  return VacuumState{map, lower(H, map.jacobian()), map.labels()->grid().zeros(), mu};
}

TensorField faraday_rhs(const VacuumState& state, const Vec2Field& v, const Field& Xi) {
  const Chart chart = state.map.current();
  const auto F = state.map.jacobian();
  const Vec2Field H = raise(state.varpi, F);
  const Vec2Field px = chart.perp_grad(Xi);
  const std::array<Vec2Field, 2> dH{chart.grad(H[0]), chart.grad(H[1])};
  const std::array<Vec2Field, 2> dv{chart.grad(v[0]), chart.grad(v[1])};
  Vec2Field out;
  for (int i = 0; i < 2; ++i) {
    out[i] = -px[i];
    for (int k = 0; k < 2; ++k) out[i] += v[k] * dH[i][k] + H[k] * dv[k][i];
  }
  return lower(out, F);
}

VacuumState evolve_vacuum(const VacuumState& state, const VacuumVelocity& velocity, double dt,
                          const VacuumStepOptions& options, VacuumStepReport* report) {
  if (!(dt > 0.0)) throw Error(ErrorKind::configuration_error, "time step must be positive");
  const PoissonSolver solver(options.gmres);
  const Chart chart0 = state.map.current();
  check_annulus(chart0);
  const auto radii = reference_radii(chart0);
  const ModalPreconditioner pre(chart0.grid_ptr(), radii.first, radii.second);
  const double t = state.map.time();
  VacuumStepReport rep;

  struct Rates {
    Vec2Field dx;
    TensorField dw;
    Field Xi;
  };
  auto rates = [&](const VacuumState& s, double ts) {
    const Chart c = s.map.current();
    const Vec2Field v = velocity(c, ts);
    const ElectricField e = solve_electric_field(c, v, raise(s.varpi, s.map.jacobian()), solver, &pre, &s.Xi);
    return Rates{v, faraday_rhs(s, v, e.Xi), e.Xi};
  };
  auto stage = [&](const VacuumState& base, double h, const Rates& k, double ts) {
    return VacuumState{FlowMap(base.map.labels(), Domain::vacuum, base.map.x1() + h * k.dx[0],
                               base.map.x2() + h * k.dx[1], ts),
                       base.varpi + h * k.dw, k.Xi, base.mu};
  };
  const Rates k1 = rates(state, t);
  const Rates k2 = rates(stage(state, 0.5 * dt, k1, t + 0.5 * dt), t + 0.5 * dt);
  const Rates k3 = rates(stage(state, 0.5 * dt, k2, t + 0.5 * dt), t + 0.5 * dt);
  const Rates k4 = rates(stage(state, dt, k3, t + dt), t + dt);
  const double h = dt / 6.0;
  VacuumState out{
      FlowMap(state.map.labels(), Domain::vacuum,
              state.map.x1() + h * (k1.dx[0] + 2.0 * k2.dx[0] + 2.0 * k3.dx[0] + k4.dx[0]),
              state.map.x2() + h * (k1.dx[1] + 2.0 * k2.dx[1] + 2.0 * k3.dx[1] + k4.dx[1]), t + dt),
      state.varpi + h * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw), k4.Xi, state.mu};

  const Chart c = out.map.current();
  Vec2Field H = vacuum_field(out);
  if (options.project_harmonic) {
    const HarmonicField hf = solve_harmonic_flux(c, flux_across(c, H), solver, &pre);
    rep.projection_correction =
        std::max(max_abs(hf.H[0] - H[0]), max_abs(hf.H[1] - H[1]));
    H = hf.H;
    out.varpi = lower(H, out.map.jacobian());
  }
  rep.residuals = vacuum_residuals(c, H);
  if (!std::isfinite(rep.residuals.max()) || rep.residuals.max() > options.consistency_limit)
    throw Error(ErrorKind::vacuum_consistency_failure,
                "vacuum field constraints drifted to " + std::to_string(rep.residuals.max()));
  const ElectricField e = solve_electric_field(c, velocity(c, t + dt), H, solver, &pre, &out.Xi);
  out.Xi = e.Xi;
  rep.oblique_l2 = e.oblique_l2;
  if (report) *report = rep;
  return out;
}

double evolve_perp_xi_check(const std::vector<FlowMap>& maps, const std::vector<Field>& Xi, const Vec2Field& v,
                            double band_start, double band_end) {
  if (maps.size() < 2 || Xi.size() != maps.size())
    throw Error(ErrorKind::insufficient_history, "need two or three consecutive Xi solves");
  if (maps.size() > 3) throw Error(ErrorKind::shape_error, "at most three levels are used");
  std::vector<TensorField> levels;
  std::vector<double> times;
  for (size_t k = 0; k < maps.size(); ++k) {
    const Chart c = maps[k].current();
    levels.push_back(lower(c.perp_grad(Xi[k]), maps[k].jacobian()));
    times.push_back(maps[k].time());
  }
  const TensorField dt = material_derivative_field(levels, times);
  const size_t at = 1;  // later of two levels, middle of three
  const FlowMap& m = maps[at];
  const Chart c = m.current();
  const Vec2Field w = c.perp_grad(Xi[at]);
  const std::array<Vec2Field, 2> dw{c.grad(w[0]), c.grad(w[1])};
  const std::array<Vec2Field, 2> dv{c.grad(v[0]), c.grad(v[1])};
  Vec2Field rhs;
  for (int i = 0; i < 2; ++i) {
    rhs[i] = c.grid().zeros();
    for (int k = 0; k < 2; ++k) rhs[i] += v[k] * dw[i][k] + dv[k][i] * w[k];
  }
  const TensorField diff = dt - lower(rhs, m.jacobian());
  const Field s = c.grid().radial_field();
  double r = 0.0;
  for (int i = 0; i < c.grid().n_radial(); ++i) {
    const double si = s(i, 0);
    if (si < band_start || si > band_end) continue;
    for (int a = 0; a < 2; ++a) r = std::max(r, diff[a].row(i).abs().maxCoeff());
  }
  return r;
}

}  // namespace mhd2d
