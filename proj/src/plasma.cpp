#include "mhd2d/plasma.hpp"

#include "mhd2d/errors.hpp"

#include <cmath>
#include <limits>

namespace mhd2d {

namespace {

// dw[c][i] = d_i w_c
std::array<Vec2Field, 2> gradients(const Chart& chart, const Vec2Field& w) {
  return {chart.grad(w[0]), chart.grad(w[1])};
}

Vec2Field push(const TensorField& t, const std::array<Field, 4>& F) {
  const TensorField e = pushforward(t, F);
  return {e[0], e[1]};
}

struct PlasmaVars {
  Field x1, x2;
  TensorField u, beta;
};

PlasmaVars vars_of(const PlasmaState& s) { return {s.map.x1(), s.map.x2(), s.u, s.beta}; }

PlasmaState with_vars(const PlasmaState& base, const PlasmaVars& v, double t) {
  PlasmaState s{FlowMap(base.map.labels(), base.map.domain(), v.x1, v.x2, t), v.u, v.beta, base.q_plus, base.mu,
                false};
  return s;
}

PlasmaVars axpy(const PlasmaVars& y, double h, const PlasmaRates& k) {
  return {y.x1 + h * k.dx[0], y.x2 + h * k.dx[1], y.u + h * k.du, y.beta + h * k.dbeta};
}

}  // namespace

EulerianPlasma eulerian(const PlasmaState& state) {
  EulerianPlasma e{state.map.current(), state.map.jacobian(), {}, {}};
  e.v = push(state.u, e.F);
  e.H = push(state.beta, e.F);
  return e;
}

TensorField to_labels(const Vec2Field& w, const std::array<Field, 4>& F, Domain domain) {
  return pullback(TensorField::vector(w[0], w[1], domain), F);
}

PressureProblem pressure_problem(const Chart& chart, const Vec2Field& v, const Vec2Field& H, double mu,
                                 const Eigen::ArrayXd& q_minus) {
  if (q_minus.size() != chart.grid().n_angular())
    throw Error(ErrorKind::shape_error, "q- trace must have one value per interface node");
  const auto dv = gradients(chart, v);
  const auto dH = gradients(chart, H);
  Field rhs = chart.grid().zeros();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) rhs += -dv[j][i] * dv[i][j] + mu * dH[j][i] * dH[i][j];
  return {rhs, q_minus};
}

Field pressure_solve(const PressureProblem& problem, const Chart& chart, const PoissonSolver& solver,
                     const ModalPreconditioner* preconditioner, const Field* guess, SolveStats* stats) {
  if (!problem.rhs.allFinite() || !problem.dirichlet.allFinite())
    throw Error(ErrorKind::shape_error, "pressure problem data must be finite");
  Field boundary = chart.grid().zeros();
  boundary.row(0) = problem.dirichlet.transpose();
  Field q = solver.solve(chart, problem.rhs, boundary, stats, preconditioner, guess);
  q.row(0) = problem.dirichlet.transpose();
  return q;
}

TensorField momentum_rhs(const PlasmaState& state) {
  if (!state.pressure_fresh) throw Error(ErrorKind::sequencing_error, "momentum right side needs a fresh pressure");
  const EulerianPlasma e = eulerian(state);
  const auto dv = gradients(e.chart, e.v);
  const auto dH = gradients(e.chart, e.H);
  const Vec2Field dq = e.chart.grad(state.q_plus);
  Vec2Field out;
  for (int i = 0; i < 2; ++i) {
    out[i] = -dq[i];
    for (int c = 0; c < 2; ++c) out[i] += e.v[c] * dv[c][i] + state.mu * e.H[c] * dH[i][c];
  }
  return to_labels(out, e.F);
}

TensorField induction_rhs(const PlasmaState& state) {
  const EulerianPlasma e = eulerian(state);
  const auto dv = gradients(e.chart, e.v);
  Vec2Field out;
  for (int i = 0; i < 2; ++i) {
    out[i] = e.chart.grid().zeros();
    for (int c = 0; c < 2; ++c) out[i] += e.H[c] * dv[i][c] + e.H[c] * dv[c][i];
  }
  return to_labels(out, e.F);
}

TaylorSign taylor_sign(const Chart& plasma, const Field& q_plus, const Chart* vacuum, const Field* q_minus,
                       double degenerate_tolerance) {
  const BoundaryRow b = plasma.boundary_row(0);
  const Vec2Field gp = plasma.grad(q_plus);
  TaylorSign ts;
  ts.grad_n_P = b.n1 * gp[0].row(0).transpose() + b.n2 * gp[1].row(0).transpose();
  if (vacuum && q_minus) {
    const Vec2Field gm = vacuum->grad(*q_minus);
    ts.grad_n_P -= b.n1 * gm[0].row(0).transpose() + b.n2 * gm[1].row(0).transpose();
  }
  ts.margin = -ts.grad_n_P.maxCoeff();
  ts.degenerate = ts.grad_n_P.abs().maxCoeff() <= degenerate_tolerance;
  ts.violated = ts.degenerate || ts.margin <= 0.0;
  return ts;
}

double gradient_scale(const Chart& chart, const Vec2Field& w) {
  double scale = 0.0;
  for (const auto& d : gradients(chart, w))
    for (const auto& c : d) scale += c.matrix().squaredNorm();
  return std::sqrt(scale);
}

std::pair<Vec2Field, double> leray_project(const Chart& chart, const Vec2Field& w, const PoissonSolver& solver,
                                           const ModalPreconditioner* preconditioner, double reference_scale) {
  const Field div = chart.div(w);
  // The divergence is a cancellation of gradient terms; measure the solve
  // against their size rather than against the (possibly roundoff) residue.
  GmresOptions opts = solver.options();
  const double scale = std::max(reference_scale, gradient_scale(chart, w));
  opts.absolute_tolerance = std::max(opts.absolute_tolerance, opts.tolerance * scale);
  const Field phi = PoissonSolver(opts).solve(chart, div, chart.grid().zeros(), nullptr, preconditioner);
  const Vec2Field g = chart.grad(phi);
  const double size = (g[0].square() + g[1].square()).sqrt().maxCoeff();
  return {{w[0] - g[0], w[1] - g[1]}, size};
}

PlasmaRates plasma_rates(const PlasmaState& state, const Eigen::ArrayXd& q_minus, const PoissonSolver& solver,
                         const ModalPreconditioner* preconditioner, SolveStats* stats) {
  const EulerianPlasma e = eulerian(state);
  const PressureProblem problem = pressure_problem(e.chart, e.v, e.H, state.mu, q_minus);
  const bool have_guess = state.q_plus.rows() == e.chart.grid().n_radial() &&
                          state.q_plus.cols() == e.chart.grid().n_angular();
  PlasmaRates r;
  r.q_plus = pressure_solve(problem, e.chart, solver, preconditioner, have_guess ? &state.q_plus : nullptr, stats);
  const auto dv = gradients(e.chart, e.v);
  const auto dH = gradients(e.chart, e.H);
  const Vec2Field dq = e.chart.grad(r.q_plus);
  Vec2Field mom, ind;
  for (int i = 0; i < 2; ++i) {
    mom[i] = -dq[i];
    ind[i] = e.chart.grid().zeros();
    for (int c = 0; c < 2; ++c) {
      mom[i] += e.v[c] * dv[c][i] + state.mu * e.H[c] * dH[i][c];
      ind[i] += e.H[c] * dv[i][c] + e.H[c] * dv[c][i];
    }
  }
  r.dx = e.v;
  r.du = to_labels(mom, e.F);
  r.dbeta = to_labels(ind, e.F);
  return r;
}

double min_spacing(const Chart& chart) {
  const Field& x1 = chart.x1();
  const Field& x2 = chart.x2();
  const auto rows = x1.rows(), cols = x1.cols();
  double h = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < cols; ++j) {
    const Eigen::Index jn = (j + 1) % cols;
    for (Eigen::Index i = 0; i < rows; ++i) {
      h = std::min(h, std::hypot(x1(i, jn) - x1(i, j), x2(i, jn) - x2(i, j)));
      if (i + 1 < rows) h = std::min(h, std::hypot(x1(i + 1, j) - x1(i, j), x2(i + 1, j) - x2(i, j)));
    }
  }
  return h;
}

std::pair<double, double> clean_divergence(PlasmaState& state, const PoissonSolver& solver,
                                           const ModalPreconditioner* preconditioner) {
  const EulerianPlasma e = eulerian(state);
  // u and sqrt(mu) beta share units; each is cleaned relative to both, and
  // to the velocity scale sqrt|q+| when the fields themselves vanish.
  const double sv = gradient_scale(e.chart, e.v);
  const double sh = std::sqrt(state.mu) * gradient_scale(e.chart, e.H);
  const double sq = state.q_plus.size() ? std::sqrt(state.q_plus.abs().maxCoeff() * state.q_plus.size()) : 0.0;
  const double scale = std::max(std::hypot(sv, sh), sq);
  const auto [v, cu] = leray_project(e.chart, e.v, solver, preconditioner, scale);
  const auto [H, cb] = leray_project(e.chart, e.H, solver, preconditioner, scale / std::sqrt(state.mu));
  state.u = to_labels(v, e.F);
  state.beta = to_labels(H, e.F);
  state.pressure_fresh = false;
  return {cu, cb};
}

PlasmaState step_plasma(const PlasmaState& state, double dt, const QMinusProvider& q_minus,
                        const PlasmaStepOptions& options, PlasmaStepReport* report) {
  if (!(dt > 0.0)) throw Error(ErrorKind::configuration_error, "time step must be positive");
  const PoissonSolver solver(options.gmres);
  const Chart chart0 = state.map.current();
  const auto radii = reference_radii(chart0);
  const ModalPreconditioner pre(chart0.grid_ptr(), radii.first, radii.second);
  PlasmaStepReport rep;
  const double t = state.map.time();
  const PlasmaVars y = vars_of(state);

  auto rates = [&](const PlasmaState& s) {
    SolveStats st;
    PlasmaRates r = plasma_rates(s, q_minus(s.map.current()), solver, &pre, &st);
    rep.pressure_iterations += st.iterations;
    return r;
  };
  const PlasmaRates k1 = rates(state);
  {
    const EulerianPlasma e = eulerian(state);
    const double vmax = (e.v[0].square() + e.v[1].square()).sqrt().maxCoeff();
    rep.cfl = vmax * dt / min_spacing(e.chart);
    rep.stability_warning = rep.cfl > options.cfl_limit;
  }
  PlasmaState s2 = with_vars(state, axpy(y, 0.5 * dt, k1), t + 0.5 * dt);
  s2.q_plus = k1.q_plus;
  const PlasmaRates k2 = rates(s2);
  PlasmaState s3 = with_vars(state, axpy(y, 0.5 * dt, k2), t + 0.5 * dt);
  s3.q_plus = k2.q_plus;
  const PlasmaRates k3 = rates(s3);
  PlasmaState s4 = with_vars(state, axpy(y, dt, k3), t + dt);
  s4.q_plus = k3.q_plus;
  const PlasmaRates k4 = rates(s4);

  PlasmaVars next{y.x1 + dt / 6.0 * (k1.dx[0] + 2.0 * k2.dx[0] + 2.0 * k3.dx[0] + k4.dx[0]),
                  y.x2 + dt / 6.0 * (k1.dx[1] + 2.0 * k2.dx[1] + 2.0 * k3.dx[1] + k4.dx[1]),
                  y.u + (dt / 6.0) * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du),
                  y.beta + (dt / 6.0) * (k1.dbeta + 2.0 * k2.dbeta + 2.0 * k3.dbeta + k4.dbeta)};
  PlasmaState out = with_vars(state, next, t + dt);
  out.q_plus = k4.q_plus;
  if (options.divergence_cleaning) std::tie(rep.cleaning_u, rep.cleaning_beta) = clean_divergence(out, solver, &pre);
  // Pressure consistent with the new state.
  const EulerianPlasma e = eulerian(out);
  const PressureProblem problem = pressure_problem(e.chart, e.v, e.H, out.mu, q_minus(e.chart));
  out.q_plus = pressure_solve(problem, e.chart, solver, &pre, &out.q_plus);
  out.pressure_fresh = true;
  if (report) *report = rep;
  return out;
}

}  // namespace mhd2d
