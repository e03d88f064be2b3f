#pragma once

// Dirichlet Poisson solves on deformed disks and annuli. The collocation
// operator is applied matrix-free through the chart; a Fourier-mode-wise
// direct solve for the undeformed reference domain preconditions GMRES.

#include "mhd2d/chart.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace mhd2d {

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;  // relative to the right-hand side norm
};

struct GmresOptions {
  double tolerance = 1e-11;
  double absolute_tolerance = 1e-300;
  int restart = 40;
  int max_iterations = 400;
};

using LinearMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Right-preconditioned restarted GMRES. Stops at the tolerance or when a
/// restart cycle stagnates; throws EllipticError unless the residual reached
/// is within 1e3 of the tolerance.
Eigen::VectorXd gmres(const LinearMap& apply, const LinearMap& precondition, const Eigen::VectorXd& rhs,
                      const Eigen::VectorXd& guess, const GmresOptions& options, SolveStats* stats = nullptr);

/// Exact inverse of the polar Laplacian on a reference disk of radius `outer`
/// (inner = 0) or a concentric annulus inner < r < outer, with Dirichlet rows.
class ModalPreconditioner {
 public:
  ModalPreconditioner(GridPtr grid, double inner, double outer);

  /// Solve with interior rows holding Laplacian data and boundary rows
  /// holding Dirichlet values.
  Field apply(const Field& rhs) const;

  double inner() const { return inner_; }
  double outer() const { return outer_; }

 private:
  GridPtr grid_;
  double inner_, outer_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;  // indexed by wavenumber
};

/// Reference radii for a chart: (0, R) with pi R^2 = area for a disk;
/// for an annulus the equivalent radii of the regions enclosed by the rows.
std::pair<double, double> reference_radii(const Chart& chart);

class PoissonSolver {
 public:
  explicit PoissonSolver(GmresOptions options = {}) : options_(options) {}

  /// Solve Delta q = rhs in the interior with q = boundary on the Dirichlet
  /// rows of the chart's grid (the other rows of `boundary` are ignored).
  /// A preconditioner can be supplied; otherwise one is built from the chart.
  Field solve(const Chart& chart, const Field& rhs, const Field& boundary, SolveStats* stats = nullptr,
              const ModalPreconditioner* preconditioner = nullptr, const Field* guess = nullptr) const;

  /// Collocation residual (interior Laplacian minus rhs, boundary mismatch).
  static Field residual(const Chart& chart, const Field& q, const Field& rhs, const Field& boundary);

  const GmresOptions& options() const { return options_; }

 private:
  GmresOptions options_;
};

}  // namespace mhd2d
