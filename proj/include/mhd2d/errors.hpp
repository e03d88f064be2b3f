#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mhd2d {

enum class ErrorKind {
  geometry_failure,
  resolution_failure,
  shape_error,
  configuration_error,
  incompressibility_violation,
  map_degeneracy,
  insufficient_history,
  elliptic_failure,
  sequencing_error,
  vacuum_consistency_failure,
  scenario_error,
  constraint_failure,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so the CLI can map it
/// onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when an elliptic solve stalls; keeps the residual it reached.
class EllipticError : public Error {
 public:
  EllipticError(const std::string& what, double residual)
      : Error(ErrorKind::elliptic_failure, what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace mhd2d
