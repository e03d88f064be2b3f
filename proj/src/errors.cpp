#include "mhd2d/errors.hpp"

namespace mhd2d {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::geometry_failure: return "GeometryFailure";
    case ErrorKind::resolution_failure: return "ResolutionFailure";
    case ErrorKind::shape_error: return "ShapeError";
    case ErrorKind::configuration_error: return "ConfigurationError";
    case ErrorKind::incompressibility_violation: return "IncompressibilityViolation";
    case ErrorKind::map_degeneracy: return "MapDegeneracy";
    case ErrorKind::insufficient_history: return "InsufficientHistory";
    case ErrorKind::elliptic_failure: return "EllipticFailure";
    case ErrorKind::sequencing_error: return "SequencingError";
    case ErrorKind::vacuum_consistency_failure: return "VacuumConsistencyFailure";
    case ErrorKind::scenario_error: return "ScenarioError";
    case ErrorKind::constraint_failure: return "ConstraintFailure";
  }
  return "Error";
}

}  // namespace mhd2d
