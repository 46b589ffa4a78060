#include "roughwall/error.hpp"

namespace roughwall {

const char* kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RangeViolation: return "RangeViolation";
    case ErrorKind::ConjugacyViolation: return "ConjugacyViolation";
    case ErrorKind::DegenerateMap: return "DegenerateMap";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::QuadratureGuard: return "QuadratureGuard";
    case ErrorKind::SupportError: return "SupportError";
    case ErrorKind::SolverDiverged: return "SolverDiverged";
    case ErrorKind::PicardDiverged: return "PicardDiverged";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::SingularFit: return "SingularFit";
    case ErrorKind::NonPositiveData: return "NonPositiveData";
    case ErrorKind::DegenerateBox: return "DegenerateBox";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace roughwall
