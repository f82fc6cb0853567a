#include "strictlyap/error.hpp"

namespace strictlyap {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "syntax-error";
    case ErrorKind::UnknownIdentifier: return "unknown-identifier";
    case ErrorKind::Arity: return "arity-error";
    case ErrorKind::UnboundVariable: return "unbound-variable";
    case ErrorKind::Domain: return "domain-error";
    case ErrorKind::NonSmoothPrimitive: return "non-smooth-primitive";
    case ErrorKind::BracketNotFound: return "bracket-not-found";
    case ErrorKind::NotPersistentlyExciting: return "not-persistently-exciting";
    case ErrorKind::SlopeBoundViolated: return "slope-bound-violated";
    case ErrorKind::UnboundedSup: return "unbounded-sup";
    case ErrorKind::ValidationFailed: return "validation-failed";
    case ErrorKind::BlowUp: return "blow-up";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::FitFailed: return "fit-failed";
    case ErrorKind::AdmissibilityFailed: return "admissibility-failed";
    case ErrorKind::Config: return "config-error";
    case ErrorKind::UnknownCheck: return "unknown-check";
  }
  return "error";
}

}  // namespace strictlyap
