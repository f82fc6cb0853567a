#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace strictlyap {

enum class ErrorKind {
  // exprparse
  Syntax,
  UnknownIdentifier,
  Arity,
  UnboundVariable,
  Domain,
  NonSmoothPrimitive,
  // funcalc
  BracketNotFound,
  // decay
  NotPersistentlyExciting,
  // strictify
  SlopeBoundViolated,
  UnboundedSup,
  ValidationFailed,
  // dynsys
  BlowUp,
  DimensionMismatch,
  // verify
  FitFailed,
  // cli
  AdmissibilityFailed,
  Config,
  UnknownCheck,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace strictlyap
