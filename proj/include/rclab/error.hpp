#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rclab {

enum class ErrorKind {
  DuplicateEdge,
  SelfLoop,
  IndexOutOfRange,
  ParityError,
  GenerationFailure,
  BudgetExceeded,
  InvalidQ,
  InvalidParameter,
  Positivity,
  NonConvergence,
  NoConvergedRun,
  InconsistentMarginals,
  SignCondition,
  DomainError,
  QuadratureFailure,
  Singularity,
  RootNotBracketed,
  ParseError,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::SelfLoop: return "SelfLoop";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::ParityError: return "ParityError";
    case ErrorKind::GenerationFailure: return "GenerationFailure";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::InvalidQ: return "InvalidQ";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::Positivity: return "Positivity";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NoConvergedRun: return "NoConvergedRun";
    case ErrorKind::InconsistentMarginals: return "InconsistentMarginals";
    case ErrorKind::SignCondition: return "SignCondition";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::Singularity: return "Singularity";
    case ErrorKind::RootNotBracketed: return "RootNotBracketed";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code mapping) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace rclab
