#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qmaxent {

enum class ErrorKind {
  NonSquare,
  NotHermitian,
  TraceNotOne,
  NotPositive,
  DimMismatch,
  NonRealResult,
  DependentConstraints,
  InvalidArgument,
  DomainError,
  ConvergenceFailure,
  SupportViolation,
  Overflow,
  Infeasible,
  MaxIterExceeded,
  SingularBase,
  StepInvalid,
  PositivityLoss,
};

/// Stable snake_case identifier, used in CLI error documents.
std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace qmaxent
