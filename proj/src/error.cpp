#include "qmaxent/error.hpp"

namespace qmaxent {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonSquare: return "non_square";
    case ErrorKind::NotHermitian: return "not_hermitian";
    case ErrorKind::TraceNotOne: return "trace_not_one";
    case ErrorKind::NotPositive: return "not_positive";
    case ErrorKind::DimMismatch: return "dim_mismatch";
    case ErrorKind::NonRealResult: return "non_real_result";
    case ErrorKind::DependentConstraints: return "dependent_constraints";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DomainError: return "domain_error";
    case ErrorKind::ConvergenceFailure: return "convergence_failure";
    case ErrorKind::SupportViolation: return "support_violation";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::MaxIterExceeded: return "max_iter_exceeded";
    case ErrorKind::SingularBase: return "singular_base";
    case ErrorKind::StepInvalid: return "step_invalid";
    case ErrorKind::PositivityLoss: return "positivity_loss";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace qmaxent
