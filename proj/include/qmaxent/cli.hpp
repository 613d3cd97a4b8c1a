#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmaxent/operator_core.hpp"

namespace qmaxent::cli {

using Json = nlohmann::ordered_json;

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 2,
  kExitInfeasible = 3,
  kExitNumericalFailure = 4,
};

int exit_code_for(ErrorKind kind);

/// Malformed or schema-violating JSON input. Always maps to kExitInputError.
class DocumentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { MaxEnt, PriorTilt, Flow, Metric, Entropy };

struct ProblemDocument {
  std::vector<HermitianOperator> observables;
  std::vector<double> targets;
  std::optional<ComplexMatrix> prior;
  std::optional<Mode> mode;
};

/// {"dim": n, "re": [[...]], "im": [[...]], "label": "..."}; "im" may be
/// omitted for real operators. `re` must be symmetric and `im` antisymmetric
/// within 1e-9; the matrix is then replaced by its Hermitian part.
ComplexMatrix parse_operator_document(const Json& doc, const std::string& where);
Json operator_document(const ComplexMatrix& m, const std::optional<std::string>& label = std::nullopt);

ProblemDocument parse_problem_document(const Json& doc);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

/// Runs one subcommand. `args` excludes the program name. The result document
/// goes to `out` (unless --quiet) and errors go to `err` as one-line JSON.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qmaxent::cli
