#include "qmaxent/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qmaxent/entropy.hpp"
#include "qmaxent/flow.hpp"
#include "qmaxent/geometry.hpp"
#include "qmaxent/maxent.hpp"

namespace qmaxent::cli {

namespace {

constexpr double kDocumentSymmetryTol = 1e-9;
constexpr long long kMaxDim = 1024;

const char* const kRelativeEntropyConvention =
    "-tr[rho (log rho - log rho0)]; never positive, maximized at rho = rho0 "
    "(maximizing it minimizes the usual quantum relative entropy)";

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw DocumentError(where + ": " + what);
}

double number_at(const Json& v, const std::string& where) {
  if (!v.is_number()) bad(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(where, "number is not finite");
  return x;
}

Eigen::MatrixXd real_matrix(const Json& v, Eigen::Index dim, const std::string& where) {
  if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != dim) {
    bad(where, "expected an array of " + std::to_string(dim) + " rows");
  }
  Eigen::MatrixXd m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const Json& row = v[static_cast<std::size_t>(r)];
    const std::string row_where = where + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
      bad(row_where, "expected " + std::to_string(dim) + " entries");
    }
    for (Eigen::Index c = 0; c < dim; ++c) {
      m(r, c) = number_at(row[static_cast<std::size_t>(c)], row_where + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DocumentError(path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json load_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DocumentError(path + ": invalid JSON: " + e.what());
  }
}

std::optional<Mode> parse_mode(const Json& v) {
  if (!v.is_string()) bad("mode", "expected a string");
  const auto s = v.get<std::string>();
  if (s == "maxent") return Mode::MaxEnt;
  if (s == "prior_tilt") return Mode::PriorTilt;
  if (s == "flow") return Mode::Flow;
  if (s == "metric") return Mode::Metric;
  if (s == "entropy") return Mode::Entropy;
  bad("mode", "unknown mode '" + s + "' (expected maxent, prior_tilt, flow, metric or entropy)");
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::MaxEnt: return "maxent";
    case Mode::PriorTilt: return "prior_tilt";
    case Mode::Flow: return "flow";
    case Mode::Metric: return "metric";
    case Mode::Entropy: return "entropy";
  }
  return "";
}

Json number_array(const std::vector<double>& xs) {
  Json out = Json::array();
  for (double x : xs) out.push_back(x);
  return out;
}

void write_error(std::ostream& err, const std::string& kind, int code, const std::string& message) {
  Json doc;
  doc["error"] = kind;
  doc["exit_code"] = code;
  doc["message"] = message;
  err << doc.dump(-1, ' ', false, Json::error_handler_t::replace) << '\n';
}

struct Options {
  std::string problem;
  std::string state;
  std::string prior;
  std::string output;
  std::string csv;
  double tol = 1e-10;
  int max_iter = 500;
  double step = 1e-3;
  std::optional<double> lambda_end;
  bool quiet = false;
};

// Prior-tilt and flow documents share one shape, so either command reads both.
bool accepts(Mode expected, Mode given) {
  const auto family = [](Mode m) { return m == Mode::Flow ? Mode::PriorTilt : m; };
  return family(expected) == family(given);
}

ProblemDocument load_problem(const Options& o, Mode expected) {
  ProblemDocument p = parse_problem_document(load_json(o.problem));
  if (p.mode && !accepts(expected, *p.mode)) {
    bad("mode", std::string("document mode '") + mode_name(*p.mode) + "' does not match this command (expected '" +
                    mode_name(expected) + "')");
  }
  return p;
}

DensityOperator prior_or_uniform(const ProblemDocument& p, Eigen::Index dim) {
  if (!p.prior) return DensityOperator::maximally_mixed(dim);
  if (p.prior->rows() != dim) bad("prior", "dimension does not match the observables");
  return make_density(*p.prior);
}

void require_single_constraint(const ProblemDocument& p, bool need_target) {
  if (p.observables.size() != 1) bad("observables", "this command needs exactly one observable");
  if (need_target && p.targets.size() != 1) bad("targets", "this command needs exactly one target");
  if (!need_target && p.targets.size() > 1) bad("targets", "at most one target is allowed");
}

Json cmd_estimate(const Options& o) {
  const ProblemDocument p = load_problem(o, Mode::MaxEnt);
  if (p.observables.size() != p.targets.size()) {
    bad("targets", "expected " + std::to_string(p.observables.size()) + " targets, got " +
                       std::to_string(p.targets.size()));
  }
  if (p.observables.empty()) bad("observables", "at least one observable is required to fix the dimension");
  const ConstraintSet constraints(p.observables, p.targets);
  const MaxEntSolution s = solve_maxent(constraints, SolverOptions{o.tol, o.max_iter});

  Json doc;
  doc["command"] = "estimate";
  doc["multipliers"] = number_array(s.multipliers);
  doc["lambda0"] = s.lambda0;
  doc["s_max"] = s.s_max;
  doc["targets"] = number_array(p.targets);
  doc["achieved"] = number_array(s.achieved);
  doc["iterations"] = s.iterations;
  doc["residual"] = s.residual;
  doc["estimate"] = operator_document(s.estimate.matrix(), "estimate");
  return doc;
}

Json cmd_tilt(const Options& o) {
  const ProblemDocument p = load_problem(o, Mode::PriorTilt);
  require_single_constraint(p, true);
  const DensityOperator prior = prior_or_uniform(p, p.observables.front().dim());
  const PriorTiltSolution s =
      solve_prior_tilt(prior, p.observables.front(), p.targets.front(), SolverOptions{o.tol, o.max_iter});

  Json doc;
  doc["command"] = "tilt";
  doc["lambda"] = s.lambda;
  doc["target"] = p.targets.front();
  doc["achieved"] = expectation(s.estimate, p.observables.front());
  doc["iterations"] = s.iterations;
  doc["residual"] = s.residual;
  doc["estimate"] = operator_document(s.estimate.matrix(), "estimate");
  return doc;
}

void write_csv(const FlowTrajectory& t, const std::string& path) {
  std::ofstream csv(path, std::ios::binary);
  if (!csv) throw DocumentError(path + ": cannot open for writing");
  csv << "lambda,mean,trace_error\n";
  for (const FlowSample& s : t.samples) {
    csv << format_double(s.lambda) << ',' << format_double(s.mean) << ','
        << format_double(std::abs(s.state.matrix().trace().real() - 1.0)) << '\n';
  }
  if (!csv) throw DocumentError(path + ": write failed");
}

Json cmd_flow(const Options& o) {
  const ProblemDocument p = load_problem(o, Mode::Flow);
  require_single_constraint(p, !o.lambda_end.has_value());
  const HermitianOperator& a = p.observables.front();
  const DensityOperator rho0 = prior_or_uniform(p, a.dim());

  Json doc;
  doc["command"] = "flow";
  if (o.lambda_end) {
    const FlowTrajectory t = integrate_flow(rho0, a, *o.lambda_end, o.step);
    const FlowSample& end = t.endpoint();
    const DensityOperator exact = closed_form_flow(rho0, a, *o.lambda_end);
    double max_trace_error = 0.0;
    for (const FlowSample& s : t.samples) {
      max_trace_error = std::max(max_trace_error, std::abs(s.state.matrix().trace().real() - 1.0));
    }
    if (!o.csv.empty()) write_csv(t, o.csv);
    doc["mode"] = "integrate";
    doc["lambda_end"] = t.lambda_end;
    doc["step"] = t.step;
    doc["samples"] = t.samples.size();
    doc["initial_mean"] = t.samples.front().lambda == 0.0 ? t.samples.front().mean : t.samples.back().mean;
    doc["final_mean"] = end.mean;
    doc["max_trace_error"] = max_trace_error;
    doc["closed_form_trace_distance"] = trace_distance(end.state, exact);
    doc["final_state"] = operator_document(end.state.matrix(), "final_state");
    return doc;
  }
  const FlowTarget t = flow_to_constraint(rho0, a, p.targets.front(), SolverOptions{o.tol, o.max_iter});
  doc["mode"] = "to_constraint";
  doc["lambda"] = t.lambda;
  doc["target"] = p.targets.front();
  doc["achieved"] = expectation(t.state, a);
  doc["iterations"] = t.iterations;
  doc["residual"] = t.residual;
  doc["state"] = operator_document(t.state.matrix(), "state");
  return doc;
}

Json cmd_metric(const Options& o) {
  const ProblemDocument p = load_problem(o, Mode::Metric);
  if (p.observables.empty()) bad("observables", "at least one observable is required");
  const Eigen::Index dim = p.observables.front().dim();
  const DensityOperator rho = prior_or_uniform(p, dim);
  const std::size_t m = p.observables.size();

  Json forms = Json::array();
  Json means = Json::array();
  for (std::size_t i = 0; i < m; ++i) {
    means.push_back(pair(OneForm{p.observables[i]}, rho));
    Json row = Json::array();
    for (std::size_t j = 0; j < m; ++j) {
      row.push_back(metric_forms(rho, OneForm{p.observables[i]}, OneForm{p.observables[j]}));
    }
    forms.push_back(std::move(row));
  }

  Json vectors = nullptr;
  if (eigenvalues(rho.hermitian()).minCoeff() > kFullRankFloor) {
    vectors = Json::array();
    for (std::size_t i = 0; i < m; ++i) {
      Json row = Json::array();
      for (std::size_t j = 0; j < m; ++j) row.push_back(metric_vectors(rho, p.observables[i], p.observables[j]));
      vectors.push_back(std::move(row));
    }
  }

  Json doc;
  doc["command"] = "metric";
  doc["dim"] = dim;
  doc["means"] = std::move(means);
  doc["metric_forms"] = std::move(forms);
  doc["metric_vectors"] = std::move(vectors);
  return doc;
}

/// A state file is either an operator document or a problem document whose
/// "prior" holds the state.
DensityOperator load_state(const std::string& path, const char* role) {
  const Json doc = load_json(path);
  if (doc.is_object() && doc.contains("re")) return make_density(parse_operator_document(doc, role));
  const ProblemDocument p = parse_problem_document(doc);
  if (!p.prior) bad(role, "document has neither an operator nor a 'prior' state");
  return make_density(*p.prior);
}

Json cmd_entropy(const Options& o) {
  const DensityOperator rho = load_state(o.state, "state");
  Json doc;
  doc["command"] = "entropy";
  doc["dim"] = rho.dim();
  doc["entropy_nats"] = von_neumann_entropy(rho);
  return doc;
}

Json cmd_rel_entropy(const Options& o) {
  const DensityOperator rho = load_state(o.state, "state");
  const DensityOperator rho0 = load_state(o.prior, "prior");
  Json doc;
  doc["command"] = "rel-entropy";
  doc["dim"] = rho.dim();
  doc["relative_entropy_nats"] = relative_entropy(rho, rho0);
  doc["convention"] = kRelativeEntropyConvention;
  return doc;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Infeasible:
      return kExitInfeasible;
    case ErrorKind::MaxIterExceeded:
    case ErrorKind::SingularBase:
    case ErrorKind::Overflow:
    case ErrorKind::ConvergenceFailure:
    case ErrorKind::PositivityLoss:
    case ErrorKind::DomainError:
      return kExitNumericalFailure;
    case ErrorKind::NonSquare:
    case ErrorKind::NotHermitian:
    case ErrorKind::TraceNotOne:
    case ErrorKind::NotPositive:
    case ErrorKind::DimMismatch:
    case ErrorKind::NonRealResult:
    case ErrorKind::DependentConstraints:
    case ErrorKind::InvalidArgument:
    case ErrorKind::SupportViolation:
    case ErrorKind::StepInvalid:
      return kExitInputError;
  }
  return kExitNumericalFailure;
}

ComplexMatrix parse_operator_document(const Json& doc, const std::string& where) {
  if (!doc.is_object()) bad(where, "expected an operator object with dim/re/im");
  if (!doc.contains("dim")) bad(where, "missing 'dim'");
  const Json& dim_v = doc["dim"];
  if (!dim_v.is_number_integer()) bad(where + ".dim", "expected a positive integer");
  const auto dim = dim_v.get<long long>();
  if (dim < 1 || dim > kMaxDim) bad(where + ".dim", "must be between 1 and " + std::to_string(kMaxDim));
  if (!doc.contains("re")) bad(where, "missing 're'");
  if (doc.contains("label") && !doc["label"].is_string()) bad(where + ".label", "expected a string");

  const Eigen::MatrixXd re = real_matrix(doc["re"], dim, where + ".re");
  const Eigen::MatrixXd im =
      doc.contains("im") ? real_matrix(doc["im"], dim, where + ".im") : Eigen::MatrixXd::Zero(dim, dim);
  if ((re - re.transpose()).cwiseAbs().maxCoeff() > kDocumentSymmetryTol) {
    bad(where + ".re", "not symmetric within 1e-9 (Hermiticity)");
  }
  if ((im + im.transpose()).cwiseAbs().maxCoeff() > kDocumentSymmetryTol) {
    bad(where + ".im", "not antisymmetric within 1e-9 (Hermiticity)");
  }
  ComplexMatrix m(dim, dim);
  m.real() = re;
  m.imag() = im;
  return HermitianOperator::hermitian_part(m).matrix();
}

Json operator_document(const ComplexMatrix& m, const std::optional<std::string>& label) {
  Json doc;
  doc["dim"] = m.rows();
  Json re = Json::array();
  Json im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json re_row = Json::array();
    Json im_row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re_row.push_back(m(r, c).real());
      im_row.push_back(m(r, c).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  doc["re"] = std::move(re);
  doc["im"] = std::move(im);
  if (label) doc["label"] = *label;
  return doc;
}

ProblemDocument parse_problem_document(const Json& doc) {
  if (!doc.is_object()) throw DocumentError("problem: expected a JSON object");
  ProblemDocument p;
  if (doc.contains("mode")) p.mode = parse_mode(doc["mode"]);
  if (doc.contains("observables")) {
    const Json& obs = doc["observables"];
    if (!obs.is_array()) bad("observables", "expected an array");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const std::string where = "observables[" + std::to_string(i) + "]";
      p.observables.push_back(HermitianOperator::hermitian_part(parse_operator_document(obs[i], where)));
      if (p.observables.back().dim() != p.observables.front().dim()) {
        bad(where, "dimension differs from observables[0]");
      }
    }
  }
  if (doc.contains("targets")) {
    const Json& t = doc["targets"];
    if (!t.is_array()) bad("targets", "expected an array");
    for (std::size_t i = 0; i < t.size(); ++i) p.targets.push_back(number_at(t[i], "targets[" + std::to_string(i) + "]"));
  }
  if (doc.contains("prior") && !doc["prior"].is_null()) p.prior = parse_operator_document(doc["prior"], "prior");
  if (p.mode == Mode::MaxEnt && p.observables.size() != p.targets.size()) {
    bad("targets", "maxent mode needs one target per observable");
  }
  if ((p.mode == Mode::PriorTilt || p.mode == Mode::Flow) && p.observables.size() != 1) {
    bad("observables", std::string(mode_name(*p.mode)) + " mode needs exactly one observable");
  }
  return p;
}

std::string format_double(double x) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), x);
  return std::string(buffer, result.ptr);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum maximum-entropy estimation and entropic-flow geometry"};
  app.require_subcommand(1);
  Options o;

  auto add_solver_flags = [&](CLI::App* sub) {
    sub->add_option("--tol", o.tol, "Residual tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", o.max_iter, "Iteration budget")->check(CLI::PositiveNumber);
  };
  auto add_output_flags = [&](CLI::App* sub) {
    sub->add_option("--output", o.output, "Write the result document to this file");
    sub->add_flag("--quiet", o.quiet, "Do not print the result document");
  };

  CLI::App* estimate = app.add_subcommand("estimate", "MaxEnt estimate from expectation constraints");
  estimate->add_option("--problem", o.problem, "Problem document")->required();
  add_solver_flags(estimate);
  add_output_flags(estimate);

  CLI::App* tilt = app.add_subcommand("tilt", "Tilt a prior toward one expectation constraint");
  tilt->add_option("--problem", o.problem, "Problem document")->required();
  add_solver_flags(tilt);
  add_output_flags(tilt);

  CLI::App* flow = app.add_subcommand("flow", "Integrate the entropic flow or follow it to a target");
  flow->add_option("--problem", o.problem, "Problem document")->required();
  flow->add_option("--lambda-end", o.lambda_end, "Integrate up to this flow parameter");
  flow->add_option("--step", o.step, "Integrator step");
  flow->add_option("--csv", o.csv, "Write trajectory samples as CSV");
  add_solver_flags(flow);
  add_output_flags(flow);

  CLI::App* metric = app.add_subcommand("metric", "Metric on the supplied forms and vectors at a state");
  metric->add_option("--problem", o.problem, "Problem document")->required();
  add_output_flags(metric);

  CLI::App* entropy = app.add_subcommand("entropy", "Von Neumann entropy of a state");
  entropy->add_option("--state", o.state, "State document")->required();
  add_output_flags(entropy);

  CLI::App* rel = app.add_subcommand("rel-entropy", "Relative entropy -tr[rho(log rho - log rho0)]");
  rel->add_option("--state", o.state, "State document")->required();
  rel->add_option("--prior", o.prior, "Prior state document")->required();
  add_output_flags(rel);

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("qmaxent");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    write_error(err, "usage", kExitInputError, e.what());
    return kExitInputError;
  }

  try {
    Json result;
    if (estimate->parsed()) {
      result = cmd_estimate(o);
    } else if (tilt->parsed()) {
      result = cmd_tilt(o);
    } else if (flow->parsed()) {
      result = cmd_flow(o);
    } else if (metric->parsed()) {
      result = cmd_metric(o);
    } else if (entropy->parsed()) {
      result = cmd_entropy(o);
    } else {
      result = cmd_rel_entropy(o);
    }
    const std::string text = result.dump(2) + "\n";
    if (!o.output.empty()) {
      std::ofstream file(o.output, std::ios::binary);
      if (!file || !(file << text)) throw DocumentError(o.output + ": cannot write output");
    }
    if (!o.quiet) out << text;
    return kExitOk;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    write_error(err, std::string(to_string(e.kind())), code, e.what());
    return code;
  } catch (const DocumentError& e) {
    write_error(err, "invalid_input", kExitInputError, e.what());
    return kExitInputError;
  } catch (const Json::exception& e) {
    write_error(err, "invalid_input", kExitInputError, e.what());
    return kExitInputError;
  } catch (const std::exception& e) {
    write_error(err, "internal_error", kExitNumericalFailure, e.what());
    return kExitNumericalFailure;
  }
}

}  // namespace qmaxent::cli
