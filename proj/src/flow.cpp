#include "qmaxent/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qmaxent/monotone_root.hpp"

namespace qmaxent {

namespace {

constexpr double kOverflowExponent = 700.0;
constexpr double kPositivityLossFloor = -1e-8;
constexpr long long kMaxSamples = 1000;

ComplexMatrix field_of(const ComplexMatrix& rho, const ComplexMatrix& a) {
  const double mean = (rho.array() * a.transpose().array()).sum().real();
  ComplexMatrix centered = a;
  centered.diagonal().array() -= mean;
  return -0.5 * (rho * centered + centered * rho);
}

double min_eigenvalue(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::ConvergenceFailure, "Hermitian eigensolver did not converge");
  }
  return solver.eigenvalues()(0);
}

}  // namespace

const FlowSample& FlowTrajectory::endpoint() const {
  return lambda_end >= 0.0 ? samples.back() : samples.front();
}

HermitianOperator flow_field(const DensityOperator& rho, const HermitianOperator& a) {
  require_same_dim(rho.dim(), a.dim(), "flow_field");
  return HermitianOperator::hermitian_part(field_of(rho.matrix(), a.matrix()));
}

FlowTrajectory integrate_flow(const DensityOperator& rho0, const HermitianOperator& a, double lambda_end,
                              double step) {
  require_same_dim(rho0.dim(), a.dim(), "integrate_flow");
  if (!(step > 0.0) || !std::isfinite(step)) {
    fail(ErrorKind::StepInvalid, "integrate_flow: step must be positive and finite");
  }
  if (!std::isfinite(lambda_end)) fail(ErrorKind::StepInvalid, "integrate_flow: lambda_end is not finite");
  const double ratio = std::abs(lambda_end) / step;
  if (ratio > 1e9) fail(ErrorKind::StepInvalid, "integrate_flow: more than 1e9 steps requested");

  FlowTrajectory out{a, {}, step, lambda_end};
  out.samples.push_back(FlowSample{0.0, rho0, expectation(rho0, a)});
  if (lambda_end == 0.0) return out;

  const auto steps = static_cast<long long>(std::ceil(ratio - 1e-9));
  const double h = lambda_end / static_cast<double>(steps);
  const long long stride = (steps + kMaxSamples - 1) / kMaxSamples;
  out.step = std::abs(h);

  const ComplexMatrix& obs = a.matrix();
  ComplexMatrix rho = rho0.matrix();
  for (long long k = 1; k <= steps; ++k) {
    const ComplexMatrix k1 = field_of(rho, obs);
    const ComplexMatrix k2 = field_of(rho + 0.5 * h * k1, obs);
    const ComplexMatrix k3 = field_of(rho + 0.5 * h * k2, obs);
    const ComplexMatrix k4 = field_of(rho + h * k3, obs);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = (rho + rho.adjoint()) * 0.5;

    const double smallest = min_eigenvalue(rho);
    if (smallest < kPositivityLossFloor) {
      fail(ErrorKind::PositivityLoss, "integrate_flow: eigenvalue " + std::to_string(smallest) +
                                          " at lambda " + std::to_string(h * static_cast<double>(k)) +
                                          "; reduce the step");
    }
    if (k % stride == 0 || k == steps) {
      const double lambda = k == steps ? lambda_end : h * static_cast<double>(k);
      try {
        DensityOperator state(rho);
        const double mean = expectation(state, a);
        out.samples.push_back(FlowSample{lambda, std::move(state), mean});
      } catch (const Error& e) {
        fail(ErrorKind::PositivityLoss, std::string("integrate_flow: invalid state: ") + e.what());
      }
    }
  }
  if (lambda_end < 0.0) std::reverse(out.samples.begin(), out.samples.end());
  return out;
}

DensityOperator closed_form_flow(const DensityOperator& rho0, const HermitianOperator& a, double lambda) {
  require_same_dim(rho0.dim(), a.dim(), "closed_form_flow");
  if (lambda == 0.0) return rho0;
  const SpectralDecomposition eig = eig_hermitian(a);
  const RealVector& values = eig.eigenvalues;
  const double radius = values.cwiseAbs().maxCoeff();
  if (!std::isfinite(lambda) || std::abs(lambda) * radius > kOverflowExponent) {
    fail(ErrorKind::Overflow, "closed_form_flow: |lambda| * spectral radius exceeds 700");
  }
  // Shift so the largest exponent is zero; it cancels in the normalization.
  const double shift = (-0.5 * lambda * values.array()).maxCoeff();
  const RealVector half = (-0.5 * lambda * values.array() - shift).exp().matrix();
  const ComplexMatrix k = eig.eigenvectors * half.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
  const ComplexMatrix unnormalized = k * rho0.matrix() * k;
  const double z = unnormalized.trace().real();
  if (!(z > 0.0) || !std::isfinite(z)) {
    fail(ErrorKind::Overflow, "closed_form_flow: normalization underflowed");
  }
  return make_density(HermitianOperator::hermitian_part(unnormalized / z).matrix());
}

FlowTarget flow_to_constraint(const DensityOperator& rho0, const HermitianOperator& a, double target,
                              const SolverOptions& opts) {
  require_same_dim(rho0.dim(), a.dim(), "flow_to_constraint");
  if (!std::isfinite(target)) fail(ErrorKind::InvalidArgument, "flow_to_constraint: target is not finite");

  const Interval range = tilt_reachable_interval(rho0, a);
  const double slack = 1e-12 * std::max(1.0, range.upper - range.lower);
  if (range.upper - range.lower <= slack) {
    if (std::abs(target - range.lower) <= opts.tol) {
      return FlowTarget{0.0, rho0, 0, std::abs(expectation(rho0, a) - target)};
    }
    fail(ErrorKind::Infeasible, "observable is constant on the initial state's support");
  }
  if (target <= range.lower + slack || target >= range.upper - slack) {
    fail(ErrorKind::Infeasible, "target " + std::to_string(target) + " outside open interval (" +
                                    std::to_string(range.lower) + ", " + std::to_string(range.upper) + ")");
  }

  auto mean_along_flow = [&](double lambda) -> std::pair<double, double> {
    const DensityOperator state = closed_form_flow(rho0, a, lambda);
    const double rate = trace_product(a, flow_field(state, a));
    return {expectation(state, a) - target, rate};
  };

  MonotoneRootOptions root_opts;
  root_opts.tol = opts.tol;
  root_opts.max_iter = opts.max_iter;
  const double radius = eigenvalues(a).cwiseAbs().maxCoeff();
  root_opts.x_limit = kOverflowExponent / radius;
  MonotoneRoot root;
  try {
    root = find_decreasing_root(mean_along_flow, root_opts);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Infeasible) throw;
    fail(ErrorKind::Overflow, "flow_to_constraint: target needs |lambda| beyond the overflow guard");
  }
  DensityOperator state = closed_form_flow(rho0, a, root.x);
  const double residual = std::abs(expectation(state, a) - target);
  return FlowTarget{root.x, std::move(state), root.iterations, residual};
}

}  // namespace qmaxent
