#pragma once

#include <vector>

#include "qmaxent/operator_core.hpp"

namespace qmaxent {

/// Expectation-value constraints <A_j> = target_j on a shared Hilbert space.
///
/// Construction checks that every target lies in [min eig A_j, max eig A_j]
/// (Infeasible otherwise) and that the traceless parts of the observables are
/// linearly independent (DependentConstraints when the Gram matrix condition
/// number exceeds 1e12), since dependent constraints leave the multipliers
/// undetermined.
class ConstraintSet {
 public:
  /// Unconstrained problem on a `dim`-dimensional space.
  explicit ConstraintSet(Eigen::Index dim);
  ConstraintSet(std::vector<HermitianOperator> observables, std::vector<double> targets);

  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return observables_.size(); }
  const std::vector<HermitianOperator>& observables() const { return observables_; }
  const std::vector<double>& targets() const { return targets_; }

  /// Same observables, different targets (validated again).
  ConstraintSet with_targets(std::vector<double> targets) const;

 private:
  Eigen::Index dim_;
  std::vector<HermitianOperator> observables_;
  std::vector<double> targets_;
};

struct MaxEntSolution {
  std::vector<double> multipliers;
  double lambda0 = 0.0;  // log Z
  DensityOperator estimate;
  std::vector<double> achieved;
  double s_max = 0.0;  // lambda0 + sum_j lambda_j target_j
  int iterations = 0;
  double residual = 0.0;  // max_j |achieved_j - target_j|
};

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 500;
};

struct DualValue {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Z = tr exp(-sum_k lambda_k A_k). Throws Overflow when the spectral radius
/// of the exponent exceeds 700.
double partition_function(const std::vector<double>& multipliers,
                          const std::vector<HermitianOperator>& observables);

/// exp(-sum_k lambda_k A_k) / Z.
DensityOperator gibbs_state(const std::vector<double>& multipliers,
                            const std::vector<HermitianOperator>& observables);

/// Convex dual log Z(lambda) + sum_j lambda_j target_j and its gradient
/// target_j - <A_j>_{rho(lambda)}. Evaluated with a shifted exponent, so large
/// multipliers do not overflow.
DualValue dual_objective(const std::vector<double>& multipliers, const ConstraintSet& constraints);

/// Maximum-entropy state subject to the constraints, found by BFGS descent on
/// the dual with Armijo backtracking from lambda = 0.
///
/// Throws Infeasible when a target sits on the spectral boundary of its
/// observable, or when the multipliers run past 1e4 without the gradient
/// vanishing; MaxIterExceeded when the iteration budget is exhausted.
MaxEntSolution solve_maxent(const ConstraintSet& constraints, const SolverOptions& opts = {});

/// Central finite-difference estimate of dS_max/d(target_j). At the solution
/// these equal the multipliers.
std::vector<double> entropy_sensitivity(const ConstraintSet& constraints, double step = 1e-4,
                                        const SolverOptions& opts = {});

struct PriorTiltSolution {
  double lambda = 0.0;
  DensityOperator estimate;
  int iterations = 0;
  double residual = 0.0;  // |<A> - target|
};

/// Tilts a prior toward one expectation constraint with the symmetric update
///   rho(lambda) = e^{-lambda A/2} rho0 e^{-lambda A/2} / tr(e^{-lambda A} rho0).
/// In A's eigenbasis <A>(lambda) is a classical tilted mean of A's spectrum
/// weighted by the prior's diagonal, strictly decreasing in lambda, so lambda
/// is found by a safeguarded one-dimensional Newton iteration.
///
/// Throws Infeasible if the target is not strictly inside the range of A's
/// eigenvalues that carry prior weight.
PriorTiltSolution solve_prior_tilt(const DensityOperator& prior, const HermitianOperator& a,
                                   double target, const SolverOptions& opts = {});

/// Open interval of expectation values reachable by tilting `prior` along `a`.
/// Bounds are equal when A is constant on the prior's support.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};
Interval tilt_reachable_interval(const DensityOperator& prior, const HermitianOperator& a);

/// The tilted prior at a given lambda (no root finding).
DensityOperator tilted_state(const DensityOperator& prior, const HermitianOperator& a, double lambda);

/// Classical maximum-entropy tilt p_i ∝ w_i exp(-sum_k lambda_k v_{k,i}) that
/// matches the targets. Solved by damped Newton on the classical dual with the
/// exact covariance Hessian; used to cross-check the quantum solver on
/// commuting observables.
std::vector<double> classical_gibbs_oracle(const std::vector<double>& weights,
                                           const std::vector<std::vector<double>>& values,
                                           const std::vector<double>& targets);

}  // namespace qmaxent
