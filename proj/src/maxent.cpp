#include "qmaxent/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qmaxent/monotone_root.hpp"

namespace qmaxent {

namespace {

constexpr double kOverflowExponent = 700.0;
constexpr double kMultiplierCap = 1e4;
constexpr double kArmijoSlope = 1e-4;
constexpr double kShrink = 0.5;
constexpr int kMaxBacktracks = 60;

/// Canonical state for a given exponent M, evaluated as
/// exp(-(M - mu_min)) / tr exp(-(M - mu_min)) so that no term overflows.
struct Canonical {
  double log_z = 0.0;
  double spectral_radius = 0.0;
  ComplexMatrix rho;
};

ComplexMatrix exponent_of(const std::vector<double>& multipliers,
                          const std::vector<HermitianOperator>& observables, Eigen::Index dim) {
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (std::size_t k = 0; k < observables.size(); ++k) {
    m += multipliers[k] * observables[k].matrix();
  }
  return m;
}

Canonical canonical(const ComplexMatrix& exponent) {
  const SpectralDecomposition eig = eig_hermitian(HermitianOperator::hermitian_part(exponent));
  const RealVector& mu = eig.eigenvalues;
  const double mu_min = mu.minCoeff();
  const RealVector w = (-(mu.array() - mu_min)).exp().matrix();
  const double total = w.sum();

  Canonical out;
  out.log_z = -mu_min + std::log(total);
  out.spectral_radius = mu.cwiseAbs().maxCoeff();
  out.rho = eig.eigenvectors * (w / total).cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
  out.rho = (out.rho + out.rho.adjoint()) * 0.5;
  return out;
}

Eigen::Index shared_dim(const std::vector<HermitianOperator>& observables, const char* where) {
  if (observables.empty()) {
    fail(ErrorKind::InvalidArgument, std::string(where) + ": no observables to fix the dimension");
  }
  const Eigen::Index dim = observables.front().dim();
  for (const auto& a : observables) require_same_dim(dim, a.dim(), where);
  return dim;
}

void require_lengths(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    fail(ErrorKind::DimMismatch, std::string(where) + ": " + std::to_string(a) +
                                      " multipliers for " + std::to_string(b) + " observables");
  }
}

double spread_tolerance(double lo, double hi) { return 1e-12 * std::max(1.0, hi - lo); }

/// Traceless parts' Gram matrix tr(B_i B_j), B_i = A_i - tr(A_i)/n.
Eigen::MatrixXd traceless_gram(const std::vector<HermitianOperator>& observables, Eigen::Index dim) {
  const auto m = static_cast<Eigen::Index>(observables.size());
  std::vector<HermitianOperator> centered;
  centered.reserve(observables.size());
  for (const auto& a : observables) {
    centered.push_back(a - HermitianOperator::identity(dim) * (a.trace() / static_cast<double>(dim)));
  }
  Eigen::MatrixXd gram(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      gram(i, j) = gram(j, i) = trace_product(centered[i], centered[j]);
    }
  }
  return gram;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

// ---------------------------------------------------------------------------
// ConstraintSet

ConstraintSet::ConstraintSet(Eigen::Index dim) : dim_(dim) {
  if (dim < 1) fail(ErrorKind::InvalidArgument, "constraint set dimension must be positive");
}

ConstraintSet::ConstraintSet(std::vector<HermitianOperator> observables, std::vector<double> targets)
    : dim_(shared_dim(observables, "ConstraintSet")),
      observables_(std::move(observables)),
      targets_(std::move(targets)) {
  if (observables_.size() != targets_.size()) {
    fail(ErrorKind::DimMismatch, "ConstraintSet: " + std::to_string(observables_.size()) +
                                      " observables but " + std::to_string(targets_.size()) +
                                      " targets");
  }
  for (std::size_t j = 0; j < observables_.size(); ++j) {
    if (!std::isfinite(targets_[j])) {
      fail(ErrorKind::InvalidArgument, "target " + std::to_string(j) + " is not finite");
    }
    const RealVector spectrum = eigenvalues(observables_[j]);
    const double hi = spectrum.maxCoeff();
    const double lo = spectrum.minCoeff();
    const double slack = spread_tolerance(lo, hi);
    if (targets_[j] < lo - slack || targets_[j] > hi + slack) {
      fail(ErrorKind::Infeasible, "target " + std::to_string(j) + " = " +
                                       std::to_string(targets_[j]) + " outside spectrum [" +
                                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
  }
  if (!observables_.empty()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(traceless_gram(observables_, dim_),
                                                        Eigen::EigenvaluesOnly);
    const double largest = gram.eigenvalues().maxCoeff();
    const double smallest = gram.eigenvalues().minCoeff();
    if (!(smallest > 0.0) || largest / smallest > 1e12) {
      fail(ErrorKind::DependentConstraints,
           "observables are linearly dependent modulo the identity (Gram condition number " +
               std::to_string(smallest > 0.0 ? largest / smallest
                                             : std::numeric_limits<double>::infinity()) +
               ")");
    }
  }
}

ConstraintSet ConstraintSet::with_targets(std::vector<double> targets) const {
  if (observables_.empty()) {
    if (!targets.empty()) fail(ErrorKind::DimMismatch, "targets given for an empty constraint set");
    return *this;
  }
  return ConstraintSet(observables_, std::move(targets));
}

// ---------------------------------------------------------------------------
// Canonical state and dual

double partition_function(const std::vector<double>& multipliers,
                          const std::vector<HermitianOperator>& observables) {
  require_lengths(multipliers.size(), observables.size(), "partition_function");
  const Eigen::Index dim = shared_dim(observables, "partition_function");
  const Canonical c = canonical(exponent_of(multipliers, observables, dim));
  if (c.spectral_radius > kOverflowExponent) {
    fail(ErrorKind::Overflow, "exponent spectral radius " + std::to_string(c.spectral_radius) +
                                   " exceeds 700");
  }
  return std::exp(c.log_z);
}

DensityOperator gibbs_state(const std::vector<double>& multipliers,
                            const std::vector<HermitianOperator>& observables) {
  require_lengths(multipliers.size(), observables.size(), "gibbs_state");
  const Eigen::Index dim = shared_dim(observables, "gibbs_state");
  const Canonical c = canonical(exponent_of(multipliers, observables, dim));
  if (c.spectral_radius > kOverflowExponent) {
    fail(ErrorKind::Overflow, "exponent spectral radius " + std::to_string(c.spectral_radius) +
                                   " exceeds 700");
  }
  return make_density(c.rho);
}

namespace {

struct DualEval {
  double value = 0.0;
  double scale = 0.0;  // sum of term magnitudes; bounds the rounding in value
  Eigen::VectorXd gradient;
  Canonical state;
};

DualEval evaluate_dual(const Eigen::VectorXd& lambda, const ConstraintSet& constraints) {
  const auto& obs = constraints.observables();
  const auto& targets = constraints.targets();
  const Eigen::Index dim = constraints.dim();
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (std::size_t k = 0; k < obs.size(); ++k) m += lambda(static_cast<Eigen::Index>(k)) * obs[k].matrix();

  DualEval out;
  out.state = canonical(m);
  out.value = out.state.log_z;
  out.scale = 1.0 + std::abs(out.state.log_z);
  out.gradient.resize(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const auto idx = static_cast<Eigen::Index>(k);
    out.value += lambda(idx) * targets[k];
    out.scale += std::abs(lambda(idx) * targets[k]) + std::abs(lambda(idx)) * obs[k].frobenius_norm();
    const double mean = (out.state.rho.array() * obs[k].matrix().transpose().array()).sum().real();
    out.gradient(idx) = targets[k] - mean;
  }
  if (!std::isfinite(out.value) || !out.gradient.allFinite()) {
    fail(ErrorKind::Overflow, "dual objective is not finite");
  }
  return out;
}

}  // namespace

DualValue dual_objective(const std::vector<double>& multipliers, const ConstraintSet& constraints) {
  require_lengths(multipliers.size(), constraints.size(), "dual_objective");
  const DualEval e = evaluate_dual(
      Eigen::Map<const Eigen::VectorXd>(multipliers.data(), static_cast<Eigen::Index>(multipliers.size())),
      constraints);
  return DualValue{e.value, std::vector<double>(e.gradient.begin(), e.gradient.end())};
}

// ---------------------------------------------------------------------------
// Solver

MaxEntSolution solve_maxent(const ConstraintSet& constraints, const SolverOptions& opts) {
  const Eigen::Index dim = constraints.dim();
  const auto m = static_cast<Eigen::Index>(constraints.size());
  const auto& obs = constraints.observables();
  const auto& targets = constraints.targets();

  if (m == 0) {
    const double log_n = std::log(static_cast<double>(dim));
    return MaxEntSolution{{}, log_n, DensityOperator::maximally_mixed(dim), {}, log_n, 0, 0.0};
  }

  // A target on the spectral boundary needs an infinite multiplier.
  for (Eigen::Index j = 0; j < m; ++j) {
    const RealVector spectrum = eigenvalues(obs[j]);
    const double lo = spectrum.minCoeff();
    const double hi = spectrum.maxCoeff();
    const double t = targets[j];
    if (t <= lo + spread_tolerance(lo, hi) || t >= hi - spread_tolerance(lo, hi)) {
      fail(ErrorKind::Infeasible, "constraint " + std::to_string(j) + ": target " + std::to_string(t) +
                                      " is an extreme eigenvalue; only a state supported on that eigenspace attains it");
    }
  }

  // The dual's Hessian at lambda = 0 is the covariance under I/n, tr(B_i B_j)/n.
  const Eigen::MatrixXd initial_inverse =
      (traceless_gram(obs, dim) / static_cast<double>(dim)).ldlt().solve(Eigen::MatrixXd::Identity(m, m));

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd inverse_hessian = initial_inverse;
  DualEval current = evaluate_dual(lambda, constraints);
  int iterations = 0;
  constexpr double eps = std::numeric_limits<double>::epsilon();

  while (max_abs(current.gradient) > opts.tol) {
    if (iterations >= opts.max_iter) {
      fail(ErrorKind::MaxIterExceeded, "solve_maxent: no convergence after " +
                                            std::to_string(iterations) + " iterations (residual " +
                                            std::to_string(max_abs(current.gradient)) + ")");
    }
    ++iterations;

    Eigen::VectorXd direction = -inverse_hessian * current.gradient;
    double slope = current.gradient.dot(direction);
    if (!(slope < 0.0)) {
      inverse_hessian = initial_inverse;
      direction = -inverse_hessian * current.gradient;
      slope = current.gradient.dot(direction);
    }

    double alpha = 1.0;
    bool accepted = false;
    DualEval trial;
    for (int k = 0; k < kMaxBacktracks; ++k) {
      trial = evaluate_dual(lambda + alpha * direction, constraints);
      // Near the optimum the decrease drops below the rounding in the value,
      // while the gradient is still accurate; accept on either test.
      const double allowance = 8.0 * eps * std::max(current.scale, trial.scale);
      if (trial.value <= current.value + kArmijoSlope * alpha * slope + allowance ||
          max_abs(trial.gradient) < 0.5 * max_abs(current.gradient)) {
        accepted = true;
        break;
      }
      alpha *= kShrink;
    }
    if (!accepted) {
      fail(ErrorKind::MaxIterExceeded, "solve_maxent: line search failed at residual " +
                                            std::to_string(max_abs(current.gradient)));
    }

    const Eigen::VectorXd s = alpha * direction;
    const Eigen::VectorXd y = trial.gradient - current.gradient;
    lambda += s;
    current = std::move(trial);

    const double sy = s.dot(y);
    if (sy > eps * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
      inverse_hessian = (id - rho * s * y.transpose()) * inverse_hessian * (id - rho * y * s.transpose()) +
                        rho * s * s.transpose();
    }

    if (max_abs(lambda) > kMultiplierCap && max_abs(current.gradient) > opts.tol) {
      fail(ErrorKind::Infeasible, "solve_maxent: multipliers diverged past 1e4 (residual " +
                                       std::to_string(max_abs(current.gradient)) + ")");
    }
  }

  DensityOperator estimate = make_density(current.state.rho);
  std::vector<double> achieved(static_cast<std::size_t>(m));
  double residual = 0.0;
  double s_max = current.state.log_z;
  for (Eigen::Index j = 0; j < m; ++j) {
    achieved[j] = expectation(estimate, obs[j]);
    residual = std::max(residual, std::abs(achieved[j] - targets[j]));
    s_max += lambda(j) * targets[j];
  }
  return MaxEntSolution{std::vector<double>(lambda.begin(), lambda.end()),
                        current.state.log_z,
                        std::move(estimate),
                        std::move(achieved),
                        s_max,
                        iterations,
                        residual};
}

std::vector<double> entropy_sensitivity(const ConstraintSet& constraints, double step,
                                        const SolverOptions& opts) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    fail(ErrorKind::InvalidArgument, "entropy_sensitivity: step must be positive");
  }
  std::vector<double> out(constraints.size());
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    std::vector<double> up = constraints.targets();
    std::vector<double> down = constraints.targets();
    up[j] += step;
    down[j] -= step;
    const double s_up = solve_maxent(constraints.with_targets(up), opts).s_max;
    const double s_down = solve_maxent(constraints.with_targets(down), opts).s_max;
    out[j] = (s_up - s_down) / (2.0 * step);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prior tilt

namespace {

/// A in its eigenbasis plus the prior's diagonal weights in that basis.
struct TiltBasis {
  SpectralDecomposition spectrum;
  RealVector weights;
};

TiltBasis tilt_basis(const DensityOperator& prior, const HermitianOperator& a) {
  require_same_dim(prior.dim(), a.dim(), "solve_prior_tilt");
  TiltBasis out{eig_hermitian(a), RealVector()};
  const ComplexMatrix rotated = out.spectrum.eigenvectors.adjoint() * prior.matrix() * out.spectrum.eigenvectors;
  out.weights = rotated.diagonal().real();
  return out;
}

Interval reachable(const TiltBasis& basis) {
  Interval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (Eigen::Index i = 0; i < basis.weights.size(); ++i) {
    if (basis.weights(i) > kLogFloor) {
      out.lower = std::min(out.lower, basis.spectrum.eigenvalues(i));
      out.upper = std::max(out.upper, basis.spectrum.eigenvalues(i));
    }
  }
  return out;
}

/// e^{-lambda A/2} rho0 e^{-lambda A/2} / Z with the exponent shifted so its
/// largest entry is zero; the shift cancels against the normalization.
DensityOperator tilted_state(const TiltBasis& basis, const DensityOperator& prior, double lambda) {
  if (lambda == 0.0) return prior;
  const RealVector& values = basis.spectrum.eigenvalues;
  const double ref = lambda >= 0.0 ? values.minCoeff() : values.maxCoeff();
  const RealVector half = (-0.5 * lambda * (values.array() - ref)).exp().matrix();
  const ComplexMatrix& v = basis.spectrum.eigenvectors;
  const ComplexMatrix k = v * half.cast<Complex>().asDiagonal() * v.adjoint();
  const ComplexMatrix unnormalized = k * prior.matrix() * k;
  const double z = unnormalized.trace().real();
  if (!(z > 0.0) || !std::isfinite(z)) {
    fail(ErrorKind::Overflow, "prior tilt: normalization underflowed");
  }
  return make_density(HermitianOperator::hermitian_part(unnormalized / z).matrix());
}

}  // namespace

Interval tilt_reachable_interval(const DensityOperator& prior, const HermitianOperator& a) {
  return reachable(tilt_basis(prior, a));
}

DensityOperator tilted_state(const DensityOperator& prior, const HermitianOperator& a, double lambda) {
  if (!std::isfinite(lambda)) fail(ErrorKind::InvalidArgument, "tilted_state: lambda is not finite");
  return tilted_state(tilt_basis(prior, a), prior, lambda);
}

PriorTiltSolution solve_prior_tilt(const DensityOperator& prior, const HermitianOperator& a,
                                   double target, const SolverOptions& opts) {
  const TiltBasis basis = tilt_basis(prior, a);
  const RealVector& values = basis.spectrum.eigenvalues;
  const RealVector& weights = basis.weights;
  const Interval range = reachable(basis);
  if (!std::isfinite(target)) fail(ErrorKind::InvalidArgument, "solve_prior_tilt: target is not finite");

  const double slack = spread_tolerance(range.lower, range.upper);
  if (range.upper - range.lower <= slack) {
    // A is constant on the prior's support; only that value is reachable.
    if (std::abs(target - range.lower) <= opts.tol) {
      return PriorTiltSolution{0.0, prior, 0, std::abs(expectation(prior, a) - target)};
    }
    fail(ErrorKind::Infeasible, "observable is constant on the prior's support");
  }
  if (target <= range.lower + slack || target >= range.upper - slack) {
    fail(ErrorKind::Infeasible, "target " + std::to_string(target) + " outside open interval (" +
                                     std::to_string(range.lower) + ", " + std::to_string(range.upper) +
                                     ")");
  }

  // <A>(lambda) = sum_i a_i d_i e^{-lambda a_i} / sum_i d_i e^{-lambda a_i},
  // d<A>/dlambda = -variance.
  auto tilted_mean = [&](double lambda) -> std::pair<double, double> {
    double shift = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (weights(i) > 0.0) shift = std::max(shift, -lambda * values(i));
    }
    double total = 0.0;
    double first = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (weights(i) <= 0.0) continue;
      const double w = weights(i) * std::exp(-lambda * values(i) - shift);
      total += w;
      first += w * values(i);
    }
    const double mean = first / total;
    double variance = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (weights(i) <= 0.0) continue;
      const double d = values(i) - mean;
      variance += weights(i) * std::exp(-lambda * values(i) - shift) * d * d;
    }
    return {mean - target, -variance / total};
  };

  MonotoneRootOptions root_opts;
  root_opts.tol = opts.tol;
  root_opts.max_iter = opts.max_iter;
  const MonotoneRoot root = find_decreasing_root(tilted_mean, root_opts);

  DensityOperator estimate = tilted_state(basis, prior, root.x);
  const double residual = std::abs(expectation(estimate, a) - target);
  return PriorTiltSolution{root.x, std::move(estimate), root.iterations, residual};
}

// ---------------------------------------------------------------------------
// Classical oracle

std::vector<double> classical_gibbs_oracle(const std::vector<double>& weights,
                                           const std::vector<std::vector<double>>& values,
                                           const std::vector<double>& targets) {
  const auto n = static_cast<Eigen::Index>(weights.size());
  const auto m = static_cast<Eigen::Index>(values.size());
  if (n == 0) fail(ErrorKind::InvalidArgument, "classical_gibbs_oracle: empty weight vector");
  if (values.size() != targets.size()) {
    fail(ErrorKind::DimMismatch, "classical_gibbs_oracle: values and targets differ in length");
  }
  double weight_sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) fail(ErrorKind::InvalidArgument, "classical_gibbs_oracle: negative weight");
    weight_sum += w;
  }
  if (std::abs(weight_sum - 1.0) > kTraceTol) {
    fail(ErrorKind::InvalidArgument, "classical_gibbs_oracle: weights do not sum to 1");
  }

  Eigen::MatrixXd v(m, n);
  for (Eigen::Index k = 0; k < m; ++k) {
    if (static_cast<Eigen::Index>(values[k].size()) != n) {
      fail(ErrorKind::DimMismatch, "classical_gibbs_oracle: value vector length mismatch");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Eigen::Index i = 0; i < n; ++i) {
      v(k, i) = values[k][i];
      if (weights[i] > 0.0) {
        lo = std::min(lo, v(k, i));
        hi = std::max(hi, v(k, i));
      }
    }
    const double slack = spread_tolerance(lo, hi);
    if (targets[k] <= lo + slack || targets[k] >= hi - slack) {
      fail(ErrorKind::Infeasible, "classical_gibbs_oracle: target " + std::to_string(k) +
                                       " not strictly inside the support range");
    }
  }
  const Eigen::Map<const Eigen::VectorXd> w(weights.data(), n);
  const Eigen::Map<const Eigen::VectorXd> t(targets.data(), m);
  if (m == 0) return weights;

  struct Eval {
    double value;
    Eigen::VectorXd p;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
  };
  auto evaluate = [&](const Eigen::VectorXd& lambda) {
    Eigen::VectorXd exponent = -(v.transpose() * lambda);
    double shift = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (w(i) > 0.0) shift = std::max(shift, exponent(i));
    }
    Eigen::VectorXd p(n);
    for (Eigen::Index i = 0; i < n; ++i) p(i) = w(i) > 0.0 ? w(i) * std::exp(exponent(i) - shift) : 0.0;
    const double total = p.sum();
    p /= total;
    const Eigen::VectorXd mean = v * p;
    const Eigen::MatrixXd centered = v.colwise() - mean;
    return Eval{shift + std::log(total) + lambda.dot(t), p, t - mean,
                centered * p.asDiagonal() * centered.transpose()};
  };

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  Eval current = evaluate(lambda);
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::VectorXd step = -current.hessian.ldlt().solve(current.gradient);
    if (!step.allFinite() || current.gradient.dot(step) >= 0.0) step = -current.gradient;
    const double slope = current.gradient.dot(step);
    double alpha = 1.0;
    Eval trial = evaluate(lambda + step);
    while (trial.value > current.value + kArmijoSlope * alpha * slope + 1e-15 * (1.0 + std::abs(current.value)) &&
           alpha > 1e-12) {
      alpha *= kShrink;
      trial = evaluate(lambda + alpha * step);
    }
    lambda += alpha * step;
    current = std::move(trial);
    if (max_abs(lambda) > kMultiplierCap) {
      fail(ErrorKind::Infeasible, "classical_gibbs_oracle: multipliers diverged");
    }
    if ((alpha * step).norm() <= 1e-15 * (1.0 + lambda.norm())) break;
  }
  if (max_abs(current.gradient) > 1e-12) {
    fail(ErrorKind::MaxIterExceeded, "classical_gibbs_oracle: residual " +
                                          std::to_string(max_abs(current.gradient)));
  }
  return std::vector<double>(current.p.begin(), current.p.end());
}

}  // namespace qmaxent
