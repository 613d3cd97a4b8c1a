#pragma once

#include <complex>
#include <functional>

#include <Eigen/Dense>

#include "qmaxent/error.hpp"

namespace qmaxent {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-10;
/// Eigenvalues at or below this are treated as exact zeros by logarithms.
inline constexpr double kLogFloor = 1e-12;

/// Dense Hermitian operator in a fixed computational basis. Observables,
/// 1-forms and tangent directions all use this representation.
class HermitianOperator {
 public:
  /// Validating constructor, see make_hermitian().
  explicit HermitianOperator(const ComplexMatrix& raw);

  static HermitianOperator identity(Eigen::Index dim);
  static HermitianOperator zero(Eigen::Index dim);
  /// (M + M^dagger)/2 without a tolerance check. For internally computed
  /// matrices that are Hermitian up to rounding.
  static HermitianOperator hermitian_part(const ComplexMatrix& m);

  Eigen::Index dim() const { return entries_.rows(); }
  const ComplexMatrix& matrix() const { return entries_; }
  Complex operator()(Eigen::Index row, Eigen::Index col) const { return entries_(row, col); }

  double trace() const { return entries_.trace().real(); }
  double frobenius_norm() const { return entries_.norm(); }

  HermitianOperator operator+(const HermitianOperator& other) const;
  HermitianOperator operator-(const HermitianOperator& other) const;
  HermitianOperator operator-() const;
  HermitianOperator operator*(double scale) const;
  friend HermitianOperator operator*(double scale, const HermitianOperator& op) { return op * scale; }

 private:
  struct Trusted {};
  HermitianOperator(Trusted, ComplexMatrix entries) : entries_(std::move(entries)) {}

  ComplexMatrix entries_;
};

/// Hermitian, unit-trace, positive-semidefinite operator.
class DensityOperator {
 public:
  /// Validating constructor, see make_density().
  explicit DensityOperator(const ComplexMatrix& raw);

  static DensityOperator maximally_mixed(Eigen::Index dim);

  Eigen::Index dim() const { return op_.dim(); }
  const ComplexMatrix& matrix() const { return op_.matrix(); }
  const HermitianOperator& hermitian() const { return op_; }
  Complex operator()(Eigen::Index row, Eigen::Index col) const { return op_(row, col); }

 private:
  HermitianOperator op_;
};

struct SpectralDecomposition {
  RealVector eigenvalues;      // descending
  ComplexMatrix eigenvectors;  // columns, unitary

  ComplexMatrix reconstruct() const;
};

enum class SpectralFunction { Exp, Log };

HermitianOperator make_hermitian(const ComplexMatrix& raw);
DensityOperator make_density(const ComplexMatrix& raw);

/// Eigenvalues descending. Each eigenvector is rotated so that its
/// largest-magnitude component (first one on ties) is real and positive.
SpectralDecomposition eig_hermitian(const HermitianOperator& h);
RealVector eigenvalues(const HermitianOperator& h);

HermitianOperator apply_spectral_function(const HermitianOperator& h, SpectralFunction f);
HermitianOperator apply_spectral_function(const HermitianOperator& h,
                                          const std::function<double(double)>& f);

/// tr(rho A).
double expectation(const DensityOperator& rho, const HermitianOperator& a);

/// Frobenius norm of AB - BA.
double commutator_norm(const HermitianOperator& a, const HermitianOperator& b);

/// Real part of tr(AB) for Hermitian A, B.
double trace_product(const HermitianOperator& a, const HermitianOperator& b);

/// Half the sum of absolute eigenvalues of a - b.
double trace_distance(const HermitianOperator& a, const HermitianOperator& b);
inline double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  return trace_distance(a.hermitian(), b.hermitian());
}

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* where);

}  // namespace qmaxent
