#include "qmaxent/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qmaxent {

namespace {

ComplexMatrix validated_hermitian(const ComplexMatrix& raw) {
  if (raw.rows() != raw.cols()) {
    fail(ErrorKind::NonSquare, "matrix is " + std::to_string(raw.rows()) + "x" +
                                    std::to_string(raw.cols()) + ", expected square");
  }
  if (raw.rows() == 0) fail(ErrorKind::NonSquare, "matrix has dimension 0");
  if (!raw.allFinite()) fail(ErrorKind::NotHermitian, "matrix has non-finite entries");

  const double asymmetry = (raw - raw.adjoint()).cwiseAbs().maxCoeff();
  if (asymmetry > kHermitianTol) {
    fail(ErrorKind::NotHermitian,
         "max |M - M^dagger| entry is " + std::to_string(asymmetry) + " (tolerance 1e-12)");
  }
  return (raw + raw.adjoint()) * 0.5;
}

}  // namespace

HermitianOperator::HermitianOperator(const ComplexMatrix& raw) : entries_(validated_hermitian(raw)) {}

HermitianOperator HermitianOperator::identity(Eigen::Index dim) {
  return HermitianOperator(Trusted{}, ComplexMatrix::Identity(dim, dim));
}

HermitianOperator HermitianOperator::zero(Eigen::Index dim) {
  return HermitianOperator(Trusted{}, ComplexMatrix::Zero(dim, dim));
}

HermitianOperator HermitianOperator::hermitian_part(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) fail(ErrorKind::NonSquare, "hermitian_part of non-square matrix");
  return HermitianOperator(Trusted{}, (m + m.adjoint()) * 0.5);
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& other) const {
  require_same_dim(dim(), other.dim(), "operator+");
  return HermitianOperator(Trusted{}, entries_ + other.entries_);
}

HermitianOperator HermitianOperator::operator-(const HermitianOperator& other) const {
  require_same_dim(dim(), other.dim(), "operator-");
  return HermitianOperator(Trusted{}, entries_ - other.entries_);
}

HermitianOperator HermitianOperator::operator-() const { return HermitianOperator(Trusted{}, -entries_); }

HermitianOperator HermitianOperator::operator*(double scale) const {
  return HermitianOperator(Trusted{}, entries_ * scale);
}

DensityOperator::DensityOperator(const ComplexMatrix& raw) : op_(raw) {
  const double tr = op_.trace();
  if (!(std::abs(tr - 1.0) <= kTraceTol)) {
    fail(ErrorKind::TraceNotOne, "trace is " + std::to_string(tr) + ", expected 1 within 1e-10");
  }
  const double min_eig = eigenvalues(op_).minCoeff();
  if (min_eig < -kPositivityTol) {
    fail(ErrorKind::NotPositive,
         "smallest eigenvalue is " + std::to_string(min_eig) + " (floor -1e-10)");
  }
}

DensityOperator DensityOperator::maximally_mixed(Eigen::Index dim) {
  return DensityOperator(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

ComplexMatrix SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

HermitianOperator make_hermitian(const ComplexMatrix& raw) { return HermitianOperator(raw); }

DensityOperator make_density(const ComplexMatrix& raw) { return DensityOperator(raw); }

SpectralDecomposition eig_hermitian(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::ConvergenceFailure, "Hermitian eigensolver did not converge");
  }
  const Eigen::Index n = h.dim();
  SpectralDecomposition out{RealVector(n), ComplexMatrix(n, n)};
  // Eigen sorts ascending.
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = solver.eigenvalues()(n - 1 - k);
    out.eigenvectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    auto col = out.eigenvectors.col(k);
    const double largest = col.cwiseAbs().maxCoeff();
    Eigen::Index pivot = 0;
    while (std::abs(col(pivot)) < largest - 1e-12) ++pivot;
    const Complex phase = std::conj(col(pivot)) / std::abs(col(pivot));
    col *= phase;
    col(pivot) = Complex(col(pivot).real(), 0.0);
  }
  return out;
}

RealVector eigenvalues(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::ConvergenceFailure, "Hermitian eigensolver did not converge");
  }
  return solver.eigenvalues().reverse();
}

HermitianOperator apply_spectral_function(const HermitianOperator& h, SpectralFunction f) {
  const SpectralDecomposition eig = eig_hermitian(h);
  RealVector mapped(eig.eigenvalues.size());
  for (Eigen::Index k = 0; k < mapped.size(); ++k) {
    const double p = eig.eigenvalues(k);
    switch (f) {
      case SpectralFunction::Exp:
        mapped(k) = std::exp(p);
        break;
      case SpectralFunction::Log:
        if (!(p > kLogFloor)) {
          fail(ErrorKind::DomainError,
               "logarithm of eigenvalue " + std::to_string(p) + " (must exceed 1e-12)");
        }
        mapped(k) = std::log(p);
        break;
    }
  }
  if (!mapped.allFinite()) fail(ErrorKind::Overflow, "spectral function produced non-finite values");
  return HermitianOperator::hermitian_part(eig.eigenvectors * mapped.cast<Complex>().asDiagonal() *
                                           eig.eigenvectors.adjoint());
}

HermitianOperator apply_spectral_function(const HermitianOperator& h,
                                          const std::function<double(double)>& f) {
  const SpectralDecomposition eig = eig_hermitian(h);
  RealVector mapped = eig.eigenvalues.unaryExpr(f);
  if (!mapped.allFinite()) fail(ErrorKind::DomainError, "spectral function produced non-finite values");
  return HermitianOperator::hermitian_part(eig.eigenvectors * mapped.cast<Complex>().asDiagonal() *
                                           eig.eigenvectors.adjoint());
}

double expectation(const DensityOperator& rho, const HermitianOperator& a) {
  require_same_dim(rho.dim(), a.dim(), "expectation");
  // tr(rho A) = sum_jk rho_jk A_kj
  const Complex value = (rho.matrix().array() * a.matrix().transpose().array()).sum();
  const double scale = std::max(1.0, rho.matrix().norm() * a.matrix().norm());
  if (std::abs(value.imag()) > kHermitianTol * scale) {
    fail(ErrorKind::NonRealResult,
         "tr(rho A) has imaginary part " + std::to_string(value.imag()));
  }
  return value.real();
}

double commutator_norm(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a.dim(), b.dim(), "commutator_norm");
  return (a.matrix() * b.matrix() - b.matrix() * a.matrix()).norm();
}

double trace_product(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a.dim(), b.dim(), "trace_product");
  return (a.matrix().array() * b.matrix().transpose().array()).sum().real();
}

double trace_distance(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a.dim(), b.dim(), "trace_distance");
  return 0.5 * eigenvalues(a - b).cwiseAbs().sum();
}

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* where) {
  if (a != b) {
    fail(ErrorKind::DimMismatch, std::string(where) + ": dimension " + std::to_string(a) +
                                      " does not match " + std::to_string(b));
  }
}

}  // namespace qmaxent
