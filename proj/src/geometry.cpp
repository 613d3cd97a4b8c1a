#include "qmaxent/geometry.hpp"

#include <cmath>
#include <string>

namespace qmaxent {

namespace {

void check_decomposition(Eigen::Index n, const TangentDecomposition& d, const char* where) {
  if (d.dp.size() != n) fail(ErrorKind::DimMismatch, std::string(where) + ": dp has wrong length");
  require_same_dim(n, d.h.dim(), where);
  if (std::abs(d.dp.sum()) > kHermitianTol) {
    fail(ErrorKind::InvalidArgument, std::string(where) + ": eigenvalue changes do not sum to zero");
  }
}

SpectralDecomposition full_rank_basis(const DensityOperator& rho, const char* where) {
  SpectralDecomposition eig = eig_hermitian(rho.hermitian());
  const double smallest = eig.eigenvalues.minCoeff();
  if (!(smallest > kFullRankFloor)) {
    fail(ErrorKind::SingularBase, std::string(where) + ": base state has eigenvalue " +
                                      std::to_string(smallest) + " (needs > 1e-10)");
  }
  return eig;
}

}  // namespace

TangentVector make_tangent(const DensityOperator& at, const HermitianOperator& value) {
  require_same_dim(at.dim(), value.dim(), "make_tangent");
  if (std::abs(value.trace()) > kHermitianTol) {
    fail(ErrorKind::InvalidArgument,
         "tangent vector has trace " + std::to_string(value.trace()) + ", expected 0");
  }
  return TangentVector{at, value};
}

double pair(const OneForm& form, const DensityOperator& rho) { return expectation(rho, form.value); }

HermitianOperator raise(const DensityOperator& rho, const OneForm& form) {
  require_same_dim(rho.dim(), form.value.dim(), "raise");
  const ComplexMatrix& r = rho.matrix();
  const ComplexMatrix& b = form.value.matrix();
  return HermitianOperator::hermitian_part((r * b + b * r) * 0.5);
}

OneForm lower(const DensityOperator& rho, const HermitianOperator& vector) {
  require_same_dim(rho.dim(), vector.dim(), "lower");
  const SpectralDecomposition eig = full_rank_basis(rho, "lower");
  const ComplexMatrix& u = eig.eigenvectors;
  const RealVector& p = eig.eigenvalues;

  ComplexMatrix x = u.adjoint() * vector.matrix() * u;
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) x(j, k) *= 2.0 / (p(j) + p(k));
  }
  return OneForm{HermitianOperator::hermitian_part(u * x * u.adjoint())};
}

double metric_forms(const DensityOperator& rho, const OneForm& a, const OneForm& b) {
  require_same_dim(a.value.dim(), b.value.dim(), "metric_forms");
  return trace_product(a.value, raise(rho, b));
}

double metric_vectors(const DensityOperator& rho, const HermitianOperator& v, const HermitianOperator& w) {
  require_same_dim(v.dim(), w.dim(), "metric_vectors");
  return trace_product(w, lower(rho, v).value);
}

double line_element(const DensityOperator& rho, const TangentDecomposition& d) {
  const SpectralDecomposition eig = full_rank_basis(rho, "line_element");
  const RealVector& p = eig.eigenvalues;
  const Eigen::Index n = p.size();
  check_decomposition(n, d, "line_element");

  double ds2 = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) ds2 += d.dp(k) * d.dp(k) / p(k);
  double rotation = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (j == k) continue;
      const double gap = p(j) - p(k);
      rotation += gap * gap / (p(j) + p(k)) * std::norm(d.h(j, k));
    }
  }
  return ds2 + 2.0 * d.dtheta * d.dtheta * rotation;
}

HermitianOperator assemble_tangent(const DensityOperator& rho, const TangentDecomposition& d) {
  const SpectralDecomposition eig = eig_hermitian(rho.hermitian());
  const RealVector& p = eig.eigenvalues;
  const Eigen::Index n = p.size();
  check_decomposition(n, d, "assemble_tangent");

  ComplexMatrix local = ComplexMatrix::Zero(n, n);
  const Complex i_dtheta(0.0, d.dtheta);
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index m = 0; m < n; ++m) local(l, m) = i_dtheta * (p(m) - p(l)) * d.h(l, m);
    local(l, l) += d.dp(l);
  }
  return HermitianOperator::hermitian_part(eig.eigenvectors * local * eig.eigenvectors.adjoint());
}

OneForm zero_mean_form(const DensityOperator& rho, const HermitianOperator& a) {
  return OneForm{a - HermitianOperator::identity(a.dim()) * expectation(rho, a)};
}

}  // namespace qmaxent
