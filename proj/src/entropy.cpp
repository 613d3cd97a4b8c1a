#include "qmaxent/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qmaxent {

namespace {

double entropy_of_spectrum(const RealVector& p) {
  double s = 0.0;
  for (double pk : p) {
    if (pk > kLogFloor) s -= pk * std::log(pk);
  }
  // A single eigenvalue of 1 - eps would otherwise give -eps log(1 - eps) < 0.
  return std::max(s, 0.0);
}

}  // namespace

double von_neumann_entropy(const DensityOperator& rho) {
  return entropy_of_spectrum(eigenvalues(rho.hermitian()));
}

double relative_entropy(const DensityOperator& rho, const DensityOperator& rho0) {
  require_same_dim(rho.dim(), rho0.dim(), "relative_entropy");

  // tr(rho log rho0) evaluated in rho0's eigenbasis.
  const SpectralDecomposition prior = eig_hermitian(rho0.hermitian());
  const ComplexMatrix rotated = prior.eigenvectors.adjoint() * rho.matrix() * prior.eigenvectors;

  double cross = 0.0;
  double kernel_weight = 0.0;
  for (Eigen::Index k = 0; k < rotated.rows(); ++k) {
    const double weight = rotated(k, k).real();
    const double q = prior.eigenvalues(k);
    if (q > kLogFloor) {
      cross += weight * std::log(q);
    } else {
      kernel_weight += weight;
    }
  }
  if (kernel_weight > kLogFloor) {
    fail(ErrorKind::SupportViolation,
         "state has weight " + std::to_string(kernel_weight) + " on the kernel of the prior");
  }
  return von_neumann_entropy(rho) + cross;
}

}  // namespace qmaxent
