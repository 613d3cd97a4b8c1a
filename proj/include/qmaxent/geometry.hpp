#pragma once

#include "qmaxent/operator_core.hpp"

namespace qmaxent {

/// Smallest eigenvalue a base point may have before the metric on vectors is
/// refused as singular.
inline constexpr double kFullRankFloor = 1e-10;

/// A covector on the space of density operators. Hermitian 1-forms are
/// ordinary observables; pairing with a state gives the expectation value.
struct OneForm {
  HermitianOperator value;
};

/// Traceless Hermitian direction attached to a base point.
struct TangentVector {
  DensityOperator at;
  HermitianOperator value;
};

/// Validates tracelessness (1e-12) and dimensions.
TangentVector make_tangent(const DensityOperator& at, const HermitianOperator& value);

/// An infinitesimal displacement written in the eigenbasis of the base state:
/// eigenvalue changes `dp` plus a rotation `dtheta * h`. Entries of `h` are
/// indexed by the eigenvalue order of eig_hermitian (descending).
struct TangentDecomposition {
  RealVector dp;
  double dtheta = 0.0;
  HermitianOperator h;
};

double pair(const OneForm& form, const DensityOperator& rho);

/// R_rho(B) = (rho B + B rho)/2. Only zero-mean forms raise to traceless vectors.
HermitianOperator raise(const DensityOperator& rho, const OneForm& form);

/// Inverse of raise(): solves rho X + X rho = 2V through X_jk = 2 V_jk / (p_j + p_k)
/// in rho's eigenbasis. Throws SingularBase unless rho is full rank.
OneForm lower(const DensityOperator& rho, const HermitianOperator& vector);

/// g(A, B) = <(AB + BA)/2>.
double metric_forms(const DensityOperator& rho, const OneForm& a, const OneForm& b);

/// g(V, W) = tr[W L_rho(V)].
double metric_vectors(const DensityOperator& rho, const HermitianOperator& v, const HermitianOperator& w);

/// ds^2 = sum_k dp_k^2/p_k + 2 dtheta^2 sum_{j!=k} (p_j - p_k)^2/(p_j + p_k) |h_jk|^2.
double line_element(const DensityOperator& rho, const TangentDecomposition& d);

/// d rho = sum_j dp_j |j><j| + i dtheta sum_{l,m} (p_m - p_l) h_lm |l><m|, rotated
/// back to the computational basis.
HermitianOperator assemble_tangent(const DensityOperator& rho, const TangentDecomposition& d);

/// A - <A> 1.
OneForm zero_mean_form(const DensityOperator& rho, const HermitianOperator& a);

}  // namespace qmaxent
