#pragma once

#include "qmaxent/operator_core.hpp"

namespace qmaxent {

/// S(rho) = -tr(rho log rho) in nats, with 0 log 0 = 0.
double von_neumann_entropy(const DensityOperator& rho);

/// Relative entropy with the sign convention -tr[rho (log rho - log rho0)].
/// This is the negative of the usual quantum Kullback-Leibler divergence, so
/// it is never positive and is maximized (at zero) by rho == rho0.
///
/// Throws SupportViolation when rho puts weight above 1e-12 on the kernel of
/// rho0, where the value is minus infinity.
double relative_entropy(const DensityOperator& rho, const DensityOperator& rho0);

}  // namespace qmaxent
