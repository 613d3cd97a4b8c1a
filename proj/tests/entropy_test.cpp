#include "qmaxent/entropy.hpp"

#include <cmath>

#include "gtest/gtest.h"
#include "support/random_operators.hpp"

using namespace qmaxent;
using namespace qmaxent::testing;

namespace {

DensityOperator conjugate(const DensityOperator& rho, const ComplexMatrix& u) {
  return make_density(HermitianOperator::hermitian_part(u * rho.matrix() * u.adjoint()).matrix());
}

}  // namespace

TEST(von_neumann_entropy, examples) {
  EXPECT_EQ(von_neumann_entropy(make_density(diag({1, 0}))), 0.0);
  EXPECT_NEAR(von_neumann_entropy(DensityOperator::maximally_mixed(2)), std::log(2.0), 1e-15);
  EXPECT_NEAR(von_neumann_entropy(make_density(diag({0.8, 0.2}))), -0.8 * std::log(0.8) - 0.2 * std::log(0.2),
              1e-15);
  EXPECT_NEAR(von_neumann_entropy(make_density(diag({0.8, 0.2}))), 0.5004, 1e-4);
}

TEST(von_neumann_entropy, bounded_by_log_dim) {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = random_dim(rng, 1, 8);
    const double s = von_neumann_entropy(random_density(n, rng));
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, std::log(static_cast<double>(n)) + 1e-10);
  }
}

TEST(von_neumann_entropy, unitary_invariance) {
  Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = random_dim(rng, 1, 8);
    const DensityOperator rho = random_density(n, rng);
    const ComplexMatrix u = random_unitary(n, rng);
    ASSERT_NEAR(von_neumann_entropy(conjugate(rho, u)), von_neumann_entropy(rho), 1e-10);
  }
}

TEST(relative_entropy, identical_arguments_give_zero) {
  const DensityOperator rho = make_density(diag({0.8, 0.2}));
  EXPECT_NEAR(relative_entropy(rho, rho), 0.0, 1e-15);
}

TEST(relative_entropy, uniform_prior_example) {
  const double value = relative_entropy(make_density(diag({0.8, 0.2})), DensityOperator::maximally_mixed(2));
  const double s = -0.8 * std::log(0.8) - 0.2 * std::log(0.2);
  EXPECT_NEAR(value, s - std::log(2.0), 1e-15);
  EXPECT_NEAR(value, -0.1927, 1e-4);
}

TEST(relative_entropy, disjoint_support_is_rejected) {
  try {
    relative_entropy(make_density(diag({1, 0})), make_density(diag({0, 1})));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SupportViolation);
  }
}

TEST(relative_entropy, contained_support_is_finite) {
  const double value = relative_entropy(make_density(diag({1, 0, 0})), make_density(diag({0.5, 0.5, 0})));
  EXPECT_NEAR(value, std::log(0.5), 1e-15);
}

TEST(relative_entropy, uniform_prior_identity) {
  Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index n = random_dim(rng, 2, 8);
    const DensityOperator rho = random_density(n, rng);
    ASSERT_NEAR(relative_entropy(rho, DensityOperator::maximally_mixed(n)),
                von_neumann_entropy(rho) - std::log(static_cast<double>(n)), 1e-12);
  }
}

TEST(relative_entropy, nonpositive_and_jointly_unitary_invariant) {
  Rng rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = random_dim(rng, 1, 8);
    const DensityOperator rho = random_density(n, rng, 1e-3);
    const DensityOperator rho0 = random_density(n, rng, 1e-3);
    const double value = relative_entropy(rho, rho0);
    ASSERT_LE(value, 1e-10);
    const ComplexMatrix u = random_unitary(n, rng);
    ASSERT_NEAR(relative_entropy(conjugate(rho, u), conjugate(rho0, u)), value, 1e-10);
  }
}
