#pragma once

#include <vector>

#include "qmaxent/maxent.hpp"
#include "qmaxent/operator_core.hpp"

namespace qmaxent {

struct FlowSample {
  double lambda = 0.0;
  DensityOperator state;
  double mean = 0.0;  // <A> at state
};

/// Samples of the entropic flow, ordered by increasing lambda. For a negative
/// lambda_end the first sample is the endpoint and the last is the start.
struct FlowTrajectory {
  HermitianOperator observable;
  std::vector<FlowSample> samples;
  double step = 0.0;  // integrator step actually used
  double lambda_end = 0.0;

  const FlowSample& endpoint() const;
};

/// -R_rho(A - <A> 1), the direction in which the flow moves. Traceless.
HermitianOperator flow_field(const DensityOperator& rho, const HermitianOperator& a);

/// Classical fourth-order Runge-Kutta integration of d rho/d lambda = flow_field
/// from rho0 to lambda_end. The step is shrunk to lambda_end / ceil(|lambda_end| / step)
/// so the endpoint is hit exactly. Trace is not renormalized.
///
/// Stores every ceil(N/1000)-th of the N steps plus the endpoint. Throws
/// StepInvalid for a non-positive step and PositivityLoss if a state's
/// smallest eigenvalue drops below -1e-8.
FlowTrajectory integrate_flow(const DensityOperator& rho0, const HermitianOperator& a, double lambda_end,
                              double step = 1e-3);

/// e^{-lambda A/2} rho0 e^{-lambda A/2} / tr(e^{-lambda A} rho0). Returns rho0
/// unchanged at lambda = 0; throws Overflow when |lambda| times the spectral
/// radius of A exceeds 700.
DensityOperator closed_form_flow(const DensityOperator& rho0, const HermitianOperator& a, double lambda);

struct FlowTarget {
  double lambda = 0.0;
  DensityOperator state;
  int iterations = 0;
  double residual = 0.0;  // |<A> - target|
};

/// Follows the closed-form flow until <A> reaches `target`. Newton steps use
/// the rate d<A>/dlambda = tr(A flow_field), i.e. minus the metric norm of the
/// zero-mean form, safeguarded by bisection.
FlowTarget flow_to_constraint(const DensityOperator& rho0, const HermitianOperator& a, double target,
                              const SolverOptions& opts = {});

}  // namespace qmaxent
