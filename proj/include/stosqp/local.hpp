#pragma once

// Non-adaptive local scheme: fixed epsilon, prescribed stepsizes, two
// independent single-sample draws per iteration. nu is still enlarged when
// the iterate leaves the perturbed feasible set.

#include <variant>

#include "stosqp/adaptive.hpp"
#include "stosqp/oracle.hpp"
#include "stosqp/trace.hpp"

namespace stosqp {

struct ConstStep {
  double alpha = 1.0;
};

/// alpha_t = t^{-p}, t = 1, 2, ...
struct DecayStep {
  double exponent = 0.6;
};

using Stepsize = std::variant<ConstStep, DecayStep>;

double stepsize_at(const Stepsize& s, int t);

struct LocalConfig {
  double epsilon = 1e-3;
  Stepsize stepsize = ConstStep{1.0};
  int max_iters = 100000;
  double tol = 1e-5;
  double rho = 2.0;
  std::optional<double> nu0;
  HessianApprox hessian = HessianApprox::Identity;

  void validate() const;
};

RunTrace run_local(const ProblemDef& problem, const NoiseModel& noise, const LocalConfig& cfg);

/// Stochastic SQP direction from two independent single samples (streams
/// `key1` for grad_x L and `key2` for Q1, Q2), as used by the local scheme.
DirectionResult local_direction(const ProblemDef& problem, const ConstraintData& cd, const Iterate& it,
                                const ActiveSet& aset, const Mat& B, const NoiseModel& noise, SampleKey key1,
                                SampleKey key2);

}  // namespace stosqp
