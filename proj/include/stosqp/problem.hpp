#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stosqp/types.hpp"

namespace stosqp {

/// Smooth NLP  min f(x)  s.t.  c(x) = 0, g(x) <= 0  with exact derivative oracles.
///
/// Problem definitions are immutable after construction and may be shared
/// across threads; every callback must be a pure function of its arguments.
struct ProblemDef {
  std::string name;
  int dim_x = 0;
  int dim_eq = 0;
  int dim_ineq = 0;

  std::function<double(const Vec&)> eval_f;
  std::function<Vec(const Vec&)> eval_grad_f;
  std::function<Mat(const Vec&)> eval_hess_f;
  std::function<Vec(const Vec&)> eval_c;      // m
  std::function<Mat(const Vec&)> eval_jac_c;  // m x d
  std::function<Vec(const Vec&)> eval_g;      // r
  std::function<Mat(const Vec&)> eval_jac_g;  // r x d
  std::function<Mat(const Vec&, int)> eval_hess_c_i;
  std::function<Mat(const Vec&, int)> eval_hess_g_i;

  Vec x0;
  Vec mu0;
  Vec lambda0;
  std::optional<Iterate> known_kkt;

  [[nodiscard]] Iterate initial_iterate() const { return {x0, mu0, lambda0}; }
};

/// Constraint values, Jacobians and (optionally) constraint Hessians at one x.
struct ConstraintData {
  Vec c;
  Mat J;
  Vec g;
  Mat G;
  std::vector<Mat> hess_c;
  std::vector<Mat> hess_g;
};

ConstraintData evaluate_constraints(const ProblemDef& problem, const Vec& x, bool with_hessians = true);

/// Hessian of the Lagrangian given an objective Hessian (exact or estimated).
Mat lagrangian_hessian(const ConstraintData& cd, const Iterate& it, const Mat& hess_f);

/// grad f + J^T mu + G^T lambda.
Vec lagrangian_gradient(const ConstraintData& cd, const Iterate& it, const Vec& grad_f);

}  // namespace stosqp
