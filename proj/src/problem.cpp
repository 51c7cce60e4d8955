#include "stosqp/problem.hpp"

namespace stosqp {

ConstraintData evaluate_constraints(const ProblemDef& problem, const Vec& x, bool with_hessians) {
  ConstraintData cd;
  const int d = problem.dim_x;
  if (problem.dim_eq > 0) {
    cd.c = problem.eval_c(x);
    cd.J = problem.eval_jac_c(x);
  } else {
    cd.c = Vec::Zero(0);
    cd.J = Mat::Zero(0, d);
  }
  if (problem.dim_ineq > 0) {
    cd.g = problem.eval_g(x);
    cd.G = problem.eval_jac_g(x);
  } else {
    cd.g = Vec::Zero(0);
    cd.G = Mat::Zero(0, d);
  }
  if (with_hessians) {
    cd.hess_c.reserve(static_cast<std::size_t>(problem.dim_eq));
    for (int i = 0; i < problem.dim_eq; ++i) cd.hess_c.push_back(problem.eval_hess_c_i(x, i));
    cd.hess_g.reserve(static_cast<std::size_t>(problem.dim_ineq));
    for (int i = 0; i < problem.dim_ineq; ++i) cd.hess_g.push_back(problem.eval_hess_g_i(x, i));
  }
  return cd;
}

Mat lagrangian_hessian(const ConstraintData& cd, const Iterate& it, const Mat& hess_f) {
  Mat H = hess_f;
  for (std::size_t i = 0; i < cd.hess_c.size(); ++i) H += it.mu(static_cast<Eigen::Index>(i)) * cd.hess_c[i];
  for (std::size_t i = 0; i < cd.hess_g.size(); ++i) H += it.lambda(static_cast<Eigen::Index>(i)) * cd.hess_g[i];
  return H;
}

Vec lagrangian_gradient(const ConstraintData& cd, const Iterate& it, const Vec& grad_f) {
  return grad_f + cd.J.transpose() * it.mu + cd.G.transpose() * it.lambda;
}

}  // namespace stosqp
