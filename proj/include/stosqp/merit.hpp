#pragma once

// Exact augmented Lagrangian merit function for
//   min f(x)  s.t.  c(x) = 0,  g(x) <= 0
// together with its gradient, the dominant/higher-order gradient split and
// the KKT residual.

#include <vector>

#include "stosqp/active_set.hpp"
#include "stosqp/problem.hpp"

namespace stosqp {

struct PenaltyParams {
  double epsilon = 1.0;
  double nu = 1.0;
  double eta = 1.0;
};

/// sum_i max{g_i, 0}^3
double eval_a(const Vec& g);

/// (nu - a) / (1 + ||lambda||^2); may be <= 0 outside the perturbed set.
double eval_q(double a_x, const Vec& lambda, double nu);

struct WB {
  Vec w;
  Vec b;
};

/// w = max{g, -eps_q lambda},  b = g - w = min{0, g + eps_q lambda}.
WB eval_w(const Vec& g, const Vec& lambda, double eps_q);

struct MeritEval {
  double value = 0.0;
  double a_x = 0.0;
  double q = 0.0;
  Vec w;
  Vec b;
  bool in_T_nu = false;
};

/// Merit value with `fbar`/`gradbar` standing in for f and grad f.
/// Throws OutOfPerturbedSet when a(x) > nu / 2.
MeritEval eval_merit(const ConstraintData& cd, const Iterate& it, const PenaltyParams& p, double fbar,
                     const Vec& gradbar);
MeritEval eval_merit(const ProblemDef& problem, const Iterate& it, const PenaltyParams& p, double fbar,
                     const Vec& gradbar);

struct MeritGradient {
  Vec grad_x;
  Vec grad_mu;
  Vec grad_lambda;
  Vec part1;  // dominant terms, stacked (x; mu; lambda)
  Vec part2;  // higher-order terms, stacked
  Mat Q1;     // d x m
  Mat Q2;     // d x r
  Mat M;      // (m + r) x (m + r)
  Vec lagr_grad;  // grad_x L built from gradbar
  Vec u_c;        // (J grad_x L; G grad_x L + Pi_c(diag^2(g) lambda))
  Vec w;
  double q = 0.0;
  double a_x = 0.0;

  [[nodiscard]] Vec full() const {
    Vec out(grad_x.size() + grad_mu.size() + grad_lambda.size());
    out << grad_x, grad_mu, grad_lambda;
    return out;
  }
};

/// Gradient of the merit function with the split taken against `aset`.
/// `gradbar`/`hessbar` replace grad f and hess f everywhere, including the Q matrices.
/// Throws OutOfPerturbedSet when q <= 0 (a(x) >= nu).
MeritGradient eval_merit_gradient(const ConstraintData& cd, const Iterate& it, const PenaltyParams& p,
                                  const Vec& gradbar, const Mat& hessbar, const ActiveSet& aset);

/// Same, with the active set identified from the current (epsilon, nu).
MeritGradient eval_merit_gradient(const ProblemDef& problem, const Iterate& it, const PenaltyParams& p,
                                  const Vec& gradbar, const Mat& hessbar);

struct QMatrices {
  Mat Q1;  // d x m
  Mat Q2;  // d x r
};

/// Q1 = hess_x L J^T + sum_i hess c_i grad_x L e_i^T,
/// Q2 = hess_x L G^T + sum_i hess g_i grad_x L e_i^T + 2 G^T diag(g) diag(lambda),
/// with grad_x L and hess_x L built from `grad_f` and `hess_f`.
QMatrices build_q_matrices(const ConstraintData& cd, const Iterate& it, const Vec& grad_f, const Mat& hess_f);

/// [[J J^T, J G^T], [G J^T, G G^T + diag^2(g_diag)]]; pass cd.g for M itself.
Mat build_m_matrix(const ConstraintData& cd, const Vec& g_diag);

/// || (grad_x L; c; max{g, -lambda}) ||_2
double kkt_residual(const ConstraintData& cd, const Iterate& it, const Vec& grad_f);
double kkt_residual(const ProblemDef& problem, const Iterate& it, const Vec& grad_f);

/// KKT residual with exact oracles.
double kkt_residual_exact(const ProblemDef& problem, const Iterate& it);

}  // namespace stosqp
