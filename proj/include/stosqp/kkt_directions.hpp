#pragma once

// Search directions: the coupled active-set SQP system and the
// regularized-Newton / steepest-descent fallbacks on the merit function.

#include <optional>

#include "stosqp/active_set.hpp"
#include "stosqp/merit.hpp"
#include "stosqp/problem.hpp"

namespace stosqp {

enum class DirectionKind { Sqp, RegularizedNewton, SteepestDescent };

const char* to_string(DirectionKind kind);

struct DirectionDiag {
  double cond_estimate_Ka = 0.0;
  double cond_estimate_M = 0.0;
  double descent_lhs1 = 0.0;  // (grad L^(1))^T Delta
  double descent_lhs2 = 0.0;  // (grad L^(2))^T Delta
  double descent_rhs = 0.0;   // ||(dx; J grad_x L; G grad_x L + Pi_c(diag^2(g) lambda))||^2
};

struct DirectionResult {
  DirectionKind kind = DirectionKind::Sqp;
  Vec dx;
  Vec dmu;
  Vec dlambda;
  bool solvable = false;
  DirectionDiag diag;

  [[nodiscard]] Vec stacked() const {
    Vec out(dx.size() + dmu.size() + dlambda.size());
    out << dx, dmu, dlambda;
    return out;
  }
};

/// Pivot and residual thresholds for declaring a dense solve singular.
struct SingularityRule {
  double pivot_rel_tol = 1e-12;
  double residual_rel_tol = 1e-6;
};

/// Pivoted dense solve A z = rhs. Returns nullopt when A is declared singular:
/// a pivot below pivot_rel_tol * max(1, ||A||_inf) or a residual above
/// residual_rel_tol * (1 + ||rhs||). `cond_estimate` receives max|pivot| / min|pivot|.
std::optional<Vec> solve_dense_checked(const Mat& A, const Vec& rhs, double* cond_estimate = nullptr,
                                       const SingularityRule& rule = {});

/// Solves the two-stage system
///   K_a (dx; dmu~; dlambda_a~) = -(grad_x L - G_c^T lambda_c; c; g_a)
///   M (dmu; dlambda) = -{(J grad_x L; G grad_x L + Pi_c(diag^2(g) lambda)) + (Q1^T; Q2^T) dx}
/// `grad_f_lagr` feeds grad_x L; `grad_f_q`/`hess_f_q` feed Q1, Q2 (they may come
/// from an independent sample). An unsolvable system yields solvable == false.
DirectionResult solve_sqp_system(const ConstraintData& cd, const Iterate& it, const ActiveSet& aset, const Mat& B,
                                 const Vec& grad_f_lagr, const Vec& grad_f_q, const Mat& hess_f_q);

/// Single-sample convenience overload.
DirectionResult solve_sqp_system(const ProblemDef& problem, const Iterate& it, const ActiveSet& aset, const Mat& B,
                                 const Vec& gradbar, const Mat& hessbar);

/// Fills descent_lhs1 / descent_lhs2 from a merit gradient split.
void attach_descent_diag(DirectionResult& dir, const MeritGradient& grad);

/// H_hat = H + (gamma_B + ||H||_2) I with H the structured generalized-Hessian
/// approximation of the merit function (blocks in x and (mu, lambda)).
Mat build_reg_newton_matrix(const ConstraintData& cd, const Iterate& it, const ActiveSet& aset,
                            const PenaltyParams& p, const Mat& B, double gamma_B);

/// The unregularized H (exposed for testing).
Mat build_merit_hessian_model(const ConstraintData& cd, const Iterate& it, const ActiveSet& aset,
                              const PenaltyParams& p, const Mat& B);

/// Delta = -H_hat^{-1} grad, or -grad when `Hhat` is empty (steepest descent).
/// Throws std::runtime_error if H_hat fails to factor, which cannot happen for
/// a correctly regularized matrix.
DirectionResult solve_fallback(const std::optional<Mat>& Hhat, const Vec& merit_grad, Eigen::Index dim_x,
                               Eigen::Index dim_eq);

}  // namespace stosqp
