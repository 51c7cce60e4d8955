#include "stosqp/kkt_directions.hpp"

#include <algorithm>
#include <stdexcept>

namespace stosqp {

const char* to_string(DirectionKind kind) {
  switch (kind) {
    case DirectionKind::Sqp:
      return "sqp";
    case DirectionKind::RegularizedNewton:
      return "reg_newton";
    case DirectionKind::SteepestDescent:
      return "steepest_descent";
  }
  return "?";
}

std::optional<Vec> solve_dense_checked(const Mat& A, const Vec& rhs, double* cond_estimate,
                                       const SingularityRule& rule) {
  if (A.rows() == 0) {
    if (cond_estimate) *cond_estimate = 1.0;
    return Vec::Zero(0);
  }
  const Eigen::FullPivLU<Mat> lu(A);
  const Vec pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double min_pivot = pivots.minCoeff();
  const double max_pivot = pivots.maxCoeff();
  if (cond_estimate) *cond_estimate = min_pivot > 0.0 ? max_pivot / min_pivot : std::numeric_limits<double>::infinity();

  const double inf_norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  if (min_pivot < rule.pivot_rel_tol * std::max(1.0, inf_norm)) return std::nullopt;

  Vec z = lu.solve(rhs);
  if ((A * z - rhs).norm() > rule.residual_rel_tol * (1.0 + rhs.norm())) return std::nullopt;
  return z;
}

namespace {

Vec projected_g2_lambda(const ConstraintData& cd, const Iterate& it, const ActiveSet& aset) {
  Vec out = cd.g.cwiseAbs2().cwiseProduct(it.lambda);
  for (int i : aset.indices) out(i) = 0.0;
  return out;
}

}  // namespace

DirectionResult solve_sqp_system(const ConstraintData& cd, const Iterate& it, const ActiveSet& aset, const Mat& B,
                                 const Vec& grad_f_lagr, const Vec& grad_f_q, const Mat& hess_f_q) {
  const Eigen::Index d = it.x.size();
  const Eigen::Index m = cd.c.size();
  const Eigen::Index r = cd.g.size();
  const Eigen::Index na = aset.size();

  DirectionResult out;
  out.kind = DirectionKind::Sqp;
  out.dx = Vec::Zero(d);
  out.dmu = Vec::Zero(m);
  out.dlambda = Vec::Zero(r);

  Mat G_a(na, d);
  Vec g_a(na);
  for (Eigen::Index k = 0; k < na; ++k) {
    const int i = aset.indices[static_cast<std::size_t>(k)];
    G_a.row(k) = cd.G.row(i);
    g_a(k) = cd.g(i);
  }
  Vec lambda_c = it.lambda;
  for (int i : aset.indices) lambda_c(i) = 0.0;

  const Vec lagr_grad = lagrangian_gradient(cd, it, grad_f_lagr);

  // K_a (dx; dmu~; dlambda_a~) = -(grad_x L - G_c^T lambda_c; c; g_a)
  const Eigen::Index nk = d + m + na;
  Mat K = Mat::Zero(nk, nk);
  K.topLeftCorner(d, d) = B;
  K.block(0, d, d, m) = cd.J.transpose();
  K.block(0, d + m, d, na) = G_a.transpose();
  K.block(d, 0, m, d) = cd.J;
  K.block(d + m, 0, na, d) = G_a;
  Vec rhs1(nk);
  rhs1 << -(lagr_grad - cd.G.transpose() * lambda_c), -cd.c, -g_a;
  const auto z1 = solve_dense_checked(K, rhs1, &out.diag.cond_estimate_Ka);
  if (!z1) return out;
  out.dx = z1->head(d);

  // M (dmu; dlambda) = -{(J grad_x L; G grad_x L + Pi_c(diag^2(g) lambda)) + (Q1^T; Q2^T) dx}
  const auto [Q1, Q2] = build_q_matrices(cd, it, grad_f_q, hess_f_q);
  Vec u_c(m + r);
  u_c << cd.J * lagr_grad, cd.G * lagr_grad + projected_g2_lambda(cd, it, aset);
  Vec Qt_dx(m + r);
  Qt_dx << Q1.transpose() * out.dx, Q2.transpose() * out.dx;
  const Mat M = build_m_matrix(cd, cd.g);
  const auto z2 = solve_dense_checked(M, -(u_c + Qt_dx), &out.diag.cond_estimate_M);
  if (!z2) {
    out.dx.setZero();
    return out;
  }
  out.dmu = z2->head(m);
  out.dlambda = z2->tail(r);
  out.solvable = true;
  out.diag.descent_rhs = out.dx.squaredNorm() + u_c.squaredNorm();
  return out;
}

DirectionResult solve_sqp_system(const ProblemDef& problem, const Iterate& it, const ActiveSet& aset, const Mat& B,
                                 const Vec& gradbar, const Mat& hessbar) {
  const ConstraintData cd = evaluate_constraints(problem, it.x);
  return solve_sqp_system(cd, it, aset, B, gradbar, gradbar, hessbar);
}

void attach_descent_diag(DirectionResult& dir, const MeritGradient& grad) {
  const Vec delta = dir.stacked();
  dir.diag.descent_lhs1 = grad.part1.dot(delta);
  dir.diag.descent_lhs2 = grad.part2.dot(delta);
}

Mat build_merit_hessian_model(const ConstraintData& cd, const Iterate& it, const ActiveSet& aset,
                              const PenaltyParams& p, const Mat& B) {
  const Eigen::Index d = it.x.size();
  const Eigen::Index m = cd.c.size();
  const Eigen::Index r = cd.g.size();
  const double q = eval_q(eval_a(cd.g), it.lambda, p.nu);
  const double eps = p.epsilon;
  const double eta = p.eta;

  Mat G_a = cd.G;  // Pi_a(G): rows outside the active set zeroed
  Vec g_c = cd.g;  // Pi_c(g)
  Vec ones_c = Vec::Ones(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (aset.contains(static_cast<int>(i))) {
      g_c(i) = 0.0;
      ones_c(i) = 0.0;
    } else {
      G_a.row(i).setZero();
    }
  }
  const Mat M_c = build_m_matrix(cd, g_c);
  Mat JG(m + r, d);
  JG << cd.J, cd.G;

  Mat H(d + m + r, d + m + r);
  H.topLeftCorner(d, d) = B + eta * B * (cd.J.transpose() * cd.J + cd.G.transpose() * cd.G) * B +
                          cd.J.transpose() * cd.J / eps + G_a.transpose() * G_a / (eps * q);
  Mat JGa(m + r, d);
  JGa << cd.J, G_a;
  const Mat H_yx = JGa + eta * M_c * JG * B;
  H.bottomLeftCorner(m + r, d) = H_yx;
  H.topRightCorner(d, m + r) = H_yx.transpose();
  Mat H_yy = eta * M_c * M_c;
  H_yy.bottomRightCorner(r, r).diagonal() -= eps * q * ones_c;
  H.bottomRightCorner(m + r, m + r) = H_yy;
  // symmetrize away rounding from the products above
  return 0.5 * (H + H.transpose());
}

Mat build_reg_newton_matrix(const ConstraintData& cd, const Iterate& it, const ActiveSet& aset,
                            const PenaltyParams& p, const Mat& B, double gamma_B) {
  Mat H = build_merit_hessian_model(cd, it, aset, p, B);
  const Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
  const double op_norm = es.eigenvalues().cwiseAbs().maxCoeff();
  H.diagonal().array() += gamma_B + op_norm;
  return H;
}

DirectionResult solve_fallback(const std::optional<Mat>& Hhat, const Vec& merit_grad, Eigen::Index dim_x,
                               Eigen::Index dim_eq) {
  Vec delta;
  DirectionResult out;
  out.solvable = true;
  if (!Hhat) {
    out.kind = DirectionKind::SteepestDescent;
    delta = -merit_grad;
  } else {
    out.kind = DirectionKind::RegularizedNewton;
    const Eigen::LLT<Mat> llt(*Hhat);
    if (llt.info() != Eigen::Success) throw std::runtime_error("regularized Newton matrix is not positive definite");
    delta = llt.solve(-merit_grad);
    // one refinement step
    delta += llt.solve(-merit_grad - *Hhat * delta);
    if (!delta.allFinite()) throw std::runtime_error("regularized Newton solve produced non-finite values");
  }
  const Eigen::Index r = merit_grad.size() - dim_x - dim_eq;
  out.dx = delta.head(dim_x);
  out.dmu = delta.segment(dim_x, dim_eq);
  out.dlambda = delta.tail(r);
  return out;
}

}  // namespace stosqp
