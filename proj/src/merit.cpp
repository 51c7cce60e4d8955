#include "stosqp/merit.hpp"

#include <cmath>
#include <sstream>

namespace stosqp {

double eval_a(const Vec& g) { return g.cwiseMax(0.0).array().cube().sum(); }

double eval_q(double a_x, const Vec& lambda, double nu) { return (nu - a_x) / (1.0 + lambda.squaredNorm()); }

WB eval_w(const Vec& g, const Vec& lambda, double eps_q) {
  WB out;
  out.w = g.cwiseMax(-eps_q * lambda);
  out.b = g - out.w;
  return out;
}

ActiveSet ActiveSet::from_mask(std::vector<bool> mask) {
  ActiveSet s;
  s.mask = std::move(mask);
  for (std::size_t i = 0; i < s.mask.size(); ++i) {
    if (s.mask[i]) s.indices.push_back(static_cast<int>(i));
  }
  return s;
}

ActiveSet identify_active_set(const Vec& g, const Vec& lambda, double eps_q) {
  std::vector<bool> mask(static_cast<std::size_t>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) mask[static_cast<std::size_t>(i)] = g(i) >= -eps_q * lambda(i);
  return ActiveSet::from_mask(std::move(mask));
}

namespace {

[[noreturn]] void throw_out_of_set(double a_x, double nu) {
  std::ostringstream msg;
  msg << "iterate outside the perturbed feasible set: a(x) = " << a_x << ", nu = " << nu;
  throw OutOfPerturbedSet(msg.str(), a_x);
}

// (J grad_x L; G grad_x L + diag^2(g) lambda)
Vec optimality_block(const ConstraintData& cd, const Iterate& it, const Vec& lagr_grad) {
  Vec v(cd.c.size() + cd.g.size());
  v << cd.J * lagr_grad, cd.G * lagr_grad + cd.g.cwiseProduct(cd.g).cwiseProduct(it.lambda);
  return v;
}

}  // namespace

MeritEval eval_merit(const ConstraintData& cd, const Iterate& it, const PenaltyParams& p, double fbar,
                     const Vec& gradbar) {
  MeritEval out;
  out.a_x = eval_a(cd.g);
  out.in_T_nu = out.a_x <= 0.5 * p.nu;
  if (!out.in_T_nu) throw_out_of_set(out.a_x, p.nu);
  out.q = eval_q(out.a_x, it.lambda, p.nu);
  auto [w, b] = eval_w(cd.g, it.lambda, p.epsilon * out.q);
  out.w = std::move(w);
  out.b = std::move(b);

  const Vec lagr_grad = lagrangian_gradient(cd, it, gradbar);
  const double lagrangian = fbar + it.mu.dot(cd.c) + it.lambda.dot(cd.g);
  out.value = lagrangian + cd.c.squaredNorm() / (2.0 * p.epsilon) +
              (cd.g.squaredNorm() - out.b.squaredNorm()) / (2.0 * p.epsilon * out.q) +
              0.5 * p.eta * optimality_block(cd, it, lagr_grad).squaredNorm();
  return out;
}

MeritEval eval_merit(const ProblemDef& problem, const Iterate& it, const PenaltyParams& p, double fbar,
                     const Vec& gradbar) {
  return eval_merit(evaluate_constraints(problem, it.x, false), it, p, fbar, gradbar);
}

QMatrices build_q_matrices(const ConstraintData& cd, const Iterate& it, const Vec& grad_f, const Mat& hess_f) {
  const Eigen::Index d = grad_f.size();
  const Eigen::Index m = cd.c.size();
  const Eigen::Index r = cd.g.size();
  const Vec lg = lagrangian_gradient(cd, it, grad_f);
  const Mat hess_l = lagrangian_hessian(cd, it, hess_f);

  QMatrices out;
  out.Q1 = Mat::Zero(d, m);
  if (m > 0) out.Q1 = hess_l * cd.J.transpose();
  for (Eigen::Index i = 0; i < m; ++i) out.Q1.col(i) += cd.hess_c[static_cast<std::size_t>(i)] * lg;

  out.Q2 = Mat::Zero(d, r);
  if (r > 0) out.Q2 = hess_l * cd.G.transpose();
  for (Eigen::Index i = 0; i < r; ++i) {
    out.Q2.col(i) += cd.hess_g[static_cast<std::size_t>(i)] * lg;
    out.Q2.col(i) += 2.0 * cd.g(i) * it.lambda(i) * cd.G.row(i).transpose();
  }
  return out;
}

Mat build_m_matrix(const ConstraintData& cd, const Vec& g_diag) {
  const Eigen::Index m = cd.c.size();
  const Eigen::Index r = cd.g.size();
  Mat M(m + r, m + r);
  M.topLeftCorner(m, m) = cd.J * cd.J.transpose();
  M.topRightCorner(m, r) = cd.J * cd.G.transpose();
  M.bottomLeftCorner(r, m) = cd.G * cd.J.transpose();
  M.bottomRightCorner(r, r) = cd.G * cd.G.transpose();
  M.bottomRightCorner(r, r).diagonal() += g_diag.cwiseAbs2();
  return M;
}

MeritGradient eval_merit_gradient(const ConstraintData& cd, const Iterate& it, const PenaltyParams& p,
                                  const Vec& gradbar, const Mat& hessbar, const ActiveSet& aset) {
  const Eigen::Index d = gradbar.size();
  const Eigen::Index m = cd.c.size();
  const Eigen::Index r = cd.g.size();
  const double eps = p.epsilon;
  const double eta = p.eta;

  MeritGradient out;
  out.a_x = eval_a(cd.g);
  out.q = eval_q(out.a_x, it.lambda, p.nu);
  if (out.q <= 0.0) throw_out_of_set(out.a_x, p.nu);
  const double q = out.q;
  const double a_nu = p.nu - out.a_x;
  out.w = eval_w(cd.g, it.lambda, eps * q).w;
  const Vec& w = out.w;
  const double w_sq = w.squaredNorm();

  out.lagr_grad = lagrangian_gradient(cd, it, gradbar);
  const Vec& lg = out.lagr_grad;

  auto [Q1, Q2] = build_q_matrices(cd, it, gradbar, hessbar);
  out.Q1 = std::move(Q1);
  out.Q2 = std::move(Q2);
  out.M = build_m_matrix(cd, cd.g);

  Mat Q(d, m + r);
  Q.leftCols(m) = out.Q1;
  Q.rightCols(r) = out.Q2;

  const Vec g2_lambda = cd.g.cwiseProduct(cd.g).cwiseProduct(it.lambda);
  const Vec v = optimality_block(cd, it, lg);
  // l = diag(max{g, 0}) max{g, 0}
  const Vec l = cd.g.cwiseMax(0.0).cwiseAbs2();

  out.grad_x = lg + eta * (Q * v) + cd.J.transpose() * cd.c / eps + cd.G.transpose() * w / (eps * q) +
               (3.0 * w_sq / (2.0 * eps * q * a_nu)) * (cd.G.transpose() * l);
  const Vec Mv = out.M * v;
  out.grad_mu = cd.c + eta * Mv.head(m);
  out.grad_lambda = w + (w_sq / (eps * a_nu)) * it.lambda + eta * Mv.tail(r);

  // Split against the active set: v = u_c + (0; v_a).
  Vec v_a = Vec::Zero(r);
  for (int i : aset.indices) v_a(i) = g2_lambda(i);
  out.u_c = v;
  out.u_c.tail(r) -= v_a;

  const Eigen::Index n = d + m + r;
  const Vec Mu = out.M * out.u_c;
  out.part1.resize(n);
  out.part1 << lg + cd.J.transpose() * cd.c / eps + cd.G.transpose() * w / (eps * q) + eta * (Q * out.u_c),
      cd.c + eta * Mu.head(m), w + eta * Mu.tail(r);

  Vec stacked_va(m + r);
  stacked_va << Vec::Zero(m), v_a;
  const Vec Mva = out.M * stacked_va;
  out.part2.resize(n);
  out.part2 << (3.0 * w_sq / (2.0 * eps * q * a_nu)) * (cd.G.transpose() * l) + eta * (out.Q2 * v_a),
      eta * Mva.head(m), (w_sq / (eps * a_nu)) * it.lambda + eta * Mva.tail(r);
  return out;
}

MeritGradient eval_merit_gradient(const ProblemDef& problem, const Iterate& it, const PenaltyParams& p,
                                  const Vec& gradbar, const Mat& hessbar) {
  const ConstraintData cd = evaluate_constraints(problem, it.x);
  const double q = eval_q(eval_a(cd.g), it.lambda, p.nu);
  return eval_merit_gradient(cd, it, p, gradbar, hessbar, identify_active_set(cd.g, it.lambda, p.epsilon * q));
}

double kkt_residual(const ConstraintData& cd, const Iterate& it, const Vec& grad_f) {
  const Vec lg = lagrangian_gradient(cd, it, grad_f);
  return std::sqrt(lg.squaredNorm() + cd.c.squaredNorm() + cd.g.cwiseMax(-it.lambda).squaredNorm());
}

double kkt_residual(const ProblemDef& problem, const Iterate& it, const Vec& grad_f) {
  return kkt_residual(evaluate_constraints(problem, it.x, false), it, grad_f);
}

double kkt_residual_exact(const ProblemDef& problem, const Iterate& it) {
  return kkt_residual(problem, it, problem.eval_grad_f(it.x));
}

}  // namespace stosqp
