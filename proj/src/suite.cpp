#include "stosqp/suite.hpp"

#include <stdexcept>
#include <string>

namespace stosqp {
namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Problems with no equality constraints still need callable (empty) hooks.
void no_equalities(ProblemDef& p) {
  const int d = p.dim_x;
  p.dim_eq = 0;
  p.eval_c = [](const Vec&) { return Vec(Vec::Zero(0)); };
  p.eval_jac_c = [d](const Vec&) { return Mat(Mat::Zero(0, d)); };
  p.eval_hess_c_i = [d](const Vec&, int) { return Mat(Mat::Zero(d, d)); };
  p.mu0 = Vec::Zero(0);
}

ProblemDef p1_bound() {
  ProblemDef p;
  p.name = "p1_bound";
  p.dim_x = 1;
  p.dim_ineq = 1;
  no_equalities(p);
  p.eval_f = [](const Vec& x) { return x(0) * x(0); };
  p.eval_grad_f = [](const Vec& x) { return Vec(2.0 * x); };
  p.eval_hess_f = [](const Vec&) { return Mat(Mat::Constant(1, 1, 2.0)); };
  p.eval_g = [](const Vec& x) { return vec({1.0 - x(0)}); };
  p.eval_jac_g = [](const Vec&) { return Mat(Mat::Constant(1, 1, -1.0)); };
  p.eval_hess_g_i = [](const Vec&, int) { return Mat(Mat::Zero(1, 1)); };
  p.x0 = vec({-1.0});
  p.lambda0 = vec({0.0});
  // 2x - lambda = 0, 1 - x = 0
  p.known_kkt = Iterate{vec({1.0}), Vec::Zero(0), vec({2.0})};
  return p;
}

ProblemDef p2_simplex() {
  ProblemDef p;
  p.name = "p2_simplex";
  p.dim_x = 2;
  p.dim_eq = 1;
  p.dim_ineq = 2;
  p.eval_f = [](const Vec& x) { return (x(0) - 1.0) * (x(0) - 1.0) + (x(1) - 2.0) * (x(1) - 2.0); };
  p.eval_grad_f = [](const Vec& x) { return vec({2.0 * (x(0) - 1.0), 2.0 * (x(1) - 2.0)}); };
  p.eval_hess_f = [](const Vec&) { return Mat(2.0 * Mat::Identity(2, 2)); };
  p.eval_c = [](const Vec& x) { return vec({x(0) + x(1) - 2.0}); };
  p.eval_jac_c = [](const Vec&) { return Mat(Mat::Ones(1, 2)); };
  p.eval_hess_c_i = [](const Vec&, int) { return Mat(Mat::Zero(2, 2)); };
  p.eval_g = [](const Vec& x) { return Vec(-x); };
  p.eval_jac_g = [](const Vec&) { return Mat(-Mat::Identity(2, 2)); };
  p.eval_hess_g_i = [](const Vec&, int) { return Mat(Mat::Zero(2, 2)); };
  p.x0 = vec({2.0, 2.0});
  p.mu0 = vec({0.0});
  p.lambda0 = vec({0.0, 0.0});
  // projection of (1, 2) onto x1 + x2 = 2; grad f = (-1, -1) = -mu (1, 1)
  p.known_kkt = Iterate{vec({0.5, 1.5}), vec({1.0}), vec({0.0, 0.0})};
  return p;
}

ProblemDef p3_circle() {
  ProblemDef p;
  p.name = "p3_circle";
  p.dim_x = 2;
  p.dim_ineq = 1;
  no_equalities(p);
  p.eval_f = [](const Vec& x) { return 0.5 * (x - vec({2.0, 2.0})).squaredNorm(); };
  p.eval_grad_f = [](const Vec& x) { return Vec(x - vec({2.0, 2.0})); };
  p.eval_hess_f = [](const Vec&) { return Mat(Mat::Identity(2, 2)); };
  p.eval_g = [](const Vec& x) { return vec({x.squaredNorm() - 2.0}); };
  p.eval_jac_g = [](const Vec& x) { return Mat(2.0 * x.transpose()); };
  p.eval_hess_g_i = [](const Vec&, int) { return Mat(2.0 * Mat::Identity(2, 2)); };
  p.x0 = vec({2.0, 0.5});
  p.lambda0 = vec({0.0});
  // (-1, -1) + lambda (2, 2) = 0
  p.known_kkt = Iterate{vec({1.0, 1.0}), Vec::Zero(0), vec({0.5})};
  return p;
}

ProblemDef p4_inactive() {
  ProblemDef p;
  p.name = "p4_inactive";
  p.dim_x = 2;
  p.dim_ineq = 1;
  no_equalities(p);
  p.eval_f = [](const Vec& x) {
    const double s = x(0) - 1.0;
    return 0.5 * (s * s + (x(1) - 0.5) * (x(1) - 0.5)) + 0.05 * s * s * s * s;
  };
  p.eval_grad_f = [](const Vec& x) {
    const double s = x(0) - 1.0;
    return vec({s + 0.2 * s * s * s, x(1) - 0.5});
  };
  p.eval_hess_f = [](const Vec& x) {
    const double s = x(0) - 1.0;
    Mat H = Mat::Zero(2, 2);
    H(0, 0) = 1.0 + 0.6 * s * s;
    H(1, 1) = 1.0;
    return H;
  };
  p.eval_g = [](const Vec& x) { return vec({x.squaredNorm() - 4.0}); };
  p.eval_jac_g = [](const Vec& x) { return Mat(2.0 * x.transpose()); };
  p.eval_hess_g_i = [](const Vec&, int) { return Mat(2.0 * Mat::Identity(2, 2)); };
  p.x0 = vec({-1.0, 2.0});
  p.lambda0 = vec({0.0});
  // unconstrained minimizer (1, 0.5) has g = -2.75 < 0
  p.known_kkt = Iterate{vec({1.0, 0.5}), Vec::Zero(0), vec({0.0})};
  return p;
}

ProblemDef p5_mixed() {
  ProblemDef p;
  p.name = "p5_mixed";
  p.dim_x = 3;
  p.dim_eq = 1;
  p.dim_ineq = 2;
  const Vec target = vec({2.0, 2.0, 1.0});
  p.eval_f = [target](const Vec& x) { return 0.5 * (x - target).squaredNorm(); };
  p.eval_grad_f = [target](const Vec& x) { return Vec(x - target); };
  p.eval_hess_f = [](const Vec&) { return Mat(Mat::Identity(3, 3)); };
  p.eval_c = [](const Vec& x) { return vec({x(0) + x(1) + x(2) * x(2) - 2.75}); };
  p.eval_jac_c = [](const Vec& x) {
    Mat J(1, 3);
    J << 1.0, 1.0, 2.0 * x(2);
    return J;
  };
  p.eval_hess_c_i = [](const Vec&, int) {
    Mat H = Mat::Zero(3, 3);
    H(2, 2) = 2.0;
    return H;
  };
  p.eval_g = [](const Vec& x) { return vec({x(0) - 1.0, x(2) * x(2) - 4.0}); };
  p.eval_jac_g = [](const Vec& x) {
    Mat G = Mat::Zero(2, 3);
    G(0, 0) = 1.0;
    G(1, 2) = 2.0 * x(2);
    return G;
  };
  p.eval_hess_g_i = [](const Vec&, int i) {
    Mat H = Mat::Zero(3, 3);
    if (i == 1) H(2, 2) = 2.0;
    return H;
  };
  // infeasible start: c = 0.5, g1 = 0.5
  p.x0 = vec({1.5, 1.5, 0.5});
  p.mu0 = vec({0.0});
  p.lambda0 = vec({0.0, 0.0});
  // x* = (1, 1.5, 0.5): grad f = (-1, -0.5, -0.5), grad c = (1, 1, 1), grad g1 = e1
  //   => mu = 0.5, lambda1 = 0.5; g2 = -3.75 inactive
  p.known_kkt = Iterate{vec({1.0, 1.5, 0.5}), vec({0.5}), vec({0.5, 0.0})};
  return p;
}

ProblemDef p6_box5() {
  constexpr int d = 5;
  ProblemDef p;
  p.name = "p6_box5";
  p.dim_x = d;
  p.dim_ineq = 2 * d;
  no_equalities(p);

  // f = 0.5 x^T W x + h^T x with W tridiagonal SPD. The KKT point is fixed
  // first and h solves W x* + h + G^T lambda* = 0.
  Mat W = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    W(i, i) = 1.0 + 0.25 * i;
    if (i + 1 < d) W(i, i + 1) = W(i + 1, i) = -0.25;
  }
  const Vec x_star = vec({0.5, 1.0, 0.0, 0.2, 1.0});
  // upper bounds x_i - 1 <= 0 on indices 1 and 4, lower bound -x_2 <= 0 on index 2
  const Vec lam_up = vec({0.0, 1.0, 0.0, 0.0, 1.0});
  const Vec lam_low = vec({0.0, 0.0, 0.5, 0.0, 0.0});
  Mat G(2 * d, d);
  G << Mat::Identity(d, d), -Mat::Identity(d, d);
  Vec lambda_star(2 * d);
  lambda_star << lam_up, lam_low;
  const Vec h = -(W * x_star) - G.transpose() * lambda_star;

  p.eval_f = [W, h](const Vec& x) { return 0.5 * x.dot(W * x) + h.dot(x); };
  p.eval_grad_f = [W, h](const Vec& x) { return Vec(W * x + h); };
  p.eval_hess_f = [W](const Vec&) { return W; };
  p.eval_g = [](const Vec& x) {
    Vec g(2 * d);
    g << x.array() - 1.0, -x;
    return g;
  };
  p.eval_jac_g = [G](const Vec&) { return G; };
  p.eval_hess_g_i = [](const Vec&, int) { return Mat(Mat::Zero(d, d)); };
  p.x0 = vec({0.2, 0.4, 0.6, 0.8, 0.5});
  p.lambda0 = Vec::Zero(2 * d);
  p.known_kkt = Iterate{x_star, Vec::Zero(0), lambda_star};
  return p;
}

}  // namespace

std::vector<ProblemDef> builtin_suite() {
  return {p1_bound(), p2_simplex(), p3_circle(), p4_inactive(), p5_mixed(), p6_box5()};
}

std::vector<std::string> builtin_problem_names() {
  std::vector<std::string> names;
  for (const auto& p : builtin_suite()) names.push_back(p.name);
  return names;
}

ProblemDef find_problem(std::string_view name) {
  for (auto& p : builtin_suite()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

}  // namespace stosqp
