#pragma once

// Independent oracles and fixtures shared by the unit tests and the
// acceptance binary. Nothing here calls into the code paths being checked
// beyond plain function values.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "stosqp/merit.hpp"
#include "stosqp/problem.hpp"

namespace stosqp::testing {

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

inline double rel_err(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

/// Central differences of a scalar function.
inline Vec fd_gradient(const std::function<double(const Vec&)>& fn, const Vec& z, double h_rel = 1e-6) {
  Vec out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double h = h_rel * std::max(1.0, std::abs(z(i)));
    Vec hi = z;
    Vec lo = z;
    hi(i) += h;
    lo(i) -= h;
    out(i) = (fn(hi) - fn(lo)) / (2.0 * h);
  }
  return out;
}

/// Central differences of a vector function; column i is d fn / d z_i.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& fn, const Vec& z, double h_rel = 1e-6) {
  const Vec f0 = fn(z);
  Mat out(f0.size(), z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double h = h_rel * std::max(1.0, std::abs(z(i)));
    Vec hi = z;
    Vec lo = z;
    hi(i) += h;
    lo(i) -= h;
    out.col(i) = (fn(hi) - fn(lo)) / (2.0 * h);
  }
  return out;
}

inline Iterate unstack(const ProblemDef& p, const Vec& z) {
  return {z.head(p.dim_x), z.segment(p.dim_x, p.dim_eq), z.tail(p.dim_ineq)};
}

/// Merit value with exact oracles as a function of the stacked iterate.
inline std::function<double(const Vec&)> merit_of(const ProblemDef& p, const PenaltyParams& pp) {
  return [&p, pp](const Vec& z) {
    const Iterate it = unstack(p, z);
    return eval_merit(p, it, pp, p.eval_f(it.x), p.eval_grad_f(it.x)).value;
  };
}

/// Random primal-dual point near the known KKT point with a(x) <= 0.4 nu and
/// every inequality at least `kink_gap` away from the kink g_i = -eps q lambda_i.
inline Iterate random_merit_point(const ProblemDef& p, const PenaltyParams& pp, std::mt19937_64& gen,
                                  double kink_gap = 1e-6) {
  std::normal_distribution<double> n01;
  const Iterate& ref = *p.known_kkt;
  for (;;) {
    Iterate it{ref.x, ref.mu, ref.lambda};
    for (Eigen::Index i = 0; i < it.x.size(); ++i) it.x(i) += 0.5 * n01(gen);
    for (Eigen::Index i = 0; i < it.mu.size(); ++i) it.mu(i) = n01(gen);
    for (Eigen::Index i = 0; i < it.lambda.size(); ++i) it.lambda(i) = n01(gen);
    const Vec g = p.eval_g(it.x);
    const double a = g.cwiseMax(0.0).array().cube().sum();
    if (a > 0.4 * pp.nu) continue;
    const double eq = pp.epsilon * (pp.nu - a) / (1.0 + it.lambda.squaredNorm());
    if (((g + eq * it.lambda).array().abs() < kink_gap).any()) continue;
    return it;
  }
}

inline double dist_to_kkt(const ProblemDef& p, const Iterate& it) {
  return (it.stacked() - p.known_kkt->stacked()).norm();
}

}  // namespace stosqp::testing

namespace stosqp::testing {

/// min 0.5 ||x - t||^2 + 0.25 x1^4 without constraints (d = 3).
inline ProblemDef make_unconstrained() {
  ProblemDef p;
  p.name = "unconstrained";
  p.dim_x = 3;
  const Vec t = (Vec(3) << 1.0, -2.0, 0.5).finished();
  p.eval_f = [t](const Vec& x) { return 0.5 * (x - t).squaredNorm() + 0.25 * std::pow(x(0), 4); };
  p.eval_grad_f = [t](const Vec& x) {
    Vec g = x - t;
    g(0) += std::pow(x(0), 3);
    return g;
  };
  p.eval_hess_f = [](const Vec& x) {
    Mat h = Mat::Identity(3, 3);
    h(0, 0) += 3.0 * x(0) * x(0);
    return h;
  };
  p.eval_c = [](const Vec&) { return Vec(0); };
  p.eval_jac_c = [](const Vec&) { return Mat(0, 3); };
  p.eval_g = [](const Vec&) { return Vec(0); };
  p.eval_jac_g = [](const Vec&) { return Mat(0, 3); };
  p.eval_hess_c_i = [](const Vec&, int) { return Mat::Zero(3, 3).eval(); };
  p.eval_hess_g_i = [](const Vec&, int) { return Mat::Zero(3, 3).eval(); };
  p.x0 = Vec::Zero(3);
  p.mu0 = Vec(0);
  p.lambda0 = Vec(0);
  return p;
}

/// min x^2 s.t. 1 - x <= 0 and 2 - 2x <= 0: both active at x = 1 with
/// parallel gradients, so any active-set system containing both is singular.
inline ProblemDef make_degenerate() {
  ProblemDef p;
  p.name = "degenerate";
  p.dim_x = 1;
  p.dim_ineq = 2;
  p.eval_f = [](const Vec& x) { return x(0) * x(0); };
  p.eval_grad_f = [](const Vec& x) { return Vec::Constant(1, 2.0 * x(0)); };
  p.eval_hess_f = [](const Vec&) { return Mat::Constant(1, 1, 2.0); };
  p.eval_c = [](const Vec&) { return Vec(0); };
  p.eval_jac_c = [](const Vec&) { return Mat(0, 1); };
  p.eval_g = [](const Vec& x) { return (Vec(2) << 1.0 - x(0), 2.0 - 2.0 * x(0)).finished(); };
  p.eval_jac_g = [](const Vec&) { return (Mat(2, 1) << -1.0, -2.0).finished(); };
  p.eval_hess_c_i = [](const Vec&, int) { return Mat::Zero(1, 1).eval(); };
  p.eval_hess_g_i = [](const Vec&, int) { return Mat::Zero(1, 1).eval(); };
  p.x0 = Vec::Constant(1, 1.0);
  p.mu0 = Vec(0);
  p.lambda0 = Vec::Constant(2, 1.0);
  return p;
}

}  // namespace stosqp::testing
