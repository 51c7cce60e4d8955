#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "stosqp/adaptive.hpp"
#include "stosqp/suite.hpp"
#include "test_util.hpp"

using namespace stosqp;
using stosqp::testing::fd_gradient;
using stosqp::testing::merit_of;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

SolverState make_state(const Iterate& it, double alpha, double eps, double nu, double delta) {
  SolverState s;
  s.it = it;
  s.alpha_bar = alpha;
  s.eps_bar = eps;
  s.nu_bar = nu;
  s.delta_bar = delta;
  return s;
}

DirectionResult make_dir(const Vec& dx, const Vec& dmu, const Vec& dlambda) {
  DirectionResult d;
  d.kind = DirectionKind::SteepestDescent;
  d.dx = dx;
  d.dmu = dmu;
  d.dlambda = dlambda;
  return d;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

void expect_identical(const RunTrace& a, const RunTrace& b) {
  ASSERT_EQ(a.records.size(), b.records.size());
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.final_iterate.stacked(), b.final_iterate.stacked());
  EXPECT_TRUE(same_bits(a.terminal_kkt_residual, b.terminal_kkt_residual));
  EXPECT_EQ(a.total_samples, b.total_samples);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    EXPECT_TRUE(same_bits(x.kkt_residual_exact, y.kkt_residual_exact));
    EXPECT_TRUE(same_bits(x.kkt_residual_est, y.kkt_residual_est));
    EXPECT_TRUE(same_bits(x.merit_est, y.merit_est));
    EXPECT_TRUE(same_bits(x.merit_est_trial, y.merit_est_trial));
    EXPECT_TRUE(same_bits(x.dir_deriv, y.dir_deriv));
    EXPECT_TRUE(same_bits(x.eps_bar, y.eps_bar));
    EXPECT_TRUE(same_bits(x.nu_bar, y.nu_bar));
    EXPECT_EQ(x.batch1, y.batch1);
    EXPECT_EQ(x.batch2, y.batch2);
    EXPECT_EQ(x.step_type, y.step_type);
  }
}

// Every invariant that must hold between and within the records of a trace.
void check_trace_invariants(const RunTrace& tr, const AdaptiveConfig& cfg) {
  const double slope = std::min(cfg.gamma_B, cfg.eta);
  for (std::size_t i = 0; i < tr.records.size(); ++i) {
    const auto& r = tr.records[i];
    EXPECT_GT(r.alpha_bar, 0.0);
    EXPECT_LE(r.alpha_bar, cfg.alpha_max);
    EXPECT_LE(r.eps_bar, r.eps_bar_in);
    EXPECT_LE(r.a_x, 0.5 * r.nu_bar);
    EXPECT_LE(r.feas_norm, r.merit_grad_norm);
    if (r.direction_kind == DirectionKind::Sqp) {
      EXPECT_TRUE(r.sqp_solvable);
      EXPECT_LE(r.sqp_diag.descent_lhs1, -0.5 * slope * r.sqp_diag.descent_rhs);
      EXPECT_LE(r.sqp_diag.descent_lhs2, 0.25 * slope * r.sqp_diag.descent_rhs);
    }
    if (i + 1 == tr.records.size()) break;
    const auto& n = tr.records[i + 1];
    EXPECT_EQ(n.eps_bar_in, r.eps_bar);
    const double up = std::min(cfg.rho * r.alpha_bar, cfg.alpha_max);
    switch (r.step_type) {
      case StepType::Reliable:
        EXPECT_EQ(n.alpha_bar, up);
        EXPECT_EQ(n.delta_bar, cfg.rho * r.delta_bar);
        EXPECT_EQ(n.nu_bar, r.nu_bar);
        break;
      case StepType::Unreliable:
        EXPECT_EQ(n.alpha_bar, up);
        EXPECT_EQ(n.delta_bar, r.delta_bar / cfg.rho);
        EXPECT_EQ(n.nu_bar, r.nu_bar);
        break;
      case StepType::Unsuccessful:
        EXPECT_EQ(n.alpha_bar, r.alpha_bar / cfg.rho);
        EXPECT_EQ(n.delta_bar, r.delta_bar / cfg.rho);
        EXPECT_EQ(n.nu_bar, r.nu_bar);
        break;
      case StepType::NuIncrease: {
        EXPECT_EQ(n.alpha_bar, r.alpha_bar);
        EXPECT_EQ(n.delta_bar, r.delta_bar);
        const double j = std::log(n.nu_bar / r.nu_bar) / std::log(cfg.rho);
        EXPECT_GE(j, 1.0 - 1e-12);
        EXPECT_NEAR(j, std::round(j), 1e-9);
        break;
      }
      case StepType::Prescribed:
        ADD_FAILURE() << "adaptive trace holds a prescribed step";
    }
  }
}

}  // namespace

TEST(BatchSize, MinimumSizeExample) {
  // ceil(2 ln(2 / 0.9)) = ceil(1.597) = 2
  EXPECT_EQ(grad_batch_floor(2.0, 2, 0.9, 1.0, 1.0, 1.0), 2);
  EXPECT_TRUE(grad_batch_sufficient(2, 2.0, 2, 0.9, 1.0, 1.0, 1.0));
  EXPECT_FALSE(grad_batch_sufficient(1, 2.0, 2, 0.9, 1.0, 1.0, 1.0));
}

TEST(BatchSize, HalvingStepsizeQuadruplesFloor) {
  const double C = 2.0, rbar = 0.01;
  const double raw = C * std::log(2 / 0.9) / (0.25 * rbar * rbar);
  EXPECT_EQ(grad_batch_floor(C, 2, 0.9, 1.0, 0.5, rbar), static_cast<std::int64_t>(std::ceil(raw)));
  EXPECT_EQ(grad_batch_floor(C, 2, 0.9, 1.0, 0.25, rbar), static_cast<std::int64_t>(std::ceil(4.0 * raw)));
  // kappa^2 alpha^2 clamps at 1
  EXPECT_EQ(grad_batch_floor(C, 2, 0.9, 1.0, 1.5, rbar), grad_batch_floor(C, 2, 0.9, 1.0, 1.0, rbar));
}

TEST(BatchSize, MeritBatchFormulaAndCap) {
  // min{0.04^2 * 1 * 4, 1} = 0.0064; ceil(2 ln(1 / 0.9) / 0.0064) = ceil(32.93) = 33
  EXPECT_EQ(merit_batch_size(2.0, 0.9, 0.04, 1.0, -2.0, 1.0, 1000000), 33);
  // delta term binds: ceil(2 ln(1/0.9) / 0.01) = 22
  EXPECT_EQ(merit_batch_size(2.0, 0.9, 0.04, 1.5, -100.0, 0.1, 1000000), 22);
  EXPECT_EQ(merit_batch_size(2.0, 0.9, 0.04, 1.0, -1e-9, 1.0, 1000000), 1000000);
  EXPECT_EQ(merit_batch_size(2.0, 0.9, 0.04, 1.0, 0.0, 1.0, 500), 500);
}

TEST(NuUpdate, Examples) {
  EXPECT_EQ(enlarge_nu(2.0, 5.0, 2.0), 16.0);
  EXPECT_EQ(enlarge_nu(2.0, 1.0001, 2.0), 4.0);
  EXPECT_GE(enlarge_nu(3.0, 1e6, 2.0), 2e6);
  EXPECT_EQ(enlarge_nu(1.0, 4.0, 2.0), 8.0);
}

TEST(Config, Validation) {
  AdaptiveConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.kappa_f = 0.3 / 6.0 + 1e-9;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.rho = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.beta = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(InitialState, DefaultNu) {
  AdaptiveConfig cfg;
  const auto p = find_problem("p1_bound");  // x0 = -1, g = 2, a = 8
  const auto s = initial_state(p, cfg);
  EXPECT_EQ(s.nu_bar, 17.0);
  EXPECT_EQ(s.alpha_bar, 1.5);
  EXPECT_EQ(s.eps_bar, 1.0);
  EXPECT_EQ(s.delta_bar, 1.0);
  cfg.nu0 = 40.0;
  EXPECT_EQ(initial_state(p, cfg).nu_bar, 40.0);
}

TEST(Step1, ZeroNoiseExitsOnFirstTest) {
  const auto p = find_problem("p3_circle");
  AdaptiveConfig cfg;
  auto s = initial_state(p, cfg);
  s.last_batch1 = 41;
  s.last_rbar = 1e-4;
  const auto cd = evaluate_constraints(p, s.it.x);
  const auto r = step1_estimate(s, p, cd, {0.0, 1}, cfg);
  EXPECT_EQ(r.batch1, 42);
  EXPECT_EQ(r.samples_drawn, 42);
  EXPECT_DOUBLE_EQ(r.rbar, kkt_residual_exact(p, s.it));
}

TEST(Step1, NoisyBatchMeetsTheComputableBound) {
  const auto p = find_problem("p3_circle");
  AdaptiveConfig cfg;
  auto s = initial_state(p, cfg);
  s.last_rbar = 0.5;
  s.last_batch1 = 3;
  const auto cd = evaluate_constraints(p, s.it.x);
  const auto r = step1_estimate(s, p, cd, {0.1, 1}, cfg);
  EXPECT_GE(r.batch1, grad_batch_floor(2.0, 2, 0.9, 1.0, 1.5, 0.5));
  EXPECT_GE(r.batch1, 4);
  EXPECT_TRUE(grad_batch_sufficient(r.batch1, 2.0, 2, 0.9, 1.0, 1.5, r.rbar));
  EXPECT_GE(r.samples_drawn, r.batch1);
}

TEST(Step1, BatchExplosionAboveCap) {
  const auto p = find_problem("p1_bound");
  AdaptiveConfig cfg;
  cfg.max_batch = 1000;
  auto s = initial_state(p, cfg);
  s.last_rbar = 1e-6;
  const auto cd = evaluate_constraints(p, s.it.x);
  EXPECT_THROW(step1_estimate(s, p, cd, {1.0, 1}, cfg), BatchExplosion);
}

TEST(Step2, NoDecreaseAtKkt) {
  for (const auto& pr : builtin_suite()) {
    AdaptiveConfig cfg;
    const auto s = make_state(*pr.known_kkt, 1.5, 1.0, 2.0, 1.0);
    const auto cd = evaluate_constraints(pr, s.it.x);
    const auto r = step2_set_epsilon(s, cd, exact_batch(pr, s.it.x), Mat::Identity(pr.dim_x, pr.dim_x), cfg);
    EXPECT_EQ(r.eps_bar, 1.0) << pr.name;
    EXPECT_EQ(r.reductions, 0) << pr.name;
    EXPECT_LE(r.feas_norm, 1e-10) << pr.name;
  }
}

TEST(Step2, ConstructedInfeasiblePointNeedsOneHalving) {
  const auto p = find_problem("p2_simplex");
  const Iterate it{vec({0.125, 0.0}), vec({2.75}), vec({1.25, -2.25})};
  const double nu = 2.0;
  // independent evaluation of both sides at eps = 1 and eps = 0.5
  auto sides = [&](double eps) {
    const Vec g = p.eval_g(it.x);
    const double a = g.cwiseMax(0.0).array().cube().sum();
    const double q = (nu - a) / (1.0 + it.lambda.squaredNorm());
    const Vec w = g.cwiseMax(-eps * q * it.lambda);
    const double feas = std::sqrt(p.eval_c(it.x).squaredNorm() + w.squaredNorm());
    const double grad = fd_gradient(merit_of(p, {eps, nu, 1.0}), it.stacked(), 1e-7).norm();
    return std::pair{feas, grad};
  };
  const auto [f1, g1] = sides(1.0);
  const auto [f2, g2] = sides(0.5);
  ASSERT_GT(f1, g1);
  ASSERT_LE(f2, g2);

  AdaptiveConfig cfg;
  const auto s = make_state(it, 1.5, 1.0, nu, 1.0);
  const auto cd = evaluate_constraints(p, it.x);
  const auto r = step2_set_epsilon(s, cd, exact_batch(p, it.x), Mat::Identity(2, 2), cfg);
  EXPECT_EQ(r.reductions, 1);
  EXPECT_EQ(r.eps_bar, 0.5);
  EXPECT_NEAR(r.feas_norm, f2, 1e-12);
}

TEST(Step2, SingularSystemLeavesOnlyFeasibilityTest) {
  const auto p = stosqp::testing::make_degenerate();
  const Iterate it{vec({1.0}), Vec(0), vec({1.0, 1.0})};
  AdaptiveConfig cfg;
  const auto s = make_state(it, 1.5, 1.0, 2.0, 1.0);
  const auto cd = evaluate_constraints(p, it.x);
  const auto r = step2_set_epsilon(s, cd, exact_batch(p, it.x), Mat::Identity(1, 1), cfg);
  EXPECT_FALSE(r.sqp.solvable);
  // c is empty and w = max{0, -eps q lambda} = 0, so feasibility holds at once
  EXPECT_EQ(r.reductions, 0);
  EXPECT_EQ(r.eps_bar, 1.0);

  // step 3 then has to fall back
  const auto dir = step3_choose_direction(s, r, cd, Mat::Identity(1, 1), cfg);
  EXPECT_EQ(dir.kind, DirectionKind::RegularizedNewton);
  cfg.fallback = FallbackKind::SteepestDescent;
  const auto sd = step3_choose_direction(s, r, cd, Mat::Identity(1, 1), cfg);
  EXPECT_EQ(sd.kind, DirectionKind::SteepestDescent);
  EXPECT_EQ(sd.stacked(), -r.grad.full());
}

TEST(Step3, KeepsSqpWhenHigherOrderTermVanishes) {
  AdaptiveConfig cfg;
  Step2Result s2;
  s2.sqp = make_dir(vec({1.0}), Vec(0), vec({0.5}));
  s2.sqp.kind = DirectionKind::Sqp;
  s2.sqp.solvable = true;
  s2.sqp.diag.descent_lhs2 = 0.0;
  s2.sqp.diag.descent_rhs = 1.0;
  const auto p = find_problem("p1_bound");
  const auto s = make_state(*p.known_kkt, 1.0, 1.0, 2.0, 1.0);
  const auto cd = evaluate_constraints(p, s.it.x);
  const auto dir = step3_choose_direction(s, s2, cd, Mat::Identity(1, 1), cfg);
  EXPECT_EQ(dir.kind, DirectionKind::Sqp);
  EXPECT_EQ(dir.dx, s2.sqp.dx);
}

TEST(Step3, RejectsSqpWhenHigherOrderTermIsLarge) {
  AdaptiveConfig cfg;
  cfg.fallback = FallbackKind::SteepestDescent;
  const auto p = find_problem("p1_bound");
  const auto s = make_state(*p.known_kkt, 1.0, 1.0, 2.0, 1.0);
  const auto cd = evaluate_constraints(p, s.it.x);
  Step2Result s2;
  s2.sqp = make_dir(vec({1.0}), Vec(0), vec({0.5}));
  s2.sqp.kind = DirectionKind::Sqp;
  s2.sqp.solvable = true;
  s2.sqp.diag.descent_rhs = 1.0;
  s2.sqp.diag.descent_lhs2 = 0.025 + 1e-12;  // just above (0.1 / 4) * 1
  s2.grad.grad_x = vec({1.0});
  s2.grad.grad_mu = Vec(0);
  s2.grad.grad_lambda = vec({0.0});
  s2.grad.part1 = vec({1.0, 0.0});
  s2.grad.part2 = vec({0.0, 0.0});
  const auto dir = step3_choose_direction(s, s2, cd, Mat::Identity(1, 1), cfg);
  EXPECT_EQ(dir.kind, DirectionKind::SteepestDescent);
  EXPECT_EQ(dir.stacked(), vec({-1.0, 0.0}));
}

TEST(Step4, NuIncreaseWhenTrialLeavesSet) {
  const auto p = find_problem("p1_bound");
  AdaptiveConfig cfg;
  const auto s = make_state({vec({1.0}), Vec(0), vec({2.0})}, 1.0, 1.0, 2.0, 1.0);
  // trial x = -0.1 gives a = 1.1^3 = 1.331 > 1
  const auto r = step4_estimate_merit(s, p, {0.0, 1}, make_dir(vec({-1.1}), Vec(0), vec({0.0})), -1.0, cfg);
  ASSERT_TRUE(std::holds_alternative<NuIncreased>(r));
  EXPECT_EQ(std::get<NuIncreased>(r).nu, 4.0);
  EXPECT_NEAR(std::get<NuIncreased>(r).a_trial, 1.331, 1e-12);
}

TEST(Step4, BoundaryOfSetIsNotAnIncrease) {
  const auto p = find_problem("p1_bound");
  AdaptiveConfig cfg;
  const auto s = make_state({vec({1.0}), Vec(0), vec({2.0})}, 1.0, 1.0, 2.0, 1.0);
  // trial x = 0 gives a = 1 = nu / 2 exactly
  const auto r = step4_estimate_merit(s, p, {0.0, 1}, make_dir(vec({-1.0}), Vec(0), vec({0.0})), -1.0, cfg);
  EXPECT_TRUE(std::holds_alternative<MeritEstimates>(r));
}

TEST(Step4, ZeroNoiseGivesExactMeritValues) {
  const auto p = find_problem("p5_mixed");
  AdaptiveConfig cfg;
  const auto s = make_state(p.initial_iterate(), 0.5, 0.3, 4.0, 0.2);
  const auto dir = make_dir(vec({-0.2, 0.1, 0.05}), vec({0.3}), vec({0.1, 0.2}));
  const auto r = step4_estimate_merit(s, p, {0.0, 1}, dir, -3.0, cfg);
  ASSERT_TRUE(std::holds_alternative<MeritEstimates>(r));
  const auto& est = std::get<MeritEstimates>(r);
  const PenaltyParams pp{0.3, 4.0, 1.0};
  const Iterate trial{s.it.x + 0.5 * dir.dx, s.it.mu + 0.5 * dir.dmu, s.it.lambda + 0.5 * dir.dlambda};
  EXPECT_EQ(est.merit_t, eval_merit(p, s.it, pp, p.eval_f(s.it.x), p.eval_grad_f(s.it.x)).value);
  EXPECT_EQ(est.merit_s, eval_merit(p, trial, pp, p.eval_f(trial.x), p.eval_grad_f(trial.x)).value);
  EXPECT_EQ(est.batch2, merit_batch_size(2.0, 0.9, 0.04, 0.5, -3.0, 0.2, cfg.max_batch));
  EXPECT_EQ(est.trial.stacked(), trial.stacked());
}

TEST(Step5, ArmijoOutcomes) {
  AdaptiveConfig cfg;
  const auto p = find_problem("p1_bound");
  const auto s = make_state(p.initial_iterate(), 1.0, 0.7, 3.0, 0.5);
  MeritEstimates est;
  est.merit_t = 0.0;
  est.merit_s = -1.0;
  est.trial = {vec({5.0}), Vec(0), vec({6.0})};

  auto r = step5_line_search(s, est, -2.0, cfg);
  EXPECT_EQ(r.type, StepType::Reliable);
  EXPECT_EQ(r.next.delta_bar, 1.0);
  EXPECT_EQ(r.next.alpha_bar, 1.5);
  EXPECT_EQ(r.next.it.x(0), 5.0);
  EXPECT_EQ(r.next.eps_bar, 0.7);
  EXPECT_EQ(r.next.nu_bar, 3.0);

  est.merit_s = -0.1;
  r = step5_line_search(s, est, -2.0, cfg);
  EXPECT_EQ(r.type, StepType::Unsuccessful);
  EXPECT_EQ(r.next.alpha_bar, 0.5);
  EXPECT_EQ(r.next.delta_bar, 0.25);
  EXPECT_EQ(r.next.it.x(0), -1.0);

  est.merit_s = -1.0;
  auto s2 = s;
  s2.delta_bar = 0.7;
  r = step5_line_search(s2, est, -2.0, cfg);
  EXPECT_EQ(r.type, StepType::Unreliable);
  EXPECT_EQ(r.next.delta_bar, 0.35);
  EXPECT_EQ(r.next.alpha_bar, 1.5);
}

TEST(Run, P1DeterministicConverges) {
  const auto p = find_problem("p1_bound");
  const auto tr = run_adaptive(p, {0.0, 1}, AdaptiveConfig{});
  EXPECT_EQ(tr.status, RunStatus::Converged);
  EXPECT_LE(tr.records.size(), 200u);
  EXPECT_LE(stosqp::testing::dist_to_kkt(p, tr.final_iterate), 1e-4);
  EXPECT_LE(tr.terminal_kkt_residual, 1e-5);
}

TEST(Run, ZeroIterationBudget) {
  AdaptiveConfig cfg;
  cfg.max_iters = 0;
  const auto tr = run_adaptive(find_problem("p3_circle"), {0.0, 1}, cfg);
  EXPECT_EQ(tr.status, RunStatus::MaxIters);
  EXPECT_TRUE(tr.records.empty());
  EXPECT_EQ(tr.iterations, 0);
}

TEST(Run, BitIdenticalRepeats) {
  for (const auto& p : builtin_suite()) {
    for (auto mode : {SamplingMode::Aggregated, SamplingMode::Explicit}) {
      AdaptiveConfig cfg;
      cfg.max_iters = 300;
      cfg.max_batch = 10000;  // explicit sampling draws every sample
      const NoiseModel noise{0.01, 3, mode};
      SCOPED_TRACE(p.name);
      expect_identical(run_adaptive(p, noise, cfg), run_adaptive(p, noise, cfg));
    }
  }
}

TEST(Run, SeedChangesTrace) {
  const auto p = find_problem("p2_simplex");
  AdaptiveConfig cfg;
  const auto a = run_adaptive(p, {0.1, 1}, cfg);
  const auto b = run_adaptive(p, {0.1, 2}, cfg);
  EXPECT_NE(a.final_iterate.stacked(), b.final_iterate.stacked());
}

TEST(Run, TraceInvariantsHold) {
  for (const auto& p : builtin_suite()) {
    for (double s2 : {0.0, 1e-4, 1e-1, 1.0}) {
      for (auto fb : {FallbackKind::RegNewton, FallbackKind::SteepestDescent}) {
        AdaptiveConfig cfg;
        cfg.fallback = fb;
        cfg.max_iters = 2000;
        const auto tr = run_adaptive(p, {s2, 4}, cfg);
        SCOPED_TRACE(p.name + " sigma2=" + std::to_string(s2));
        check_trace_invariants(tr, cfg);
        // parameters are monotone over the run
        for (std::size_t i = 1; i < tr.records.size(); ++i) {
          EXPECT_GE(tr.records[i].nu_bar, tr.records[i - 1].nu_bar);
          EXPECT_LE(tr.records[i].eps_bar, tr.records[i - 1].eps_bar);
        }
      }
    }
  }
}

TEST(Run, ExactHessianOptionConverges) {
  AdaptiveConfig cfg;
  cfg.hessian = HessianApprox::ExactLagrangian;
  cfg.max_iters = 10000;
  for (const char* name : {"p1_bound", "p2_simplex", "p6_box5"}) {
    const auto p = find_problem(name);
    const auto tr = run_adaptive(p, {0.0, 1}, cfg);
    EXPECT_EQ(tr.status, RunStatus::Converged) << name;
  }
}
