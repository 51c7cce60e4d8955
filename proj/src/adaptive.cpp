#include "stosqp/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace stosqp {

namespace {

// Random streams used by the adaptive scheme.
constexpr std::uint64_t kStreamGradient = 1;
constexpr std::uint64_t kStreamMeritCurrent = 2;
constexpr std::uint64_t kStreamMeritTrial = 3;
// Counter spacing between iterations for the doubling loop of step 1.
constexpr std::uint64_t kMaxStep1Attempts = 64;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

Iterate advance(const Iterate& it, double alpha, const DirectionResult& dir) {
  return {it.x + alpha * dir.dx, it.mu + alpha * dir.dmu, it.lambda + alpha * dir.dlambda};
}

}  // namespace

void AdaptiveConfig::validate() const {
  require(alpha_max > 0.0, "alpha_max must be positive");
  require(eta > 0.0, "eta must be positive");
  require(gamma_B > 0.0, "gamma_B must be positive");
  require(!nu0 || *nu0 > 0.0, "nu0 must be positive");
  require(eps0 > 0.0, "eps0 must be positive");
  require(delta0 > 0.0, "delta0 must be positive");
  require(beta > 0.0 && beta < 1.0, "beta must lie in (0, 1)");
  require(rho > 1.0, "rho must exceed 1");
  require(kappa_grad > 0.0, "kappa_grad must be positive");
  require(kappa_f > 0.0 && kappa_f <= beta / (4.0 * alpha_max), "kappa_f must lie in (0, beta / (4 alpha_max)]");
  require(p_grad > 0.0 && p_grad < 1.0, "p_grad must lie in (0, 1)");
  require(p_f > 0.0 && p_f < 1.0, "p_f must lie in (0, 1)");
  require(big_O_const > 0.0, "big_O_const must be positive");
  require(max_iters >= 0, "max_iters must be nonnegative");
  require(tol >= 0.0, "tol must be nonnegative");
  require(max_batch >= 1, "max_batch must be at least 1");
}

SolverState initial_state(const ProblemDef& problem, const AdaptiveConfig& cfg) {
  SolverState s;
  s.it = problem.initial_iterate();
  s.alpha_bar = cfg.alpha_max;
  s.eps_bar = cfg.eps0;
  s.nu_bar = cfg.nu0 ? *cfg.nu0 : 2.0 * eval_a(problem.eval_g(s.it.x)) + 1.0;
  s.delta_bar = cfg.delta0;
  return s;
}

std::int64_t grad_batch_floor(double C, int d, double p_grad, double kappa_grad, double alpha, double rbar) {
  const double denom = std::min(kappa_grad * kappa_grad * alpha * alpha, 1.0) * rbar * rbar;
  const double n = std::ceil(C * std::log(d / p_grad) / denom);
  if (!(n < 9.0e18)) return std::numeric_limits<std::int64_t>::max();
  return static_cast<std::int64_t>(n);
}

bool grad_batch_sufficient(std::int64_t n, double C, int d, double p_grad, double kappa_grad, double alpha,
                           double rbar) {
  return static_cast<double>(n) * kappa_grad * kappa_grad * alpha * alpha * rbar * rbar >=
         C * std::log(d / p_grad);
}

std::int64_t merit_batch_size(double C, double p_f, double kappa_f, double alpha, double dir_deriv, double delta,
                              std::int64_t max_batch) {
  const double a2 = alpha * alpha;
  const double denom = std::min(kappa_f * kappa_f * a2 * a2 * dir_deriv * dir_deriv, delta * delta);
  const double n = std::ceil(C * std::log(1.0 / p_f) / denom);
  if (!(n < static_cast<double>(max_batch))) return max_batch;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
}

double enlarge_nu(double nu, double a_trial, double rho) {
  const int j = std::max(1, static_cast<int>(std::ceil(std::log(2.0 * a_trial / nu) / std::log(rho))));
  double out = nu * std::pow(rho, j);
  // guard against rounding in the logarithms
  while (out < 2.0 * a_trial) out *= rho;
  return out;
}

Step1Result step1_estimate(const SolverState& state, const ProblemDef& problem, const ConstraintData& cd,
                           const NoiseModel& noise, const AdaptiveConfig& cfg) {
  const int d = problem.dim_x;
  const double C = cfg.big_O_const;
  Step1Result out;

  std::int64_t n = state.last_batch1 + 1;
  // Without noise the estimate is exact and every batch size meets the bound.
  const bool exact = noise.sigma2 == 0.0;
  if (!exact && state.last_rbar) {
    n = std::max(n, grad_batch_floor(C, d, cfg.p_grad, cfg.kappa_grad, state.alpha_bar, *state.last_rbar));
  }

  for (std::uint64_t attempt = 0;; ++attempt) {
    if (n > cfg.max_batch || attempt >= kMaxStep1Attempts) {
      std::ostringstream msg;
      msg << "gradient batch exceeds cap at iteration " << state.iter;
      throw BatchExplosion(msg.str());
    }
    const SampleKey key{kStreamGradient, static_cast<std::uint64_t>(state.iter) * kMaxStep1Attempts + attempt};
    out.batch = sample_batch(problem, noise, state.it.x, n, key);
    out.samples_drawn += n;
    out.rbar = kkt_residual(cd, state.it, out.batch.gradbar);
    out.batch1 = n;
    if (exact || grad_batch_sufficient(n, C, d, cfg.p_grad, cfg.kappa_grad, state.alpha_bar, out.rbar)) return out;
    n = n > cfg.max_batch / 2 ? cfg.max_batch + 1 : 2 * n;
  }
}

Step2Result step2_set_epsilon(const SolverState& state, const ConstraintData& cd, const OracleBatch& batch,
                              const Mat& B, const AdaptiveConfig& cfg) {
  const double slope = std::min(cfg.gamma_B, cfg.eta);
  Step2Result out;
  out.eps_bar = state.eps_bar;
  for (;;) {
    const PenaltyParams p{out.eps_bar, state.nu_bar, cfg.eta};
    const double q = eval_q(eval_a(cd.g), state.it.lambda, p.nu);
    out.aset = identify_active_set(cd.g, state.it.lambda, p.epsilon * q);
    out.grad = eval_merit_gradient(cd, state.it, p, batch.gradbar, batch.hessbar, out.aset);
    out.sqp = solve_sqp_system(cd, state.it, out.aset, B, batch.gradbar, batch.gradbar, batch.hessbar);
    if (out.sqp.solvable) attach_descent_diag(out.sqp, out.grad);

    out.feas_norm = std::sqrt(cd.c.squaredNorm() + out.grad.w.squaredNorm());
    const bool feasibility_ok = out.feas_norm <= out.grad.full().norm();
    const bool descent_ok =
        !out.sqp.solvable || out.sqp.diag.descent_lhs1 <= -0.5 * slope * out.sqp.diag.descent_rhs;
    if (feasibility_ok && descent_ok) return out;

    out.eps_bar /= cfg.rho;
    ++out.reductions;
    if (out.eps_bar < 1e-300) throw StalledEpsilon("epsilon underflow while enforcing the step-2 conditions");
  }
}

DirectionResult step3_choose_direction(const SolverState& state, const Step2Result& s2, const ConstraintData& cd,
                                       const Mat& B, const AdaptiveConfig& cfg) {
  const double slope = std::min(cfg.gamma_B, cfg.eta);
  if (s2.sqp.solvable && !(s2.sqp.diag.descent_lhs2 > 0.25 * slope * s2.sqp.diag.descent_rhs)) return s2.sqp;

  std::optional<Mat> Hhat;
  if (cfg.fallback == FallbackKind::RegNewton) {
    const PenaltyParams p{s2.eps_bar, state.nu_bar, cfg.eta};
    Hhat = build_reg_newton_matrix(cd, state.it, s2.aset, p, B, cfg.gamma_B);
  }
  DirectionResult dir = solve_fallback(Hhat, s2.grad.full(), state.it.x.size(), state.it.mu.size());
  attach_descent_diag(dir, s2.grad);
  return dir;
}

Step4Result step4_estimate_merit(const SolverState& state, const ProblemDef& problem, const NoiseModel& noise,
                                 const DirectionResult& dir, double dir_deriv, const AdaptiveConfig& cfg) {
  Iterate trial = advance(state.it, state.alpha_bar, dir);
  const ConstraintData cd_s = evaluate_constraints(problem, trial.x, false);
  const double a_s = eval_a(cd_s.g);
  if (a_s > 0.5 * state.nu_bar) return NuIncreased{enlarge_nu(state.nu_bar, a_s, cfg.rho), a_s};

  MeritEstimates est;
  est.batch2 = merit_batch_size(cfg.big_O_const, cfg.p_f, cfg.kappa_f, state.alpha_bar, dir_deriv, state.delta_bar,
                                cfg.max_batch);
  est.capped = est.batch2 >= cfg.max_batch;

  const std::uint64_t counter = static_cast<std::uint64_t>(state.iter);
  const OracleBatch b_t =
      sample_batch(problem, noise, state.it.x, est.batch2, {kStreamMeritCurrent, counter}, false);
  const OracleBatch b_s = sample_batch(problem, noise, trial.x, est.batch2, {kStreamMeritTrial, counter}, false);

  const PenaltyParams p{state.eps_bar, state.nu_bar, cfg.eta};
  const ConstraintData cd_t = evaluate_constraints(problem, state.it.x, false);
  est.merit_t = eval_merit(cd_t, state.it, p, b_t.fbar, b_t.gradbar).value;
  est.merit_s = eval_merit(cd_s, trial, p, b_s.fbar, b_s.gradbar).value;
  if (!std::isfinite(est.merit_t) || !std::isfinite(est.merit_s)) {
    throw std::runtime_error("non-finite merit estimate");
  }
  est.trial = std::move(trial);
  return est;
}

Step5Result step5_line_search(const SolverState& state, const MeritEstimates& est, double dir_deriv,
                              const AdaptiveConfig& cfg) {
  Step5Result out{state, StepType::Unsuccessful};
  SolverState& next = out.next;
  const double decrease = cfg.beta * state.alpha_bar * dir_deriv;
  if (est.merit_s <= est.merit_t + decrease) {
    next.it = est.trial;
    next.alpha_bar = std::min(cfg.rho * state.alpha_bar, cfg.alpha_max);
    if (-decrease >= state.delta_bar) {
      next.delta_bar = cfg.rho * state.delta_bar;
      out.type = StepType::Reliable;
    } else {
      next.delta_bar = state.delta_bar / cfg.rho;
      out.type = StepType::Unreliable;
    }
  } else {
    next.alpha_bar = state.alpha_bar / cfg.rho;
    next.delta_bar = state.delta_bar / cfg.rho;
  }
  return out;
}

Mat sqp_hessian_approx(const ProblemDef& problem, const ConstraintData& cd, const Iterate& it, HessianApprox kind) {
  switch (kind) {
    case HessianApprox::Identity:
      break;
    case HessianApprox::ExactLagrangian:
      return lagrangian_hessian(cd, it, problem.eval_hess_f(it.x));
  }
  return Mat::Identity(it.x.size(), it.x.size());
}

RunTrace run_adaptive(const ProblemDef& problem, const NoiseModel& noise, const AdaptiveConfig& cfg) {
  cfg.validate();
  if (!problem.x0.allFinite()) throw std::invalid_argument("run_adaptive: non-finite initial point");

  SolverState state = initial_state(problem, cfg);
  RunTrace trace;
  trace.status = RunStatus::MaxIters;

  for (;;) {
    if (!state.it.all_finite()) {
      trace.status = RunStatus::Divergent;
      break;
    }
    const ConstraintData cd = evaluate_constraints(problem, state.it.x);
    const double r_exact = kkt_residual_exact(problem, state.it);
    trace.terminal_kkt_residual = r_exact;
    if (r_exact <= cfg.tol) {
      trace.status = RunStatus::Converged;
      break;
    }
    if (state.iter >= cfg.max_iters) break;

    IterationRecord rec;
    rec.iter = state.iter;
    rec.kkt_residual_exact = r_exact;
    rec.alpha_bar = state.alpha_bar;
    rec.eps_bar_in = state.eps_bar;
    rec.nu_bar = state.nu_bar;
    rec.delta_bar = state.delta_bar;
    rec.a_x = eval_a(cd.g);

    Step1Result s1;
    try {
      s1 = step1_estimate(state, problem, cd, noise, cfg);
    } catch (const BatchExplosion&) {
      trace.status = RunStatus::ConvergedByBatchCap;
      break;
    }
    trace.total_samples += s1.samples_drawn;
    rec.batch1 = s1.batch1;
    rec.kkt_residual_est = s1.rbar;

    const Mat B = sqp_hessian_approx(problem, cd, state.it, cfg.hessian);
    Step2Result s2;
    try {
      s2 = step2_set_epsilon(state, cd, s1.batch, B, cfg);
    } catch (const StalledEpsilon&) {
      trace.status = RunStatus::Divergent;
      break;
    }
    state.eps_bar = s2.eps_bar;
    rec.eps_bar = s2.eps_bar;
    rec.feas_norm = s2.feas_norm;
    rec.merit_grad_norm = s2.grad.full().norm();
    rec.sqp_solvable = s2.sqp.solvable;
    rec.sqp_diag = s2.sqp.diag;

    const DirectionResult dir = step3_choose_direction(state, s2, cd, B, cfg);
    const double dir_deriv = s2.grad.full().dot(dir.stacked());
    const double step_norm = dir.stacked().norm();
    rec.direction_kind = dir.kind;
    rec.dir_deriv = dir_deriv;
    rec.step_norm = step_norm;

    state.last_batch1 = s1.batch1;
    state.last_rbar = s1.rbar;

    if (state.alpha_bar * step_norm <= cfg.tol) {
      // Stopping test on the scaled step; the iteration itself is not taken.
      rec.step_type = StepType::Unsuccessful;
      trace.records.push_back(rec);
      trace.status = RunStatus::Converged;
      break;
    }

    if (step_norm == 0.0) {
      rec.step_type = StepType::Unsuccessful;
      state.alpha_bar /= cfg.rho;
      state.delta_bar /= cfg.rho;
    } else {
      const Step4Result s4 = step4_estimate_merit(state, problem, noise, dir, dir_deriv, cfg);
      if (const auto* inc = std::get_if<NuIncreased>(&s4)) {
        rec.step_type = StepType::NuIncrease;
        state.nu_bar = inc->nu;
      } else {
        const auto& est = std::get<MeritEstimates>(s4);
        rec.batch2 = est.batch2;
        rec.batch_capped = est.capped;
        rec.merit_est = est.merit_t;
        rec.merit_est_trial = est.merit_s;
        trace.total_samples += 2 * est.batch2;
        Step5Result s5 = step5_line_search(state, est, dir_deriv, cfg);
        rec.step_type = s5.type;
        state = std::move(s5.next);
      }
    }
    trace.records.push_back(rec);
    ++state.iter;
  }

  trace.final_iterate = state.it;
  trace.terminal_alpha = state.alpha_bar;
  trace.eps_final = state.eps_bar;
  trace.nu_final = state.nu_bar;
  trace.delta_final = state.delta_bar;
  trace.iterations = state.iter;
  return trace;
}

}  // namespace stosqp
