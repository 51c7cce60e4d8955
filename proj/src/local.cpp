#include "stosqp/local.hpp"

#include <cmath>
#include <stdexcept>

namespace stosqp {

namespace {

constexpr std::uint64_t kStreamLagrangian = 11;
constexpr std::uint64_t kStreamQ = 12;

}  // namespace

double stepsize_at(const Stepsize& s, int t) {
  if (const auto* c = std::get_if<ConstStep>(&s)) return c->alpha;
  return std::pow(static_cast<double>(t), -std::get<DecayStep>(s).exponent);
}

void LocalConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (const auto* c = std::get_if<ConstStep>(&stepsize)) {
    if (!(c->alpha > 0.0)) throw std::invalid_argument("constant stepsize must be positive");
  } else {
    const double p = std::get<DecayStep>(stepsize).exponent;
    if (!(p > 0.5 && p <= 1.0)) throw std::invalid_argument("decay exponent must lie in (0.5, 1]");
  }
  if (max_iters < 0) throw std::invalid_argument("max_iters must be nonnegative");
  if (tol < 0.0) throw std::invalid_argument("tol must be nonnegative");
  if (!(rho > 1.0)) throw std::invalid_argument("rho must exceed 1");
  if (nu0 && !(*nu0 > 0.0)) throw std::invalid_argument("nu0 must be positive");
}

DirectionResult local_direction(const ProblemDef& problem, const ConstraintData& cd, const Iterate& it,
                                const ActiveSet& aset, const Mat& B, const NoiseModel& noise, SampleKey key1,
                                SampleKey key2) {
  const OracleBatch b1 = sample_batch(problem, noise, it.x, 1, key1, false);
  const OracleBatch b2 = sample_batch(problem, noise, it.x, 1, key2, true);
  return solve_sqp_system(cd, it, aset, B, b1.gradbar, b2.gradbar, b2.hessbar);
}

RunTrace run_local(const ProblemDef& problem, const NoiseModel& noise, const LocalConfig& cfg) {
  cfg.validate();
  if (!problem.x0.allFinite()) throw std::invalid_argument("run_local: non-finite initial point");

  Iterate it = problem.initial_iterate();
  double nu = cfg.nu0 ? *cfg.nu0 : 2.0 * eval_a(problem.eval_g(it.x)) + 1.0;
  double alpha = stepsize_at(cfg.stepsize, 1);
  RunTrace trace;
  trace.status = RunStatus::MaxIters;
  int t = 0;

  for (;; ++t) {
    if (!it.all_finite()) {
      trace.status = RunStatus::Divergent;
      break;
    }
    const ConstraintData cd = evaluate_constraints(problem, it.x);
    const double r_exact = kkt_residual_exact(problem, it);
    trace.terminal_kkt_residual = r_exact;
    if (!std::isfinite(r_exact)) {
      trace.status = RunStatus::Divergent;
      break;
    }
    if (r_exact <= cfg.tol) {
      trace.status = RunStatus::Converged;
      break;
    }
    if (t >= cfg.max_iters) break;

    IterationRecord rec;
    rec.iter = t;
    rec.kkt_residual_exact = r_exact;
    rec.step_type = StepType::Prescribed;
    rec.eps_bar_in = cfg.epsilon;
    rec.eps_bar = cfg.epsilon;
    rec.a_x = eval_a(cd.g);
    if (rec.a_x > 0.5 * nu) nu = enlarge_nu(nu, rec.a_x, cfg.rho);
    rec.nu_bar = nu;
    alpha = stepsize_at(cfg.stepsize, t + 1);
    rec.alpha_bar = alpha;
    rec.batch1 = 1;
    rec.batch2 = 1;

    const double q = eval_q(rec.a_x, it.lambda, nu);
    const ActiveSet aset = identify_active_set(cd.g, it.lambda, cfg.epsilon * q);
    const Mat B = sqp_hessian_approx(problem, cd, it, cfg.hessian);
    const SampleKey key1{kStreamLagrangian, static_cast<std::uint64_t>(t)};
    const SampleKey key2{kStreamQ, static_cast<std::uint64_t>(t)};
    const DirectionResult dir = local_direction(problem, cd, it, aset, B, noise, key1, key2);
    trace.total_samples += 2;
    rec.sqp_solvable = dir.solvable;
    rec.sqp_diag = dir.diag;
    rec.kkt_residual_est = kkt_residual(cd, it, sample_batch(problem, noise, it.x, 1, key1, false).gradbar);
    if (!dir.solvable) {
      trace.records.push_back(rec);
      trace.status = RunStatus::Divergent;
      break;
    }
    rec.step_norm = dir.stacked().norm();
    trace.records.push_back(rec);
    if (alpha * rec.step_norm <= cfg.tol) {
      trace.status = RunStatus::Converged;
      break;
    }
    it.x += alpha * dir.dx;
    it.mu += alpha * dir.dmu;
    it.lambda += alpha * dir.dlambda;
  }

  trace.final_iterate = it;
  trace.terminal_alpha = alpha;
  trace.eps_final = cfg.epsilon;
  trace.nu_final = nu;
  trace.iterations = t;
  return trace;
}

}  // namespace stosqp
