#pragma once

// Adaptive stochastic active-set SQP with the exact augmented Lagrangian
// merit function and a stochastic Armijo line search.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>

#include "stosqp/kkt_directions.hpp"
#include "stosqp/merit.hpp"
#include "stosqp/oracle.hpp"
#include "stosqp/trace.hpp"

namespace stosqp {

enum class FallbackKind { RegNewton, SteepestDescent };

/// Choice of B, the Hessian approximation in the SQP system.
enum class HessianApprox { Identity, ExactLagrangian };

struct AdaptiveConfig {
  double alpha_max = 1.5;
  double eta = 1.0;
  double gamma_B = 0.1;
  std::optional<double> nu0;  // default 2 sum max{g_i(x0), 0}^3 + 1
  double eps0 = 1.0;
  double delta0 = 1.0;
  double beta = 0.3;
  double rho = 2.0;
  double kappa_grad = 1.0;
  double kappa_f = 0.04;
  double p_grad = 0.9;
  double p_f = 0.9;
  double big_O_const = 2.0;
  FallbackKind fallback = FallbackKind::RegNewton;
  HessianApprox hessian = HessianApprox::Identity;
  int max_iters = 100000;
  double tol = 1e-5;
  std::int64_t max_batch = 1000000;

  /// Throws std::invalid_argument when a parameter is out of range.
  void validate() const;
};

struct SolverState {
  Iterate it;
  double alpha_bar = 0.0;
  double eps_bar = 0.0;
  double nu_bar = 0.0;
  double delta_bar = 0.0;
  int iter = 0;
  std::int64_t last_batch1 = 0;    // |xi_1^{t-1}|
  std::optional<double> last_rbar;  // R_bar_{t-1}
};

SolverState initial_state(const ProblemDef& problem, const AdaptiveConfig& cfg);

/// The gradient batch would exceed max_batch; signals R_t ~ 0.
class BatchExplosion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// epsilon underflowed while looking for a value meeting the step-2 conditions.
class StalledEpsilon : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// ceil(C log(d / p_grad) / ((kappa^2 alpha^2 ^ 1) rbar^2))
std::int64_t grad_batch_floor(double C, int d, double p_grad, double kappa_grad, double alpha, double rbar);

/// Whether n meets n >= C log(d / p_grad) / (kappa^2 alpha^2 rbar^2).
bool grad_batch_sufficient(std::int64_t n, double C, int d, double p_grad, double kappa_grad, double alpha,
                           double rbar);

/// ceil(C log(1 / p_f) / min{kappa_f^2 alpha^4 dir_deriv^2, delta^2}), capped at max_batch.
std::int64_t merit_batch_size(double C, double p_f, double kappa_f, double alpha, double dir_deriv, double delta,
                              std::int64_t max_batch);

/// rho^j nu with j = ceil(log(2 a / nu) / log rho), j >= 1.
double enlarge_nu(double nu, double a_trial, double rho);

struct Step1Result {
  OracleBatch batch;
  double rbar = 0.0;
  std::int64_t batch1 = 0;
  std::int64_t samples_drawn = 0;  // including rejected While-loop batches
};

Step1Result step1_estimate(const SolverState& state, const ProblemDef& problem, const ConstraintData& cd,
                           const NoiseModel& noise, const AdaptiveConfig& cfg);

struct Step2Result {
  double eps_bar = 0.0;
  ActiveSet aset;
  MeritGradient grad;
  DirectionResult sqp;  // solvable == false when the SQP system is singular
  double feas_norm = 0.0;
  int reductions = 0;
};

Step2Result step2_set_epsilon(const SolverState& state, const ConstraintData& cd, const OracleBatch& batch,
                              const Mat& B, const AdaptiveConfig& cfg);

DirectionResult step3_choose_direction(const SolverState& state, const Step2Result& s2, const ConstraintData& cd,
                                       const Mat& B, const AdaptiveConfig& cfg);

struct NuIncreased {
  double nu = 0.0;
  double a_trial = 0.0;
};

struct MeritEstimates {
  double merit_t = 0.0;
  double merit_s = 0.0;
  std::int64_t batch2 = 0;
  bool capped = false;
  Iterate trial;
};

using Step4Result = std::variant<NuIncreased, MeritEstimates>;

/// `dir_deriv` is (grad L)^T Delta from the step-1 gradient estimate.
Step4Result step4_estimate_merit(const SolverState& state, const ProblemDef& problem, const NoiseModel& noise,
                                 const DirectionResult& dir, double dir_deriv, const AdaptiveConfig& cfg);

struct Step5Result {
  SolverState next;
  StepType type = StepType::Unsuccessful;
};

Step5Result step5_line_search(const SolverState& state, const MeritEstimates& est, double dir_deriv,
                              const AdaptiveConfig& cfg);

/// Matrix B for the SQP system at the current iterate.
Mat sqp_hessian_approx(const ProblemDef& problem, const ConstraintData& cd, const Iterate& it, HessianApprox kind);

RunTrace run_adaptive(const ProblemDef& problem, const NoiseModel& noise, const AdaptiveConfig& cfg);

}  // namespace stosqp
