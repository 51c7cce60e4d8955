#pragma once

#include <cstdint>
#include <vector>

#include "stosqp/kkt_directions.hpp"
#include "stosqp/types.hpp"

namespace stosqp {

enum class RunStatus { Converged, MaxIters, Divergent, ConvergedByBatchCap };

enum class StepType {
  Reliable,
  Unreliable,
  Unsuccessful,
  NuIncrease,
  /// Deterministic prescribed step of the non-adaptive scheme.
  Prescribed,
};

const char* to_string(RunStatus status);
const char* to_string(StepType type);

/// One iteration of a solver run. Parameter fields hold the values used during
/// the iteration; the next record holds their updated values.
struct IterationRecord {
  int iter = 0;
  double kkt_residual_exact = 0.0;
  double kkt_residual_est = 0.0;
  StepType step_type = StepType::Unsuccessful;
  DirectionKind direction_kind = DirectionKind::Sqp;
  double alpha_bar = 0.0;
  double eps_bar_in = 0.0;  // before the epsilon loop
  double eps_bar = 0.0;     // after the epsilon loop
  double nu_bar = 0.0;
  double delta_bar = 0.0;
  std::int64_t batch1 = 0;
  std::int64_t batch2 = 0;
  double merit_est = 0.0;
  double merit_est_trial = 0.0;
  double dir_deriv = 0.0;  // (grad L)^T Delta for the adopted direction
  double step_norm = 0.0;  // ||Delta||
  double a_x = 0.0;
  double feas_norm = 0.0;        // ||(c; w)||
  double merit_grad_norm = 0.0;  // ||grad L||
  bool sqp_solvable = false;
  DirectionDiag sqp_diag;
  bool batch_capped = false;  // merit batch hit max_batch
};

struct RunTrace {
  RunStatus status = RunStatus::MaxIters;
  std::vector<IterationRecord> records;
  Iterate final_iterate;
  double terminal_kkt_residual = 0.0;
  double terminal_alpha = 0.0;
  double eps_final = 0.0;
  double nu_final = 0.0;
  double delta_final = 0.0;
  std::int64_t total_samples = 0;
  int iterations = 0;
};

}  // namespace stosqp
