#pragma once

#include <cstdint>

#include "stosqp/problem.hpp"

namespace stosqp {

enum class SamplingMode {
  /// Batch means drawn from their exact Gaussian law (cost independent of n).
  Aggregated,
  /// n individual samples summed by the OpenMP kernel.
  Explicit,
};

/// Additive Gaussian noise on f, grad f (covariance sigma2 (I + 11^T)) and hess f
/// (entrywise variance sigma2, then symmetrized).
struct NoiseModel {
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
  SamplingMode mode = SamplingMode::Aggregated;
};

/// Selects an independent random stream; `counter` is typically the iteration.
struct SampleKey {
  std::uint64_t stream = 0;
  std::uint64_t counter = 0;
};

struct OracleBatch {
  std::int64_t n = 1;
  double fbar = 0.0;
  Vec gradbar;
  Mat hessbar;  // empty when sampled without the Hessian
};

/// Means of n i.i.d. noisy samples of (f, grad f, hess f) at x.
/// Throws std::domain_error when x has non-finite entries or n < 1.
OracleBatch sample_batch(const ProblemDef& problem, const NoiseModel& noise, const Vec& x, std::int64_t n,
                         SampleKey key, bool with_hessian = true);

/// Noise-free values packaged as a batch.
OracleBatch exact_batch(const ProblemDef& problem, const Vec& x, bool with_hessian = true);

}  // namespace stosqp
