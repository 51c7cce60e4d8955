#include "stosqp/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "stosqp/kernels.hpp"

namespace stosqp {

OracleBatch exact_batch(const ProblemDef& problem, const Vec& x, bool with_hessian) {
  OracleBatch out;
  out.n = 1;
  out.fbar = problem.eval_f(x);
  out.gradbar = problem.eval_grad_f(x);
  if (with_hessian) out.hessbar = problem.eval_hess_f(x);
  return out;
}

OracleBatch sample_batch(const ProblemDef& problem, const NoiseModel& noise, const Vec& x, std::int64_t n,
                         SampleKey key, bool with_hessian) {
  if (n < 1) throw std::domain_error("sample_batch: batch size must be >= 1");
  if (!x.allFinite()) throw std::domain_error("sample_batch: non-finite evaluation point");

  OracleBatch out = exact_batch(problem, x, with_hessian);
  out.n = n;
  if (noise.sigma2 == 0.0) return out;

  const int d = problem.dim_x;
  const kernels::NoiseLayout layout{d, with_hessian};
  std::vector<double> sums(static_cast<std::size_t>(layout.width()));
  const rng::CounterNormal gen(noise.seed, key.stream, key.counter);
  switch (noise.mode) {
    case SamplingMode::Aggregated:
      kernels::aggregate_noise(gen, layout, n, sums);
      break;
    case SamplingMode::Explicit:
      kernels::accumulate_noise_parallel(gen, layout, n, sums);
      break;
  }

  // mean noise = sigma * (sum of standard draws) / n
  const double scale = std::sqrt(noise.sigma2) / static_cast<double>(n);
  out.fbar += scale * sums[0];
  const double shared = sums[static_cast<std::size_t>(d) + 1];
  for (int i = 0; i < d; ++i) out.gradbar(i) += scale * (sums[static_cast<std::size_t>(i) + 1] + shared);
  if (with_hessian) {
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> raw(
        sums.data() + d + 2, d, d);
    out.hessbar += (0.5 * scale) * (raw + raw.transpose());
  }
  return out;
}

}  // namespace stosqp
