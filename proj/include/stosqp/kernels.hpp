#pragma once

// Noise accumulation kernels for explicit (per-sample) batch estimation.
//
// A batch of n samples needs, per sample, one scalar draw for f, d + 1 draws
// for the gradient (z plus the shared s of the I + 11^T covariance) and d*d
// draws for the Hessian. The kernels sum these raw standard normals over the
// batch. Samples are reduced in fixed-size chunks and chunk partials are
// combined in chunk order, so the serial and OpenMP versions return
// bit-identical sums regardless of thread count.

#include <cstdint>
#include <span>

#include "stosqp/rng.hpp"

namespace stosqp::kernels {

inline constexpr std::int64_t kChunkSamples = 4096;

struct NoiseLayout {
  int dim = 0;
  bool with_hessian = true;

  /// Draw slots reserved per sample; Hessian slots are reserved even when skipped
  /// so the draw indices of f and the gradient do not depend on `with_hessian`.
  [[nodiscard]] std::int64_t stride() const { return 2 + dim + static_cast<std::int64_t>(dim) * dim; }
  /// Number of accumulated entries actually written.
  [[nodiscard]] std::int64_t width() const {
    return 2 + dim + (with_hessian ? static_cast<std::int64_t>(dim) * dim : 0);
  }
};

/// Reference implementation: plain loop over chunks.
void accumulate_noise_serial(const rng::CounterNormal& gen, const NoiseLayout& layout, std::int64_t n,
                             std::span<double> out);

/// OpenMP version; bit-identical to the serial one.
void accumulate_noise_parallel(const rng::CounterNormal& gen, const NoiseLayout& layout, std::int64_t n,
                               std::span<double> out);

/// Sum of n i.i.d. standard normals per slot, drawn directly as sqrt(n) * z.
/// Exact in distribution for Gaussian noise and O(1) in n.
void aggregate_noise(const rng::CounterNormal& gen, const NoiseLayout& layout, std::int64_t n,
                     std::span<double> out);

}  // namespace stosqp::kernels
