#include <algorithm>
#include <vector>

#include <omp.h>

#include "stosqp/kernels.hpp"

namespace stosqp::kernels {

namespace detail {
void accumulate_chunk(const rng::CounterNormal& gen, const NoiseLayout& layout, std::int64_t begin,
                      std::int64_t end, double* partial);
}

void accumulate_noise_parallel(const rng::CounterNormal& gen, const NoiseLayout& layout, std::int64_t n,
                               std::span<double> out) {
  const std::int64_t width = layout.width();
  const std::int64_t chunks = (n + kChunkSamples - 1) / kChunkSamples;
  if (chunks <= 1) {
    accumulate_noise_serial(gen, layout, n, out);
    return;
  }
  std::vector<double> partials(static_cast<std::size_t>(chunks * width));

#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::int64_t begin = c * kChunkSamples;
    detail::accumulate_chunk(gen, layout, begin, std::min(n, begin + kChunkSamples),
                             partials.data() + c * width);
  }

  // combine in chunk order so the result matches the serial reduction bit for bit
  std::fill(out.begin(), out.begin() + width, 0.0);
  for (std::int64_t c = 0; c < chunks; ++c) {
    for (std::int64_t j = 0; j < width; ++j)
      out[static_cast<std::size_t>(j)] += partials[static_cast<std::size_t>(c * width + j)];
  }
}

}  // namespace stosqp::kernels
