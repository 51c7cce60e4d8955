#include <algorithm>
#include <cmath>
#include <vector>

#include "stosqp/kernels.hpp"

namespace stosqp::kernels {

namespace detail {

// Partial sums of one chunk [begin, end) in sample order.
void accumulate_chunk(const rng::CounterNormal& gen, const NoiseLayout& layout, std::int64_t begin,
                      std::int64_t end, double* partial) {
  const std::int64_t stride = layout.stride();
  const std::int64_t width = layout.width();
  std::fill(partial, partial + width, 0.0);
  for (std::int64_t k = begin; k < end; ++k) {
    const std::uint64_t base = static_cast<std::uint64_t>(k * stride);
    for (std::int64_t j = 0; j < width; ++j) partial[j] += gen(base + static_cast<std::uint64_t>(j));
  }
}

}  // namespace detail

void accumulate_noise_serial(const rng::CounterNormal& gen, const NoiseLayout& layout, std::int64_t n,
                             std::span<double> out) {
  const std::int64_t width = layout.width();
  std::fill(out.begin(), out.begin() + width, 0.0);
  std::vector<double> partial(static_cast<std::size_t>(width));
  for (std::int64_t begin = 0; begin < n; begin += kChunkSamples) {
    detail::accumulate_chunk(gen, layout, begin, std::min(n, begin + kChunkSamples), partial.data());
    for (std::int64_t j = 0; j < width; ++j) out[static_cast<std::size_t>(j)] += partial[static_cast<std::size_t>(j)];
  }
}

void aggregate_noise(const rng::CounterNormal& gen, const NoiseLayout& layout, std::int64_t n,
                     std::span<double> out) {
  const double scale = std::sqrt(static_cast<double>(n));
  for (std::int64_t j = 0; j < layout.width(); ++j)
    out[static_cast<std::size_t>(j)] = scale * gen(static_cast<std::uint64_t>(j));
}

}  // namespace stosqp::kernels
