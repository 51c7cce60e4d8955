#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace stosqp::rng {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based standard normal generator.
///
/// Every draw is a pure function of (seed, stream, counter, index), so any
/// subset of draws can be generated in any order, on any thread, and still
/// reproduce the same values.
class CounterNormal {
 public:
  CounterNormal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept
      : key_(splitmix64(splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL)) ^
                        (counter * 0x8cb92ba72f3d8dd7ULL))) {}

  /// Box-Muller on two hashed uniforms.
  [[nodiscard]] double operator()(std::uint64_t index) const noexcept {
    const std::uint64_t h1 = splitmix64(key_ + 2 * index * 0x9e3779b97f4a7c15ULL);
    const std::uint64_t h2 = splitmix64(key_ + (2 * index + 1) * 0x9e3779b97f4a7c15ULL);
    // u1 in (0, 1], u2 in [0, 1)
    const double u1 = (static_cast<double>(h1 >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace stosqp::rng
