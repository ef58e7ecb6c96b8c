#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace los {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Run seed for (base_seed, stream_count, repeat_index). Documented so sweep
// runs can be reproduced piecemeal: seed = mix(mix(base ^ mix(streams)) ^ mix(repeat)).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream_count,
                                 std::uint64_t repeat_index) {
  return splitmix64(splitmix64(base ^ splitmix64(stream_count)) ^ splitmix64(repeat_index));
}

// Deterministic RNG. mt19937_64 supplies bits; the uniform/gaussian transforms
// are implemented here instead of <random> distributions so the stream does not
// depend on the standard library implementation.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(uniform01() * static_cast<double>(n)) % n;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller, no cached spare: two uniforms per draw, fully deterministic.
  double gaussian(double mean, double stddev) {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + stddev * z;
  }

private:
  std::mt19937_64 engine_;
};

} // namespace los
