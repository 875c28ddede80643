#pragma once

#include <cmath>
#include <cstdint>
#include <random>

// Seeded randomness helpers. std::mt19937_64 output is pinned by the
// standard, but the std distributions are not; every sampler here is a
// fixed algorithm so identical seeds give identical streams on any
// platform or thread count.

namespace stack3d::rng {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Independent engine for (seed, stream); distinct streams never collide
// in practice since the seed is whitened through splitmix64.
inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  std::uint64_t s = seed ^ (0xA0761D6478BD642FULL * (stream + 1));
  return Engine(splitmix64(s));
}

inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_below(Engine& eng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % n;
}

inline int uniform_int(Engine& eng, int lo, int hi) {  // inclusive range
  return lo + static_cast<int>(uniform_below(
                  eng, static_cast<std::uint64_t>(hi - lo + 1)));
}

inline bool coin(Engine& eng) { return (eng() & 1u) != 0; }

inline int poisson(Engine& eng, double lambda) {
  if (lambda <= 0.0) return 0;
  if (lambda < 30.0) {
    // Knuth multiplication method
    const double limit = std::exp(-lambda);
    double p = 1.0;
    int k = 0;
    do {
      p *= uniform01(eng);
      ++k;
    } while (p > limit);
    return k - 1;
  }
  // sum of exponential inter-arrival times
  double t = 0.0;
  int k = 0;
  while (true) {
    t += -std::log(1.0 - uniform01(eng));
    if (t > lambda) return k;
    ++k;
  }
}

inline double normal(Engine& eng, double mu = 0.0, double sigma = 1.0) {
  // Box-Muller, no caching so draw count stays predictable
  double u1 = 1.0 - uniform01(eng);
  double u2 = uniform01(eng);
  double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
  return mu + sigma * z;
}

// Marsaglia-Tsang; shape < 1 handled by the boost identity.
inline double gamma(Engine& eng, double shape, double scale) {
  if (shape < 1.0) {
    double u = uniform01(eng);
    return gamma(eng, shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = normal(eng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = uniform01(eng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
  }
}

}  // namespace stack3d::rng
