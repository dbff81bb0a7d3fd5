#pragma once

#include <cmath>
#include <cstdint>

#include "cogc/errors.hpp"

// Counter-based random number generation. Every draw in the library is
// addressed by (seed, stream, a, b, counter), so any single round, trial or
// matrix entry can be regenerated in isolation and Monte Carlo shards can use
// disjoint counter ranges without sharing mutable state.

namespace cogc::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Stream identifiers, one per random-consuming subsystem.
enum Stream : std::uint64_t {
  kCodeEntries = 1,  // parity-matrix entries of a cyclic code
  kLinks = 2,        // per-round connectivity draws
  kData = 3,         // synthetic dataset generation
  kBatch = 4,        // minibatch index sampling
  kTrial = 5,        // Monte Carlo trial payloads
  kMask = 6,         // random erasure masks
};

// splitmix64 finalizer; full-avalanche mix of one word.
inline std::uint64_t mix(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t word(std::uint64_t seed, std::uint64_t stream, std::uint64_t a = 0,
                          std::uint64_t b = 0, std::uint64_t counter = 0) {
  std::uint64_t h = mix(seed ^ 0x6a09e667f3bcc909ULL);
  h = mix(h ^ stream);
  h = mix(h ^ a);
  h = mix(h ^ b);
  return mix(h ^ counter);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double to_unit(std::uint64_t w) { return static_cast<double>(w >> 11) * 0x1.0p-53; }

inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t a = 0,
                      std::uint64_t b = 0, std::uint64_t counter = 0) {
  return to_unit(word(seed, stream, a, b, counter));
}

// Bernoulli success indicator with failure probability p: P(result == 0) = p.
inline int bernoulli_up(double p, std::uint64_t seed, std::uint64_t stream, std::uint64_t a,
                        std::uint64_t b, std::uint64_t counter) {
  return uniform(seed, stream, a, b, counter) >= p ? 1 : 0;
}

// Standard normal at a fixed address; consumes counters (2i, 2i+1).
inline double normal_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b,
                        std::uint64_t index = 0) {
  const std::uint64_t w1 = word(seed, stream, a, b, 2 * index);
  const std::uint64_t w2 = word(seed, stream, a, b, 2 * index + 1);
  const double u1 = (static_cast<double>(w1 >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = to_unit(w2);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Stateful view over one stream for variable-length consumers
// (rejection sampling, shuffles). Still fully determined by its address.
class Sequence {
 public:
  Sequence(std::uint64_t seed, std::uint64_t stream, std::uint64_t a = 0, std::uint64_t b = 0)
      : seed_(seed), stream_(stream), a_(a), b_(b) {}

  double uniform() { return rng::uniform(seed_, stream_, a_, b_, next_++); }

  double uniform_open() {  // (0, 1]
    const std::uint64_t w = word(seed_, stream_, a_, b_, next_++);
    return (static_cast<double>(w >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  // Marsaglia-Tsang gamma sampler, shape > 0, unit scale.
  double gamma(double shape) {
    require(shape > 0.0, ErrorCode::invalid_input, "gamma: shape must be positive");
    if (shape < 1.0) {
      const double boost = std::pow(uniform_open(), 1.0 / shape);
      return gamma(shape + 1.0) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double x = normal();
      const double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      const double v = t * t * t;
      const double u = uniform_open();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  std::uint64_t seed_, stream_, a_, b_;
  std::uint64_t next_ = 0;
};

}  // namespace cogc::rng
