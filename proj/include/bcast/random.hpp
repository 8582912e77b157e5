#pragma once

#include <cstdint>
#include <random>

namespace bcast {

using Rng = std::mt19937_64;

// SplitMix64 finalizer, used to key independent streams.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream `index` of master seed `seed`. Streams are a pure function of the
// pair, so a set of trials is identical regardless of how it is scheduled.
inline Rng stream_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(mix64(seed)),
                    static_cast<std::uint32_t>(mix64(seed) >> 32),
                    static_cast<std::uint32_t>(mix64(index ^ 0x5851f42d4c957f2dULL)),
                    static_cast<std::uint32_t>(mix64(index ^ 0x5851f42d4c957f2dULL) >> 32)};
  return Rng(seq);
}

// One draw, uniform on [0,1) with 53 bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// One draw.
inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

// One draw.
inline bool fair_bit(Rng& rng) { return (rng() >> 63) != 0; }

}  // namespace bcast
