#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace homing {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; decorrelates nearby integer seeds before they reach
// the Mersenne Twister.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream for one episode. Campaigns use episode seed = master + index.
inline Rng episode_rng(std::uint64_t episode_seed) { return Rng(mix_seed(episode_seed)); }

/// Stream keyed by two integers (e.g. training batch and episode slot).
inline Rng keyed_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return Rng(mix_seed(mix_seed(mix_seed(seed) ^ a) ^ (b + 0x632be59bd9b4e019ULL)));
}

// Uniform draw on [lo, hi]. Uses generate_canonical so the result does not
// depend on the standard library's distribution implementation.
inline double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return lo + (hi - lo) * std::generate_canonical<double, 64>(rng);
}

inline double standard_normal(Rng& rng) {
  // Box-Muller, one draw discarded.
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  double u1 = std::generate_canonical<double, 64>(rng);
  double u2 = std::generate_canonical<double, 64>(rng);
  if (u1 <= 0.0) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace homing
