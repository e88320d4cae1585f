#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace naturerisk::rng {

// Sub-seed derivation. Every random consumer in the engine receives its seed
// through this scheme so that a single CLI-level seed reproduces any module
// in isolation: sub_seed = splitmix64(master ^ golden-ratio-scrambled stream).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream));
}

// Uniform double in (0, 1] from a 64-bit engine draw. The +1 keeps log()
// finite.
inline double uniform_open0(std::mt19937_64& engine) {
  return static_cast<double>((engine() >> 11) + 1) * 0x1.0p-53;
}

// Uniform double in [0, 1).
inline double uniform_halfopen(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller, two engine draws per variate, no caching of
// the companion value. Fixed consumption order keeps sampler streams
// reproducible independent of call sites.
inline double standard_normal(std::mt19937_64& engine) {
  const double u1 = uniform_open0(engine);
  const double u2 = uniform_halfopen(engine);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace naturerisk::rng
