#pragma once

#include <cstdint>
#include <random>

namespace ds {

/// Derives an independent RNG stream from a master seed and up to three
/// stream coordinates (e.g. step, source index, sample index). Mixing is
/// splitmix64, so streams are order-independent: synthesizing sample (j,i)
/// gives the same bytes no matter which worker runs it.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t a = 0, uint64_t b = 0, uint64_t c = 0) {
  uint64_t s = mix64(master ^ 0xd1b54a32d192ed03ull);
  s = mix64(s ^ a);
  s = mix64(s ^ (b + 0x8cb92ba72f3d8dd7ull));
  s = mix64(s ^ (c + 0x2545f4914f6cdd1dull));
  return s;
}

using Rng = std::mt19937_64;

inline Rng make_rng(uint64_t master, uint64_t a = 0, uint64_t b = 0, uint64_t c = 0) {
  return Rng(derive_seed(master, a, b, c));
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi_inclusive) {
  return std::uniform_int_distribution<int>(lo, hi_inclusive)(rng);
}

inline double normal(Rng& rng, double mean, double stddev) {
  return std::normal_distribution<double>(mean, stddev)(rng);
}

} // namespace ds
