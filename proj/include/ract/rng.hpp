#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

// Deterministic RNG helpers. std::shuffle and the std distributions are
// unspecified across standard libraries, so every draw that influences a
// model goes through the routines below.
namespace ract::rng {

// splitmix64-style mixer, used to derive independent per-unit seeds
// (per tree, per fold) from one user seed.
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t bounded(std::mt19937_64& g, std::uint64_t n) {
  return n == 0 ? 0 : g() % n;
}

// Uniform draw in [0,1) with 53 random bits.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(bounded(g, i));
    std::swap(v[i - 1], v[j]);
  }
}

// k distinct values from {0,...,n-1} via partial Fisher-Yates, ascending.
inline std::vector<int> sample_without_replacement(int n, int k, std::mt19937_64& g) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  if (k > n) k = n;
  for (int i = 0; i < k; ++i) {
    std::size_t j = static_cast<std::size_t>(i) +
                    static_cast<std::size_t>(bounded(g, static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace ract::rng
