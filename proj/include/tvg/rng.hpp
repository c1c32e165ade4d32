#ifndef TVG_RNG_HPP
#define TVG_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace tvg {

// splitmix64 finalizer; decorrelates nearby seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Root seed -> per-component subseed via fixed-label hashing, so adding a
// component never perturbs the streams of existing ones.
inline std::uint64_t split_seed(std::uint64_t root, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return mix64(root ^ mix64(h));
}

inline std::mt19937_64 make_rng(std::uint64_t root, std::string_view label) {
  return std::mt19937_64(split_seed(root, label));
}

// Uniform double in [0, 1) from 53 random bits; stable across platforms.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace tvg

#endif  // TVG_RNG_HPP
