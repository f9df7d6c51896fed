#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ombrl {

using Rng = std::mt19937_64;

// Stream tags keep independent consumers of one experiment seed apart.
enum class Stream : std::uint64_t {
  InitialState = 1,
  ProcessNoise = 2,
  Planner = 3,
  RolloutNoise = 4,
  Candidates = 5,
  Synthetic = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(base);
  for (const std::uint64_t p : parts) h = splitmix64(h ^ p);
  return h;
}

inline Rng make_rng(std::uint64_t base, Stream stream, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = derive_seed(base, {static_cast<std::uint64_t>(stream)});
  for (const std::uint64_t p : parts) h = splitmix64(h ^ p);
  return Rng(h);
}

}  // namespace ombrl
