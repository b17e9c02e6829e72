#pragma once

#include <cstdint>
#include <random>

namespace pireg::detail {

// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

enum Stream : std::uint64_t {
  stream_init = 1,
  stream_shuffle = 2,
  stream_dropout = 3,
  stream_noise = 4,
  stream_split = 5,
  stream_search = 6,
  stream_trial = 7,
  stream_collocation = 8,
  stream_points = 9,
  stream_replicate = 10,
};

}  // namespace pireg::detail
