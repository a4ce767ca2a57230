#pragma once

#include <cstdint>

namespace thetadim {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream seed for grid cell `cell` of an experiment seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t cell) {
  return splitmix64(splitmix64(seed) ^ splitmix64(cell + 0x632be59bd9b4e019ULL));
}

}  // namespace thetadim
