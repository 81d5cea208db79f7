#ifndef POFD_RNG_HPP
#define POFD_RNG_HPP

#include <cstdint>
#include <random>

namespace pofd {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of an independent sub-stream, a pure function of (seed, stream).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream ^ 0xD1B54A32D192ED03ULL));
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream) { return Engine(derive_seed(seed, stream)); }

}  // namespace pofd

#endif  // POFD_RNG_HPP
