#pragma once

#include <cmath>
#include <cstdint>

namespace seqinv {

// Counter-based random numbers: every variate is a pure function of
// (seed, stream, a, b), so replicates and per-index draws can be generated
// in any order, or in parallel, without changing the output.
//
// Mixing is the splitmix64 finalizer applied to the running key; uniforms
// map the top 53 bits to (0,1]; normals are Box-Muller.
namespace rng {

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix(std::uint64_t z) {
  z += kGamma;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t a, std::uint64_t b) {
  std::uint64_t k = mix(seed);
  k = mix(k ^ stream);
  k = mix(k ^ a);
  k = mix(k ^ b);
  return k;
}

// Uniform on (0,1]: never returns 0, so log(u) is always finite.
inline double to_unit(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t a, std::uint64_t b) {
  return to_unit(key(seed, stream, a, b));
}

inline double normal(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t a, std::uint64_t b) {
  const std::uint64_t k = key(seed, stream, a, b);
  const double u1 = to_unit(k);
  const double u2 = to_unit(mix(k ^ 0xD1B54A32D192ED03ull));
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925286766559 * u2);
}

// Named streams so independent uses of the same seed never collide.
enum Stream : std::uint64_t {
  kSimulate = 1,
  kReplicate = 2,
  kPosteriorDraw = 3,
  kCellSeed = 4,
  kInstance = 5,
};

// Derived sub-seed for experiment cells / replicates.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                            std::uint64_t b = 0) {
  return key(seed, kCellSeed, a, b);
}

}  // namespace rng
}  // namespace seqinv
