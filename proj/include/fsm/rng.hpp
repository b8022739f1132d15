#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random streams.  Every variate is a pure function of
// (seed, indices...), so parallel consumers draw identical numbers no matter
// how work is scheduled.  The mixer is the splitmix64 finalizer.

namespace fsm::rng {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t chain(std::uint64_t state, std::uint64_t v) {
  return mix64(state ^ (v + kGolden + (state << 6) + (state >> 2)));
}

// Key for a (seed, a, b, c) counter tuple.
inline std::uint64_t key(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                         std::uint64_t c = 0) {
  return chain(chain(chain(mix64(seed), a), b), c);
}

// Uniform in (0,1]; the +1 keeps log() finite.
inline double uniform_pos(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

// Uniform in [0,1).
inline double uniform01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

struct NormalPair {
  double a, b;
};

// Box-Muller pair derived from one key.
inline NormalPair normal_pair(std::uint64_t k) {
  const double u1 = uniform_pos(mix64(k ^ 0x5bf0'3635'dcf2'd2c9ull));
  const double u2 = uniform01(mix64(k ^ 0x28ae'9d0c'36b0'1b27ull));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 6.283185307179586476925286766559 * u2;
  return {r * std::cos(th), r * std::sin(th)};
}

inline double uniform_range(std::uint64_t k, double lo, double hi) {
  return lo + (hi - lo) * uniform01(mix64(k ^ 0x71c3'799f'4e0f'63b5ull));
}

}  // namespace fsm::rng
