#pragma once

#include <cstdint>

namespace opgrowth {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based stream: the n-th draw of cell `cell` under `seed` is a pure
// function of the triple, so sweeps give the same numbers regardless of
// scheduling. Uniforms are built from 53 bits directly so results do not
// depend on the standard library's distribution implementations.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t cell) : key_(splitmix64(seed ^ splitmix64(cell + 0x5851F42D4C957F2DULL))) {}

  std::uint64_t next_u64() { return splitmix64(key_ ^ splitmix64(counter_++)); }
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace opgrowth
