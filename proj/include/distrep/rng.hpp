#pragma once

#include <cmath>
#include <cstdint>

namespace distrep {

// Splittable counter-based generator (splitmix64 core). Streams are keyed
// by (seed, stream, substream), so any unit of work can construct its own
// generator and the draw sequence is independent of scheduling order.
class KeyedRng {
 public:
  explicit KeyedRng(std::uint64_t seed, std::uint64_t stream = 0,
                    std::uint64_t substream = 0) {
    state_ = mix(seed);
    state_ = mix(state_ ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
    state_ = mix(state_ ^ (0xD1B54A32D192ED03ULL * (substream + 1)));
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform on [0, 1) with 53-bit resolution
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer on [0, n)
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  double normal() {
    // Box-Muller, no cached spare; u1 shifted away from zero
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace distrep
