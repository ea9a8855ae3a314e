#pragma once

#include <cmath>
#include <cstdint>

namespace spiked::rng {

// 64-bit mix finalizer of SplitMix64 (Steele, Lea & Flood, "Fast splittable
// pseudorandom number generators", OOPSLA 2014; Stafford mix13 constants).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Counter-based generator: the state walks an arithmetic sequence with the
// golden-ratio increment and each output is the mix64 image of the state.
// Streams keyed by (seed, replicate, role) are derived by hashing the key
// into the initial state, so replicate-level draws are independent of worker
// count and scheduling order.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return mix64(state_ += kGolden); }

  // Uniform on (0, 1]; strictly positive so it can feed a logarithm.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via the Box-Muller transform; two uniforms produce two
  // normals, the second is cached.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum class StreamRole : std::uint64_t {
  signal = 1,  // spike coordinates (Z1 / z)
  noise = 2,   // pure-noise block Z2
  goe = 3,     // symmetric-ensemble entries
};

inline SplitMix64 replicate_stream(std::uint64_t seed, std::uint64_t replicate_index,
                                   StreamRole role) {
  std::uint64_t h = mix64(seed + kGolden * (replicate_index + 1));
  h = mix64(h ^ (static_cast<std::uint64_t>(role) + 0xD1B54A32D192ED03ULL));
  return SplitMix64(h);
}

}  // namespace spiked::rng
