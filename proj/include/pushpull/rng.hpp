#pragma once

#include <cmath>
#include <cstdint>

namespace pushpull {

// Counter-based random stream keyed by (seed, agent, iteration). Draw k of a
// stream is a pure function of the key and k, so results do not depend on
// which thread evaluates which agent. Based on the splitmix64 generator.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t agent, std::uint64_t iteration)
      : state_(mix(mix(mix(seed + kGamma) ^ (agent + kAgentSalt)) ^ (iteration + kIterSalt))) {}

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (cosine branch; two uniforms per draw).
  double next_gaussian() {
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t next_index(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kAgentSalt = 0xBF58476D1CE4E5B9ull;
  static constexpr std::uint64_t kIterSalt = 0x94D049BB133111EBull;
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace pushpull
