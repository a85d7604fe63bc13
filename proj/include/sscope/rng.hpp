#ifndef SSCOPE_RNG_HPP
#define SSCOPE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace sscope {

/// Counter-based pseudo-random stream. Output i of stream (seed, stream_id)
/// is a pure function of (seed, stream_id, i), so independent streams can be
/// consumed from any thread or in any order without changing the numbers
/// drawn. The generator is the SplitMix64 finalizer over a per-stream base
/// plus a golden-ratio counter increment.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream_id = 0)
      : base_(mix(seed ^ mix(stream_id + 0x1FULL))) {}

  std::uint64_t next_u64() { return mix(base_ + (++counter_) * kGamma); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1].
  double uniform_open() { return 1.0 - uniform(); }

  /// Standard normal via Box-Muller (one value per two uniforms).
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z += kGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace sscope

#endif
