#pragma once

#include <cstdint>

namespace safemap {

/// Counter-based generator.
///
/// Stream contract: draw number n (0-based) of stream (seed, stream_id) is
///   splitmix64(key + (n + 1) * 0x9E3779B97F4A7C15)
/// where key = splitmix64(seed ^ splitmix64(stream_id)). Every value is a
/// pure function of (seed, stream_id, n), so replays are bit-identical on any
/// platform with IEEE doubles. Uniform doubles take the top 53 bits; normals
/// use Box-Muller on two consecutive uniforms (one normal per pair).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace safemap
