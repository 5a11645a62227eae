#pragma once

#include <cmath>
#include <cstdint>

namespace sadiv {

// Counter-based generator: the value of draw #i depends only on (key, i), so
// parallel consumers that derive disjoint streams get bitwise-reproducible
// sequences regardless of thread scheduling.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ (stream * kGolden + 0x9e3779b97f4a7c15ull))) {}

  // Independent substream; derived streams with distinct ids never collide
  // with the parent or each other in practice.
  CounterRng derive(std::uint64_t stream_id) const {
    CounterRng child(0);
    child.key_ = mix(key_ + (stream_id + 1) * kGolden);
    child.counter_ = 0;
    return child;
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

  // Uniform in (0, 1): 53-bit mantissa, never exactly 0 or 1.
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_exponential() { return -std::log(next_double()); }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Multiply-shift; bias is < 2^-53 for the n used here (n <= a few thousand).
    return static_cast<std::uint64_t>(next_double() * static_cast<double>(n)) % n;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

  // splitmix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace sadiv
