#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace wornet {

/// Deterministic random stream. All draws go through hand-rolled conversions
/// so that a given seed produces the same sequence on every platform; the
/// std distribution objects are implementation-defined and never used.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  static uint64_t mix(uint64_t a, uint64_t b) {
    // splitmix64 finalizer over the combined word
    uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Independent stream for (seed, stream id); used for per-sample generation.
  static Rng derive(uint64_t seed, uint64_t stream) { return Rng(mix(seed, stream)); }

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], inclusive.
  long uniform_int(long lo, long hi) {
    const uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
    const uint64_t v = static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * range) >> 64);
    return lo + static_cast<long>(v);
  }

  /// Standard normal via Box-Muller; second value cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace wornet
