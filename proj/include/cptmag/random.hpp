#pragma once

#include <cstdint>
#include <random>

namespace cptmag {

// Explicit random stream: every stochastic operation takes one of these by
// reference. No global RNG state anywhere in the library.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(mix(seed)) {}

  // Stream for ensemble member `run_index` of a campaign seeded with
  // `master_seed`. Derived through a SplitMix64 step so that neighbouring
  // run indices give statistically independent streams.
  static RngStream for_run(std::uint64_t master_seed, std::uint64_t run_index) {
    return RngStream(mix(master_seed) ^ mix(0x9e3779b97f4a7c15ULL + run_index));
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  long binomial(long n, double p) {
    if (n <= 0) return 0;
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    return std::binomial_distribution<long>(n, p)(engine_);
  }

  std::uint64_t raw() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace cptmag
