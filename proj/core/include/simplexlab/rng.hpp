#pragma once

#include <cstdint>

namespace simplexlab {

// splitmix64: tiny, portable, and stable across platforms, so seeded
// experiment output is byte-identical everywhere. All randomness in the
// library and the CLI derives from this generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // -1 or +1 with equal probability.
  double sign() { return (next() & 1) ? 1.0 : -1.0; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  // Derive an independent stream (for per-task seeding).
  SplitMix64 fork(std::uint64_t tag) {
    SplitMix64 d(state_ ^ (0x9e3779b97f4a7c15ULL * (tag + 1)));
    d.next();
    return d;
  }

 private:
  std::uint64_t state_;
};

}  // namespace simplexlab
