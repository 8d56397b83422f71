#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace rsac {

/// Small deterministic generator (splitmix64). Everything seeded in this
/// project goes through it so outputs are reproducible across platforms,
/// which std::shuffle / std::normal_distribution do not guarantee.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased (rejection).
  uint32_t next_below(uint32_t n) {
    if (n <= 1) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return static_cast<uint32_t>(v % n);
  }

  /// Standard normal via Box-Muller.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

private:
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes a seed with a counter so independent streams can be derived from
/// one user-facing seed (one stream per frame, per scene, ...).
inline uint64_t mix_seed(uint64_t seed, uint64_t counter) {
  SplitMix64 g(seed ^ (0x632be59bd9b4e019ULL + counter * 0x9e3779b97f4a7c15ULL));
  return g.next();
}

/// Fisher-Yates permutation of {0..n-1} for the given (seed, counter) stream.
inline std::vector<int> seeded_permutation(uint64_t seed, uint64_t counter, int n) {
  std::vector<int> p(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
  SplitMix64 g(mix_seed(seed, counter));
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(g.next_below(static_cast<uint32_t>(i + 1)));
    std::swap(p[static_cast<size_t>(i)], p[static_cast<size_t>(j)]);
  }
  return p;
}

} // namespace rsac
