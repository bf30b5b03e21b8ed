#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace destruct {

// Deterministic RNG built on mt19937_64 (fully specified by the standard).
// The double/int mappings are written out by hand because the standard
// library distributions are implementation-defined; every output here is
// bit-identical across platforms for a given (seed, stream).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(mix(seed, stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1) with 53 random bits
  double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // uniform in [-s, s)
  double next_symmetric(double s) { return (2.0 * next_double() - 1.0) * s; }

  // uniform integer in [0, bound), bound >= 1; rejection keeps it unbiased
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  int next_int(int bound) { return static_cast<int>(next_below(static_cast<std::uint64_t>(bound))); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = next_below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  // splitmix64 finalizer; decorrelates (seed, stream) pairs
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace destruct
