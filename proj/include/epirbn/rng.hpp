#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace epirbn {

// Finalizer step of the splitmix64 generator. Used as the seed-mixing
// primitive so derived streams are decorrelated from the base seed and
// from each other.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Derives the seed of one labelled stream from a base seed and a list of
// integer components (tags, sweep indices, run indices). The mapping is
// fixed: the same components always yield the same seed, and results never
// depend on scheduling or on how many workers execute the runs.
inline std::uint64_t mix_seed(std::uint64_t base,
                              std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p + 0x9E3779B97F4A7C15ull));
  return h;
}

// Deterministic random stream. Wraps mt19937_64 with draw helpers that do
// not go through std::*_distribution, whose algorithms are
// implementation-defined; every draw here is fully specified, so identical
// seeds give identical streams on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Unbiased integer in [0, n). Rejection sampling on the top of the range.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  int index(std::size_t n) { return static_cast<int>(below(n)); }

  // Uniform double in [0, 1) with 53 bits of precision.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool coin() { return (next() >> 63) != 0; }

  bool bernoulli(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace epirbn
