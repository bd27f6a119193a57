#pragma once

#include <cstdint>
#include <random>

namespace wssp {

// Reproducible random source.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The conversions to doubles and bounded integers are done here
// rather than through std::uniform_*_distribution, whose algorithms are
// implementation-defined, so a given seed yields the same stream on every
// platform and standard library.
class Rng {
 public:
  static constexpr const char* kGeneratorId = "mt19937_64/u53";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finaliser, used to derive independent sub-stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return mix_seed(base ^ mix_seed(tag));
}

}  // namespace wssp
