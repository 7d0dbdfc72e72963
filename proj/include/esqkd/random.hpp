#pragma once

#include <cstdint>
#include <random>

namespace esqkd {

// Deterministic uniform stream. The double conversion is done by hand so the
// stream does not depend on the standard library's distribution code.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed for sub-stream `index` of `parent`. Serial and concurrent execution
// that address streams by index see identical values.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept;

}  // namespace esqkd
