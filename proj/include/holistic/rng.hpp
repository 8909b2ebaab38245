#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace holistic {

/// Seeded generator with platform-independent draws: the standard library
/// distributions are implementation-defined, so every variate here is built
/// directly from the 64-bit Mersenne Twister output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, one variate cached).
  double normal();
  /// Uniform index in [0, n).
  std::size_t index(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

/// Counter-based child seed (splitmix64 finalizer), so per-trial streams do
/// not depend on scheduling order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter);

}  // namespace holistic
