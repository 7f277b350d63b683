#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace psrl {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

/// Seeded random source. Uniform and categorical draws are computed from raw
/// engine output so sequences do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Index drawn with probability proportional to `weights` (non-negative).
  int categorical(std::span<const double> weights);

  /// Gamma(shape, 1) variate.
  double gamma(double shape);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace psrl
