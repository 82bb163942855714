#pragma once

#include <cstdint>
#include <limits>

namespace imputereg {

/// SplitMix64 output function (Steele, Lea & Flood finalizer).
std::uint64_t mix64(std::uint64_t x);

/// Seed of replication b under base_seed. A counter-based hash, so every
/// replication owns an independent stream regardless of execution order.
std::uint64_t replication_seed(std::uint64_t base_seed, std::uint64_t replication);

/// xoshiro256** generator, state expanded from a 64-bit seed with SplitMix64.
/// Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on the open interval (0, 1): ((x >> 11) + 0.5) * 2^-53.
  double uniform();
  /// Standard normal by inversion of a uniform draw (one draw per normal).
  double normal();
  /// 1 with probability prob, using one uniform draw.
  double bernoulli(double prob) { return uniform() < prob ? 1.0 : 0.0; }

 private:
  std::uint64_t s_[4];
};

}  // namespace imputereg
