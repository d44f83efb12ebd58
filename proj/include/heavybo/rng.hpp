#pragma once

#include <cstdint>
#include <initializer_list>

namespace heavybo {

/// SplitMix64 finalizer; used for seeding and for hashing seed coordinates.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Deterministically mixes a master seed with a list of coordinates
/// (stream ids, cell coordinates, trial indices) into a child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) noexcept;

/// Bit pattern of a double, for hashing real-valued coordinates.
std::uint64_t double_bits(double v) noexcept;

/// xoshiro256** keyed by (seed, stream). Every variate is produced by
/// portable arithmetic so the same key yields the same sequence on any
/// platform. Not thread-safe; give each worker its own stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1).
  double uniform_open() noexcept;
  /// -1 or +1 with equal probability.
  int sign() noexcept;
  double normal() noexcept;
  /// Gamma(shape, 1) variate; Marsaglia-Tsang with the U^{1/a} boost for shape < 1.
  double gamma(double shape) noexcept;

 private:
  std::uint64_t s_[4];
};

}  // namespace heavybo
