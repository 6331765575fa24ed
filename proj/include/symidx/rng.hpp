#pragma once

#include <cstdint>
#include <random>

#include "symidx/core.hpp"

namespace symidx {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream `stream` of base seed `seed`. Pure function, platform independent.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded generator with a documented lineage.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the standard, and
/// builds uniforms and normals from raw 64-bit words by hand so draws are
/// bit-identical across standard library implementations. A generator is
/// identified by (seed, stream); the engine is seeded with derive_seed(seed, stream).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard real normal (Box-Muller, pairs cached).
  double normal();
  /// Standard complex normal: real and imaginary parts N(0, 1/2), E|z|^2 = 1.
  cplx complex_normal();
  /// Uniform point on the unit circle, angle ~ U[0, 2pi).
  cplx unit_circle();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace symidx
