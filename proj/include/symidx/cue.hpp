#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "symidx/core.hpp"
#include "symidx/rng.hpp"

namespace symidx {

/// Where a sample's randomness came from.
struct SeedPath {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  int retries = 0;  // degenerate Gaussian draws that were redrawn
};

/// One draw from the squared Vandermonde law on (S^1)^N.
struct SpectrumSample {
  CVector points;
  SeedPath seed_path;
};

/// Haar unitary via Gaussian QR with the phases of diag(R) divided out.
/// `retries` (optional) counts numerically rank-deficient Gaussian draws that were redrawn.
CMatrix haar_unitary(int N, Rng& rng, int* retries = nullptr);

/// Eigenvalues of a Haar unitary, projected onto the unit circle.
SpectrumSample sample_cue(int N, Rng& rng);

/// `count` independent samples; sample i uses Rng(seed, i), so batches are
/// deterministic, order-stable and prefix-consistent.
std::vector<SpectrumSample> sample_batch(int N, std::size_t count, std::uint64_t seed);

/// CSV with header `re_1,im_1,...,re_N,im_N`, shortest round-trip formatting.
void write_samples_csv(std::ostream& out, const std::vector<SpectrumSample>& samples);
std::vector<SpectrumSample> read_samples_csv(std::istream& in);

}  // namespace symidx
