#pragma once

#include <initializer_list>

#include "symidx/core.hpp"

namespace symidx {

inline CVector vec(std::initializer_list<cplx> values) {
  CVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (cplx x : values) v[i++] = x;
  return v;
}

inline CVector unit_vector(Eigen::Index n, Eigen::Index index) {
  CVector v = CVector::Zero(n);
  v[index] = 1.0;
  return v;
}

inline bool close(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }
inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline double rel_err(const CVector& a, const CVector& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

}  // namespace symidx

#include <vector>

#include "symidx/cue.hpp"

namespace symidx {

/// One large N = 25 batch shared by the statistical tests (sampled on first use).
inline const std::vector<SpectrumSample>& shared_batch_25() {
  static const std::vector<SpectrumSample> batch = sample_batch(25, 200000, 20250101);
  return batch;
}

inline std::vector<SpectrumSample> head(const std::vector<SpectrumSample>& batch, std::size_t n) {
  return {batch.begin(), batch.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace symidx
