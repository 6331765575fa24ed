#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace symidx {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or configuration (CLI exit code 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Inputs outside the regime where an identity is guaranteed (CLI exit code 1).
class RegimeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Numerical breakdown: non-finite values, step underflow, divergence (CLI exit code 2).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// floor(sqrt(N)) computed exactly for non-negative integers.
inline int isqrt(int n) {
  if (n <= 0) return 0;
  int r = static_cast<int>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Coefficient pairing <a, b> = sum_k a_k conj(b_k); the shorter vector is zero-padded.
inline cplx coeff_inner(const CVector& a, const CVector& b) {
  const Eigen::Index n = std::min(a.size(), b.size());
  cplx acc{0.0, 0.0};
  for (Eigen::Index i = 0; i < n; ++i) acc += a[i] * std::conj(b[i]);
  return acc;
}

/// Integer power by repeated multiplication (ascending, no pow()).
inline cplx ipow(cplx z, int k) {
  cplx acc{1.0, 0.0};
  for (int i = 0; i < k; ++i) acc *= z;
  return acc;
}

inline double ipow(double x, int k) {
  double acc = 1.0;
  for (int i = 0; i < k; ++i) acc *= x;
  return acc;
}

}  // namespace symidx
