#pragma once

#include "symidx/core.hpp"

namespace symidx {

/// Pseudoinverse of the Gram matrix A^dagger A, built from a thin SVD of A.
///
/// With A = U S V^dagger restricted to singular values above
/// rel_cutoff * s_max, pinv(A^dagger A) = V S^-2 V^dagger and the range projector
/// is P_A = U U^dagger. The factors are kept so callers can apply
/// pinv(A^dagger A) A^dagger = V S^-1 U^dagger without squaring the condition number.
struct Preconditioner {
  CMatrix pinv_gram;     // M x M
  CMatrix range_basis;   // K x rank, orthonormal columns spanning range(A)
  CMatrix coeff_map;     // M x rank, V S^-1
  RVector singular_values;  // all singular values of A, descending
  int rank = 0;
  double rel_cutoff = 1e-12;

  /// P_A = A pinv(A^dagger A) A^dagger as a dense K x K matrix.
  CMatrix projector() const { return range_basis * range_basis.adjoint(); }
};

Preconditioner compute_preconditioner(const CMatrix& A, double rel_cutoff = 1e-12);

/// min_w ||A w - h||^2 through the rank-revealing factorization in `pre`.
/// `h` is zero-padded to A's row count.
double least_squares_residual(const Preconditioner& pre, const CVector& h);

/// Orthonormal basis of range(A) from a thin SVD with the same relative cutoff,
/// without forming any M x M factor.
CMatrix range_basis(const CMatrix& A, double rel_cutoff = 1e-12);
/// ||h - U U^dagger h||^2 for an orthonormal basis U (h zero-padded).
double range_residual(const CMatrix& basis, const CVector& h);

}  // namespace symidx
