#include "symidx/linalg.hpp"

#include <Eigen/SVD>

namespace symidx {

namespace {

int numerical_rank(const RVector& sv, double rel_cutoff) {
  const double smax = sv.size() ? sv[0] : 0.0;
  int rank = 0;
  while (rank < sv.size() && sv[rank] > rel_cutoff * smax) ++rank;
  return rank;
}

}  // namespace

Preconditioner compute_preconditioner(const CMatrix& A, double rel_cutoff) {
  if (A.rows() == 0 || A.cols() == 0) throw ValidationError("preconditioner: empty matrix");
  Eigen::BDCSVD<CMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Preconditioner pre;
  pre.rel_cutoff = rel_cutoff;
  pre.singular_values = svd.singularValues();
  const int rank = numerical_rank(pre.singular_values, rel_cutoff);
  pre.rank = rank;
  const CMatrix& U = svd.matrixU();
  const CMatrix& V = svd.matrixV();
  pre.range_basis = U.leftCols(rank);
  pre.coeff_map = V.leftCols(rank);
  for (int j = 0; j < rank; ++j) pre.coeff_map.col(j) /= pre.singular_values[j];
  pre.pinv_gram = pre.coeff_map * pre.coeff_map.adjoint();
  return pre;
}

CMatrix range_basis(const CMatrix& A, double rel_cutoff) {
  if (A.rows() == 0 || A.cols() == 0) throw ValidationError("range_basis: empty matrix");
  Eigen::BDCSVD<CMatrix> svd(A, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(numerical_rank(svd.singularValues(), rel_cutoff));
}

double least_squares_residual(const Preconditioner& pre, const CVector& h) {
  return range_residual(pre.range_basis, h);
}

double range_residual(const CMatrix& basis, const CVector& h) {
  const Eigen::Index K = basis.rows();
  if (h.size() > K) {
    for (Eigen::Index i = K; i < h.size(); ++i)
      if (h[i] != cplx{0.0, 0.0})
        throw ValidationError("least_squares_residual: target longer than the matrix row count");
  }
  CVector target = CVector::Zero(K);
  target.head(std::min(K, h.size())) = h.head(std::min(K, h.size()));
  const CVector residual = target - basis * (basis.adjoint() * target);
  return residual.squaredNorm();
}

}  // namespace symidx
