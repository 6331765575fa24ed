#include "symidx/init.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "symidx/dynamics.hpp"

namespace symidx {

InitDraw init_weights(const StudentSpec& student, Rng& rng) {
  const int M = student.width();
  if (M < 1 || student.depth() < 1) throw ValidationError("init_weights: student has no feature matrix");
  InitDraw draw;
  for (;;) {
    CVector w(M);
    for (int m = 0; m < M; ++m) w[m] = rng.complex_normal();
    const double norm_Aw = (student.A() * w).norm();
    if (norm_Aw < 1e-12) {
      if (++draw.resamples > 64) throw NumericalError("init_weights: ||Aw|| vanished repeatedly");
      continue;
    }
    draw.w_norm = w.norm();
    draw.norm_Aw = norm_Aw;
    draw.w0 = w / norm_Aw;
    return draw;
  }
}

double projection_deficiency(const StudentSpec& student, const CVector& h_star) {
  if (std::abs(h_star.norm() - 1.0) > 1e-12) throw ValidationError("projection_deficiency: ||h*|| != 1");
  if (h_star.size() > student.depth()) throw RegimeError("projection_deficiency: h* longer than K");
  const double res = range_residual(range_basis(student.A()), h_star);
  return std::clamp(res, 0.0, 1.0);
}

VandermondeReport vandermonde_diagnostics(const CVector& frozen, int N) {
  const auto M = frozen.size();
  if (N < 1) throw ValidationError("vandermonde_diagnostics: N must be >= 1");
  if (M <= N) throw ValidationError("vandermonde_diagnostics: need M > N");
  CMatrix X(N, M);
  for (Eigen::Index m = 0; m < M; ++m) {
    cplx power = frozen[m];
    for (int n = 0; n < N; ++n) {
      X(n, m) = power;
      power *= frozen[m];
    }
  }
  const CMatrix gram = X * X.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
  const RVector ev = eig.eigenvalues();
  VandermondeReport out;
  out.sigma1 = std::sqrt(std::max(ev[N - 1], 0.0));
  out.sigmaN = std::sqrt(std::max(ev[0], 0.0));

  std::vector<double> angles(static_cast<std::size_t>(M));
  for (Eigen::Index m = 0; m < M; ++m) angles[static_cast<std::size_t>(m)] = std::arg(frozen[m]);
  std::sort(angles.begin(), angles.end());
  for (std::size_t i = 1; i < angles.size(); ++i)
    if (angles[i] - angles[i - 1] < 1e-12) ++out.duplicates;
  if (angles.size() > 1 && angles.front() + 2.0 * std::numbers::pi - angles.back() < 1e-12) ++out.duplicates;
  return out;
}

InitReport init_stats(const InitDraw& draw, const StudentSpec& student, const TeacherSpec& teacher) {
  const double delta = projection_deficiency(student, teacher.h_star);
  const SummaryStats st = summary_from_weights(draw.w0, student, teacher, delta);
  InitReport rep;
  rep.r0 = st.r;
  rep.cos_s_theta0 = st.cos_s_theta;
  rep.v0 = st.v;
  rep.delta = delta;
  rep.norm_Aw_pre_normalization = draw.norm_Aw;
  rep.w_norm = draw.w_norm;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rep.sigma1_X = nan;
  rep.sigmaN_X = nan;
  const int N = teacher.dimension;
  if (student.frozen_weights().size() > N && N >= 1) {
    const VandermondeReport vd = vandermonde_diagnostics(student.frozen_weights(), N);
    rep.sigma1_X = vd.sigma1;
    rep.sigmaN_X = vd.sigmaN;
  }
  rep.predicted_r0_lower = nan;
  if (const auto& act = student.activation(); act && act->sigma_plus > 0.0)
    rep.predicted_r0_lower = act->sigma_minus / (act->sigma_plus * std::sqrt(static_cast<double>(student.width())));
  return rep;
}

}  // namespace symidx
