#pragma once

#include "symidx/core.hpp"
#include "symidx/model.hpp"
#include "symidx/rng.hpp"

namespace symidx {

struct InitReport {
  double r0 = 0.0;
  double cos_s_theta0 = 0.0;
  double v0 = 0.0;
  double delta = 0.0;
  double norm_Aw_pre_normalization = 0.0;
  double sigma1_X = 0.0;  // NaN when the student has no frozen weights or M <= N
  double sigmaN_X = 0.0;
  double w_norm = 0.0;    // ||w|| before normalization
  double predicted_r0_lower = 0.0;  // sigma_- / (sigma_+ sqrt M), NaN without an activation
};

struct InitDraw {
  CVector w0;
  double w_norm = 0.0;
  double norm_Aw = 0.0;  // before normalization
  int resamples = 0;
};

/// w ~ standard complex Gaussian (E|w_m|^2 = 1), w0 = w / ||A w||.
InitDraw init_weights(const StudentSpec& student, Rng& rng);

/// min_w ||A w - h*||^2 = 1 - ||P_A h*||^2, clamped to [0, 1].
double projection_deficiency(const StudentSpec& student, const CVector& h_star);

struct VandermondeReport {
  double sigma1 = 0.0;
  double sigmaN = 0.0;
  int duplicates = 0;  // pairs of frozen weights closer than 1e-12
};

/// Extreme singular values of X_{nm} = a_m^n, n = 1..N. Requires M > N.
VandermondeReport vandermonde_diagnostics(const CVector& frozen, int N);

InitReport init_stats(const InitDraw& draw, const StudentSpec& student, const TeacherSpec& teacher);

}  // namespace symidx
