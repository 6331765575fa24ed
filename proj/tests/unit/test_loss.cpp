#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"
#include "symidx/loss.hpp"

using namespace symidx;

namespace {

struct Setup {
  TeacherSpec teacher;
  StudentSpec student;
};

Setup random_setup(Rng& rng, int N, int M, int K, const CVector& alphas, const std::string& act = "experiment") {
  Setup s;
  s.teacher = make_teacher(random_h_star(N, rng), alphas, N);
  s.student = build_A(make_activation(act, N, K), uniform_frozen_weights(M, rng), K);
  attach_link(s.student, s.teacher);
  return s;
}

CVector unit_feature_weights(const StudentSpec& st, Rng& rng, double target_norm = 1.0) {
  CVector w(st.width());
  for (auto& e : w) e = rng.complex_normal();
  return w * (target_norm / (st.A() * w).norm());
}

// Central differences on real and imaginary parts: grad_R + i grad_C.
template <typename F>
CVector finite_difference(const F& f, const CVector& w, double h = 1e-5) {
  CVector g(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    CVector a = w, b = w;
    a[i] += h;
    b[i] -= h;
    const double dr = (f(a) - f(b)) / (2 * h);
    a = w;
    b = w;
    a[i] += cplx(0, h);
    b[i] -= cplx(0, h);
    const double di = (f(a) - f(b)) / (2 * h);
    g[i] = cplx(dr, di);
  }
  return g;
}

CVector random_alphas(Rng& rng, int N) {
  CVector a(isqrt(N));
  for (auto& e : a) e = rng.complex_normal();
  if (rng.uniform() < 0.5) a[0] = 0.0;
  return a;
}

}  // namespace

TEST_CASE("loss kind names") {
  CHECK(parse_loss_kind("L") == LossKind::L);
  CHECK(parse_loss_kind("Lhat") == LossKind::Lhat);
  CHECK(loss_kind_name(LossKind::Lhat) == "Lhat");
  CHECK_THROWS_AS(parse_loss_kind("l2"), ValidationError);
}

TEST_CASE("population L closed form") {
  StudentSpec id = student_from_matrix(CMatrix::Identity(5, 5));
  for (int s = 1; s <= 3; ++s) {
    CVector alphas = CVector::Zero(s);
    alphas[s - 1] = cplx(0.6, 0.8);
    const TeacherSpec t = make_teacher(unit_vector(5, 1), alphas, 25);
    attach_link(id, t);
    const LossValue at_star = population_loss_L(unit_vector(5, 1), id, t);
    CHECK(close(at_star.total, -0.5, 1e-15));
    CHECK(close(at_star.total, at_star.correlation_term + at_star.regularizer_term, 1e-12));
    CHECK(population_loss_L(CVector::Zero(5), id, t).total == 0.0);
  }
}

TEST_CASE("population Lhat closed form") {
  StudentSpec id = student_from_matrix(CMatrix::Identity(5, 5));
  const TeacherSpec t = make_teacher(unit_vector(5, 0), experiment_alphas(), 25);
  attach_link(id, t);
  const double minimum = -0.5 * experiment_alphas().squaredNorm();
  CHECK(close(population_loss_Lhat(unit_vector(5, 0), id, t).total, minimum, 1e-15));
  CHECK(population_loss_Lhat(CVector::Zero(5), id, t).total == 0.0);
  const CVector rotated = std::polar(1.0, 2.0 * std::numbers::pi / 3.0) * unit_vector(5, 0);
  CHECK(population_loss_Lhat(rotated, id, t).total > minimum + 0.1);
  CHECK(close(population_loss_L(rotated, id, t).total, population_loss_L(unit_vector(5, 0), id, t).total, 1e-12));
}

TEST_CASE("population losses reject teachers outside the support") {
  StudentSpec id = student_from_matrix(CMatrix::Identity(6, 6));
  const TeacherSpec t = make_teacher(unit_vector(6, 5), vec({1}), 25);
  attach_link(id, t);
  CHECK_THROWS_AS(population_loss_L(unit_vector(6, 0), id, t), RegimeError);
  CHECK_THROWS_AS(wirtinger_gradient(LossKind::L, unit_vector(6, 0), id, t), RegimeError);
}

TEST_CASE("property: Lhat is minimized at r = 1, theta = 0, v = 0") {
  StudentSpec id = student_from_matrix(CMatrix::Identity(6, 6));
  const TeacherSpec t = make_teacher(unit_vector(6, 0), experiment_alphas(), 25);
  attach_link(id, t);
  double best = INFINITY;
  double best_r = -1, best_theta = -1, best_v = -1;
  for (int ir = 0; ir <= 120; ++ir) {
    for (int it = 0; it < 629; ++it) {
      for (int iv = 0; iv <= 6; ++iv) {
        const double r = 0.01 * ir, theta = 0.01 * it, v = 0.05 * iv;
        CVector w = CVector::Zero(6);
        w[0] = std::polar(r, theta);
        w[1] = std::sqrt(v);
        const double value = population_loss_Lhat(w, id, t).total;
        if (value < best) {
          best = value;
          best_r = r;
          best_theta = theta;
          best_v = v;
        }
      }
    }
  }
  CHECK(best_r == doctest::Approx(1.0));
  CHECK(best_theta == 0.0);
  CHECK(best_v == 0.0);
}

TEST_CASE("regularizers") {
  const TeacherSpec t = make_teacher(unit_vector(5, 0), experiment_alphas(), 25);
  const double a = 1.0 / std::sqrt(3.0);
  CHECK(close(regularizer_value(LossKind::L, 2.0, t), a / 2 * 8.0, 1e-14));
  CHECK(close(regularizer_slope(LossKind::L, 2.0, t), 3 * a * 4.0, 1e-14));
  CHECK(close(regularizer_value(LossKind::Lhat, 2.0, t), (8.0 + 16.0 + 32.0) / 6.0, 1e-13));
}

TEST_CASE("property: population Wirtinger gradients match finite differences") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int N = trial % 2 == 0 ? 25 : 16;
    const Setup s = random_setup(rng, N, 6 + trial % 5, 2 * N, random_alphas(rng, N),
                                 trial % 3 == 0 ? "arctan" : "experiment");
    for (LossKind kind : {LossKind::L, LossKind::Lhat}) {
      const CVector w = unit_feature_weights(s.student, rng, 0.5 + rng.uniform());
      const CVector g = wirtinger_gradient(kind, w, s.student, s.teacher);
      const CVector fd = finite_difference(
          [&](const CVector& x) { return population_loss(kind, x, s.student, s.teacher).total; }, w);
      INFO("trial " << trial << " kind " << loss_kind_name(kind));
      CHECK(rel_err(g, fd) <= 1e-6);
    }
  }
}

TEST_CASE("property: empirical Wirtinger gradients match finite differences") {
  Rng rng(32);
  const auto samples = head(shared_batch_25(), 10000);
  for (int trial = 0; trial < 6; ++trial) {
    const Setup s = random_setup(rng, 25, 8, 30, random_alphas(rng, 25));
    const FeatureBatch batch = make_feature_batch(samples, s.teacher, 30);
    for (LossKind kind : {LossKind::L, LossKind::Lhat}) {
      const CVector w = unit_feature_weights(s.student, rng);
      const CVector g = wirtinger_gradient(kind, w, s.student, s.teacher, &batch);
      const CVector fd = finite_difference(
          [&](const CVector& x) { return empirical_loss(kind, x, s.student, s.teacher, batch).total; }, w);
      CHECK(rel_err(g, fd) <= 1e-6);
    }
  }
}

TEST_CASE("gradient vanishes at the global optimum") {
  StudentSpec id = student_from_matrix(CMatrix::Identity(5, 5));
  const TeacherSpec t = make_teacher(unit_vector(5, 2), experiment_alphas(), 25);
  attach_link(id, t);
  const CVector g = wirtinger_gradient(LossKind::L, unit_vector(5, 2), id, t);
  const Preconditioner& pre = preconditioner(id);
  CHECK((id.A() * (pre.pinv_gram * g)).norm() < 1e-14);
}

TEST_CASE("population and empirical losses agree") {
  Rng rng(33);
  const Setup s = random_setup(rng, 25, 20, 60, experiment_alphas());
  const CVector w = unit_feature_weights(s.student, rng);
  const double pop = population_loss_L(w, s.student, s.teacher).correlation_term;
  double previous_stderr = INFINITY;
  for (std::size_t n : {1000u, 10000u, 100000u, 200000u}) {
    const LossValue emp = empirical_loss_L(w, s.student, s.teacher, head(shared_batch_25(), n));
    INFO("n = " << n);
    CHECK(std::abs(emp.correlation_term - pop) <= 3.0 * emp.correlation_stderr);
    CHECK(emp.correlation_stderr < previous_stderr);
    CHECK(close(emp.total, emp.correlation_term + emp.regularizer_term, 1e-12));
    if (n == 10000u || n == 100000u) CHECK(previous_stderr / emp.correlation_stderr > 2.0);
    previous_stderr = emp.correlation_stderr;
  }
  const LossValue one = empirical_loss_L(CVector::Zero(20), s.student, s.teacher, head(shared_batch_25(), 1));
  CHECK(one.correlation_term == 0.0);
  CHECK(one.total == 0.0);
  CHECK_THROWS_AS(empirical_loss_L(w, s.student, s.teacher, std::vector<SpectrumSample>{}), ValidationError);
}

TEST_CASE("preconditioner") {
  const StudentSpec id = student_from_matrix(CMatrix::Identity(4, 4));
  CHECK((preconditioner(id).pinv_gram - CMatrix::Identity(4, 4)).norm() < 1e-15);
  const StudentSpec two = student_from_matrix(2.0 * CMatrix::Identity(4, 4));
  CHECK((preconditioner(two).pinv_gram - 0.25 * CMatrix::Identity(4, 4)).norm() < 1e-15);

  Rng rng(34);
  const Setup s = random_setup(rng, 25, 100, 150, experiment_alphas());
  const Preconditioner& pre = preconditioner(s.student);
  CHECK(&pre == &preconditioner(s.student));
  CHECK((pre.pinv_gram - pre.pinv_gram.adjoint()).norm() <= 1e-10 * pre.pinv_gram.norm());
  const CMatrix P = pre.projector();
  CHECK((P * P - P).norm() < 1e-8);
  CHECK(pre.rank <= 100);

  CMatrix deficient = CMatrix::Zero(3, 2);
  deficient(0, 0) = 1.0;
  deficient(1, 0) = 1.0;
  const Preconditioner dp = compute_preconditioner(deficient);
  CHECK(dp.rank == 1);
  CHECK(close(least_squares_residual(dp, unit_vector(3, 0)), 0.5, 1e-15));
}
