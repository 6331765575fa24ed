#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "symidx/core.hpp"
#include "symidx/linalg.hpp"
#include "symidx/rng.hpp"

namespace symidx {

enum class ActivationKind { Arctan, Experiment, Custom };

/// Truncated power series sigma(z) = sum_{k=1}^K c_k z^k.
struct ActivationSpec {
  std::string name;
  ActivationKind kind = ActivationKind::Custom;
  double param = 0.0;  // xi for arctan, (N-1)/N for experiment, unused for custom
  int dimension = 0;   // N
  CVector coeffs;      // coeffs[k-1] = c_k
  double sigma_plus = 0.0;   // max_{1<=k<=min(N,K)} |c_k| sqrt(k)
  double sigma_minus = 0.0;  // min_{1<=k<=floor(sqrt N)} |c_k| sqrt(k)
  double tail_bound = 0.0;   // analytic bound on sum_{k>K} k |c_k|^2, NaN if unknown

  int depth() const { return static_cast<int>(coeffs.size()); }
  cplx coefficient(int k) const { return coeffs[k - 1]; }
  /// Truncated series at z.
  cplx evaluate_series(cplx z) const;
  /// Untruncated closed form where one exists (arctan only).
  std::optional<cplx> evaluate_closed_form(cplx z) const;
};

/// sigma(z) = arctan(xi z) + xi z arctan(xi z), xi = 1 - 1/sqrt(N).
ActivationSpec arctan_activation(int N, int K);
/// c_k = q^k / sqrt(k) with q = (N-1)/N, so that A_{km} = q^k a_m^k.
ActivationSpec experiment_activation(int N, int K);
/// Arbitrary coefficient list c_1..c_K. Validated like the named activations.
ActivationSpec custom_activation(int N, const CVector& coeffs);
/// Rebuild a named activation from (name, param, N, K); used by deserialization.
ActivationSpec make_activation(const std::string& name, int N, int K, const CVector& custom_coeffs = {});

/// Teacher F(x) = f(<h*, p(x)>) with f(z) = sum_j alpha_j z^j / sqrt(j!).
struct TeacherSpec {
  CVector h_star;   // unit norm
  CVector alphas;   // alphas[j-1] = alpha_j
  int info_exponent = 1;
  int dimension = 0;  // N

  cplx alpha_s() const { return alphas[info_exponent - 1]; }
  /// h* and f both supported on the first floor(sqrt N) indices/degrees.
  bool satisfies_support() const;
};

/// Validates ||h*|| = 1 (1e-12) and that some alpha_j is nonzero.
TeacherSpec make_teacher(const CVector& h_star, const CVector& alphas, int N);

/// h* uniform on the complex unit sphere of the first floor(sqrt N) coordinates.
CVector random_h_star(int N, Rng& rng);
/// alpha_3 = alpha_4 = alpha_5 = 1/sqrt(3).
CVector experiment_alphas();
/// Frozen first-layer weights a_m uniform on the circle.
CVector uniform_frozen_weights(int M, Rng& rng);

/// Smallest j >= 1 with |alpha_j| > 1e-14. Throws ValidationError if none.
int information_exponent(const CVector& alphas);

/// f(z) and f'(z) for a normalized monomial expansion.
cplx link_value(const CVector& alphas, cplx z);
cplx link_derivative(const CVector& alphas, cplx z);

/// How the student link g(z) = scale z^s / sqrt(s!) picks its scale.
///  Theory: scale = alpha_s / |alpha_s|.
///  Experiment: scale = 1 (the student coefficient alpha_s is set to 1).
enum class LinkConvention { Theory, Experiment };

/// DeepSets student with frozen first and third layers, as the linear map
/// w -> A w into powersum coordinates (A_{km} = c_k sqrt(k) a_m^k).
class StudentSpec {
 public:
  StudentSpec() = default;

  const CVector& frozen_weights() const { return frozen_; }
  const CMatrix& A() const { return A_; }
  int width() const { return static_cast<int>(A_.cols()); }
  int depth() const { return static_cast<int>(A_.rows()); }
  const std::optional<ActivationSpec>& activation() const { return activation_; }

  cplx link_scale() const { return link_scale_; }
  int link_exponent() const { return link_exponent_; }
  /// g(z) and g'(z).
  cplx link(cplx z) const;
  cplx link_derivative(cplx z) const;

  /// Computed on first use and shared by copies.
  const Preconditioner& preconditioner() const;

  friend StudentSpec build_A(const ActivationSpec& act, const CVector& frozen, int K);
  friend StudentSpec student_from_matrix(const CMatrix& A);
  friend void attach_link(StudentSpec& student, const TeacherSpec& teacher, LinkConvention convention);
  friend void set_link(StudentSpec& student, cplx scale, int exponent);

 private:
  struct Cache {
    std::once_flag once;
    std::unique_ptr<Preconditioner> pre;
  };

  CVector frozen_;
  CMatrix A_;
  std::optional<ActivationSpec> activation_;
  cplx link_scale_{1.0, 0.0};
  int link_exponent_ = 1;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// Closed-form A. Frozen weights must lie on the circle within 1e-9; K <= act.depth().
StudentSpec build_A(const ActivationSpec& act, const CVector& frozen, int K);
/// Student over an explicit feature matrix (no activation or frozen weights).
StudentSpec student_from_matrix(const CMatrix& A);
void attach_link(StudentSpec& student, const TeacherSpec& teacher,
                 LinkConvention convention = LinkConvention::Theory);
void set_link(StudentSpec& student, cplx scale, int exponent);

cplx teacher_eval(const TeacherSpec& teacher, const CVector& x);
/// Teacher from precomputed powersums (values.size() >= h_star.size()).
cplx teacher_eval_features(const TeacherSpec& teacher, const CVector& powersums);

/// Feature route g(sum_k (Aw)_k p_k(x)).
cplx student_eval(const StudentSpec& student, const CVector& w, const CVector& x);
/// Direct route g(sum_m w_m Phi_m(x)), Phi_m(x) = sum_n sigma(a_m x_n), with sigma
/// either the truncated series or its closed form. Needs an activation-built student.
cplx student_eval_direct(const StudentSpec& student, const CVector& w, const CVector& x,
                         bool closed_form = false);

}  // namespace symidx
