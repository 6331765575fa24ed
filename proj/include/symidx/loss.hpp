#pragma once

#include <string>
#include <vector>

#include "symidx/core.hpp"
#include "symidx/cue.hpp"
#include "symidx/linalg.hpp"
#include "symidx/model.hpp"

namespace symidx {

/// L uses the single-monomial student link g; Lhat reuses the teacher link f.
enum class LossKind { L, Lhat };

LossKind parse_loss_kind(const std::string& name);
std::string loss_kind_name(LossKind kind);

struct LossValue {
  double total = 0.0;
  double correlation_term = 0.0;
  double regularizer_term = 0.0;
  double correlation_stderr = 0.0;  // zero for closed-form population values
};

/// m = <Aw, h*> = sum_k (Aw)_k conj(h*_k).
cplx correlation(const CVector& features, const CVector& h_star);

/// Closed forms valid under the teacher's support assumption (RegimeError otherwise).
///   L    = -Re(conj(alpha_s) scale m^s) + |alpha_s|/2 ||Aw||^{2s}
///   Lhat = sum_j |alpha_j|^2 (-Re m^j + ||Aw||^{2j} / 2),  j = 1..floor(sqrt N)
/// With scale = alpha_s/|alpha_s| the first reduces to -|alpha_s| Re m^s + ...
LossValue population_loss_L(const CVector& w, const StudentSpec& student, const TeacherSpec& teacher);
LossValue population_loss_Lhat(const CVector& w, const StudentSpec& student, const TeacherSpec& teacher);
LossValue population_loss(LossKind kind, const CVector& w, const StudentSpec& student,
                          const TeacherSpec& teacher);

/// Exact regularizer R(||Aw||^2) and the slope rho with grad_w R = rho A^dagger A w.
double regularizer_value(LossKind kind, double norm2, const TeacherSpec& teacher);
double regularizer_slope(LossKind kind, double norm2, const TeacherSpec& teacher);

/// Powersum features of a fixed batch together with the teacher's labels.
struct FeatureBatch {
  CMatrix powersums;       // n x K, row i = p(x_i)
  CVector teacher_values;  // F(x_i)
  std::size_t size() const { return static_cast<std::size_t>(powersums.rows()); }
};

FeatureBatch make_feature_batch(const std::vector<SpectrumSample>& samples, const TeacherSpec& teacher,
                                int K);

/// Per-sample correlation -Re(F_i conj(link(z_i))) averaged over the batch.
/// `weights` (filled when requested) holds q_i = F_i conj(link'(z_i)): if
/// z = D c then the Wirtinger gradient of the mean term in c is -D^dagger q / n.
struct CorrelationEval {
  double mean = 0.0;
  double std_error = 0.0;
  CVector weights;
};

CorrelationEval evaluate_correlation(LossKind kind, const CVector& z, const CVector& teacher_values,
                                     const StudentSpec& student, const TeacherSpec& teacher,
                                     bool want_weights);

LossValue empirical_loss_L(const CVector& w, const StudentSpec& student, const TeacherSpec& teacher,
                           const FeatureBatch& batch);
LossValue empirical_loss_Lhat(const CVector& w, const StudentSpec& student, const TeacherSpec& teacher,
                              const FeatureBatch& batch);
LossValue empirical_loss(LossKind kind, const CVector& w, const StudentSpec& student,
                         const TeacherSpec& teacher, const FeatureBatch& batch);
/// Convenience overload building the feature batch on the fly.
LossValue empirical_loss_L(const CVector& w, const StudentSpec& student, const TeacherSpec& teacher,
                           const std::vector<SpectrumSample>& samples);

/// Gradient in feature coordinates: a K-vector g with grad_w = A^dagger g.
/// `batch == nullptr` selects the population closed form.
CVector feature_gradient(LossKind kind, const CVector& features, const StudentSpec& student,
                         const TeacherSpec& teacher, const FeatureBatch* batch);

/// Wirtinger gradient grad_{w_R} + i grad_{w_C} = 2 d/d(conj w).
CVector wirtinger_gradient(LossKind kind, const CVector& w, const StudentSpec& student,
                           const TeacherSpec& teacher, const FeatureBatch* batch = nullptr);
inline CVector wirtinger_gradient_L(const CVector& w, const StudentSpec& student,
                                    const TeacherSpec& teacher, const FeatureBatch* batch = nullptr) {
  return wirtinger_gradient(LossKind::L, w, student, teacher, batch);
}

/// pinv(A^dagger A), cached on the student.
inline const Preconditioner& preconditioner(const StudentSpec& student) { return student.preconditioner(); }

}  // namespace symidx
