#include "symidx/loss.hpp"

#include <cmath>

#include "symidx/sympoly.hpp"

namespace symidx {

namespace {

void require_support(const TeacherSpec& teacher) {
  if (!teacher.satisfies_support())
    throw RegimeError("population loss: teacher must be supported on the first floor(sqrt N) degrees/indices");
}

void require_shapes(const CVector& w, const StudentSpec& student, const TeacherSpec& teacher) {
  if (w.size() != student.width()) throw ValidationError("loss: weight dimension mismatch");
  if (teacher.h_star.size() > student.depth())
    throw ValidationError("loss: h* is longer than the feature truncation K");
}

// Lhat regularizer runs over j = 1..floor(sqrt N).
int lhat_degree(const TeacherSpec& teacher) {
  return std::min<int>(isqrt(teacher.dimension), static_cast<int>(teacher.alphas.size()));
}

}  // namespace

LossKind parse_loss_kind(const std::string& name) {
  if (name == "L") return LossKind::L;
  if (name == "Lhat") return LossKind::Lhat;
  throw ValidationError("unknown loss '" + name + "' (expected L or Lhat)");
}

std::string loss_kind_name(LossKind kind) { return kind == LossKind::L ? "L" : "Lhat"; }

cplx correlation(const CVector& features, const CVector& h_star) { return coeff_inner(features, h_star); }

double regularizer_value(LossKind kind, double norm2, const TeacherSpec& teacher) {
  if (kind == LossKind::L) {
    const int s = teacher.info_exponent;
    return 0.5 * std::abs(teacher.alpha_s()) * ipow(norm2, s);
  }
  double acc = 0.0;
  for (int j = 1; j <= lhat_degree(teacher); ++j) acc += 0.5 * std::norm(teacher.alphas[j - 1]) * ipow(norm2, j);
  return acc;
}

double regularizer_slope(LossKind kind, double norm2, const TeacherSpec& teacher) {
  if (kind == LossKind::L) {
    const int s = teacher.info_exponent;
    return s * std::abs(teacher.alpha_s()) * ipow(norm2, s - 1);
  }
  double acc = 0.0;
  for (int j = 1; j <= lhat_degree(teacher); ++j)
    acc += j * std::norm(teacher.alphas[j - 1]) * ipow(norm2, j - 1);
  return acc;
}

LossValue population_loss_L(const CVector& w, const StudentSpec& student, const TeacherSpec& teacher) {
  require_shapes(w, student, teacher);
  require_support(teacher);
  const CVector u = student.A() * w;
  const cplx m = correlation(u, teacher.h_star);
  const int s = teacher.info_exponent;
  LossValue out;
  out.correlation_term = -(std::conj(teacher.alpha_s()) * student.link_scale() * ipow(m, s)).real();
  out.regularizer_term = regularizer_value(LossKind::L, u.squaredNorm(), teacher);
  out.total = out.correlation_term + out.regularizer_term;
  return out;
}

LossValue population_loss_Lhat(const CVector& w, const StudentSpec& student, const TeacherSpec& teacher) {
  require_shapes(w, student, teacher);
  require_support(teacher);
  const CVector u = student.A() * w;
  const cplx m = correlation(u, teacher.h_star);
  LossValue out;
  cplx power{1.0, 0.0};
  for (Eigen::Index j = 1; j <= teacher.alphas.size(); ++j) {
    power *= m;
    out.correlation_term -= std::norm(teacher.alphas[j - 1]) * power.real();
  }
  out.regularizer_term = regularizer_value(LossKind::Lhat, u.squaredNorm(), teacher);
  out.total = out.correlation_term + out.regularizer_term;
  return out;
}

LossValue population_loss(LossKind kind, const CVector& w, const StudentSpec& student,
                          const TeacherSpec& teacher) {
  return kind == LossKind::L ? population_loss_L(w, student, teacher)
                             : population_loss_Lhat(w, student, teacher);
}

FeatureBatch make_feature_batch(const std::vector<SpectrumSample>& samples, const TeacherSpec& teacher,
                                int K) {
  if (samples.empty()) throw ValidationError("feature batch: empty sample batch");
  if (K < teacher.h_star.size()) throw ValidationError("feature batch: K shorter than h*");
  FeatureBatch batch;
  batch.powersums.resize(static_cast<Eigen::Index>(samples.size()), K);
  batch.teacher_values.resize(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const PowersumVector p = powersum_vector(samples[i].points, K);
    const auto row = static_cast<Eigen::Index>(i);
    batch.powersums.row(row) = p.values.transpose();
    batch.teacher_values[row] = teacher_eval_features(teacher, p.values);
  }
  return batch;
}

CorrelationEval evaluate_correlation(LossKind kind, const CVector& z, const CVector& teacher_values,
                                     const StudentSpec& student, const TeacherSpec& teacher,
                                     bool want_weights) {
  const Eigen::Index n = z.size();
  if (n == 0) throw ValidationError("empirical loss: empty batch");
  if (teacher_values.size() != n) throw ValidationError("empirical loss: label count mismatch");
  CorrelationEval out;
  if (want_weights) out.weights.resize(n);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx F = teacher_values[i];
    cplx value;
    cplx slope;
    if (kind == LossKind::L) {
      value = student.link(z[i]);
      if (want_weights) slope = student.link_derivative(z[i]);
    } else {
      value = link_value(teacher.alphas, z[i]);
      if (want_weights) slope = link_derivative(teacher.alphas, z[i]);
    }
    const double term = -(F * std::conj(value)).real();
    sum += term;
    sum_sq += term * term;
    if (want_weights) out.weights[i] = F * std::conj(slope);
  }
  const auto count = static_cast<double>(n);
  out.mean = sum / count;
  if (n > 1) {
    const double var = std::max(0.0, (sum_sq - count * out.mean * out.mean) / (count - 1.0));
    out.std_error = std::sqrt(var / count);
  }
  return out;
}

LossValue empirical_loss(LossKind kind, const CVector& w, const StudentSpec& student,
                         const TeacherSpec& teacher, const FeatureBatch& batch) {
  if (w.size() != student.width()) throw ValidationError("empirical loss: weight dimension mismatch");
  if (batch.size() == 0) throw ValidationError("empirical loss: empty batch");
  if (batch.powersums.cols() != student.depth())
    throw ValidationError("empirical loss: batch depth differs from K");
  const CVector u = student.A() * w;
  const CVector z = batch.powersums * u;
  const CorrelationEval corr = evaluate_correlation(kind, z, batch.teacher_values, student, teacher, false);
  LossValue out;
  out.correlation_term = corr.mean;
  out.correlation_stderr = corr.std_error;
  out.regularizer_term = regularizer_value(kind, u.squaredNorm(), teacher);
  out.total = out.correlation_term + out.regularizer_term;
  return out;
}

LossValue empirical_loss_L(const CVector& w, const StudentSpec& student, const TeacherSpec& teacher,
                           const FeatureBatch& batch) {
  return empirical_loss(LossKind::L, w, student, teacher, batch);
}

LossValue empirical_loss_Lhat(const CVector& w, const StudentSpec& student, const TeacherSpec& teacher,
                              const FeatureBatch& batch) {
  return empirical_loss(LossKind::Lhat, w, student, teacher, batch);
}

LossValue empirical_loss_L(const CVector& w, const StudentSpec& student, const TeacherSpec& teacher,
                           const std::vector<SpectrumSample>& samples) {
  return empirical_loss_L(w, student, teacher, make_feature_batch(samples, teacher, student.depth()));
}

CVector feature_gradient(LossKind kind, const CVector& u, const StudentSpec& student,
                         const TeacherSpec& teacher, const FeatureBatch* batch) {
  const Eigen::Index K = student.depth();
  if (u.size() != K) throw ValidationError("feature_gradient: feature dimension mismatch");
  CVector g = regularizer_slope(kind, u.squaredNorm(), teacher) * u;
  if (batch == nullptr) {
    require_support(teacher);
    const cplx m = correlation(u, teacher.h_star);
    cplx coeff{0.0, 0.0};
    if (kind == LossKind::L) {
      const int s = teacher.info_exponent;
      coeff = teacher.alpha_s() * std::conj(student.link_scale()) * static_cast<double>(s) *
              ipow(std::conj(m), s - 1);
    } else {
      cplx power{1.0, 0.0};  // conj(m)^{j-1}
      for (Eigen::Index j = 1; j <= teacher.alphas.size(); ++j) {
        coeff += std::norm(teacher.alphas[j - 1]) * static_cast<double>(j) * power;
        power *= std::conj(m);
      }
    }
    g.head(teacher.h_star.size()) -= coeff * teacher.h_star;
    return g;
  }
  if (batch->powersums.cols() != K) throw ValidationError("feature_gradient: batch depth differs from K");
  const CVector z = batch->powersums * u;
  const CorrelationEval corr = evaluate_correlation(kind, z, batch->teacher_values, student, teacher, true);
  g.noalias() -= (batch->powersums.adjoint() * corr.weights) / static_cast<double>(batch->size());
  return g;
}

CVector wirtinger_gradient(LossKind kind, const CVector& w, const StudentSpec& student,
                           const TeacherSpec& teacher, const FeatureBatch* batch) {
  require_shapes(w, student, teacher);
  const CVector u = student.A() * w;
  return student.A().adjoint() * feature_gradient(kind, u, student, teacher, batch);
}

}  // namespace symidx
