#include "symidx/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "symidx/sympoly.hpp"

namespace symidx {

namespace {

constexpr double kZeroThreshold = 1e-14;

void finish_activation(ActivationSpec& act) {
  const int K = act.depth();
  const int N = act.dimension;
  if (K < 1) throw ValidationError("activation: depth must be >= 1");
  if (N < 1) throw ValidationError("activation: N must be >= 1");
  for (int k = 1; k <= K; ++k)
    if (act.coefficient(k) == cplx{0.0, 0.0} || !std::isfinite(std::abs(act.coefficient(k))))
      throw ValidationError("activation " + act.name + ": coefficient c_" + std::to_string(k) +
                            " must be finite and nonzero");
  double plus = 0.0;
  for (int k = 1; k <= std::min(N, K); ++k)
    plus = std::max(plus, std::abs(act.coefficient(k)) * std::sqrt(static_cast<double>(k)));
  double minus = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= std::min(std::max(isqrt(N), 1), K); ++k)
    minus = std::min(minus, std::abs(act.coefficient(k)) * std::sqrt(static_cast<double>(k)));
  act.sigma_plus = plus;
  act.sigma_minus = minus;
  if (!(act.sigma_minus > 0.0) || act.sigma_plus < act.sigma_minus)
    throw ValidationError("activation " + act.name + ": requires sigma_plus >= sigma_minus > 0");
}

}  // namespace

cplx ActivationSpec::evaluate_series(cplx z) const {
  // Horner from the top coefficient.
  cplx acc{0.0, 0.0};
  for (int k = depth(); k >= 1; --k) acc = (acc + coeffs[k - 1]) * z;
  return acc;
}

std::optional<cplx> ActivationSpec::evaluate_closed_form(cplx z) const {
  if (kind != ActivationKind::Arctan) return std::nullopt;
  const cplx u = param * z;
  const cplx at = std::atan(u);
  return at + u * at;
}

ActivationSpec arctan_activation(int N, int K) {
  if (K < 2) throw ValidationError("arctan_activation: K must be >= 2");
  if (N < 2) throw ValidationError("arctan_activation: N must be >= 2 (xi = 0 otherwise)");
  ActivationSpec act;
  act.name = "arctan";
  act.kind = ActivationKind::Arctan;
  act.dimension = N;
  const double xi = 1.0 - 1.0 / std::sqrt(static_cast<double>(N));
  act.param = xi;
  act.coeffs.resize(K);
  for (int k = 1; k <= K; ++k) {
    // c_{2j-1} = (-1)^{j-1} xi^{2j-1}/(2j-1), c_{2j} = (-1)^{j-1} xi^{2j}/(2j-1)
    const int j = (k + 1) / 2;
    const double sign = (j % 2 == 1) ? 1.0 : -1.0;
    act.coeffs[k - 1] = sign * std::pow(xi, k) / (2.0 * j - 1.0);
  }
  act.tail_bound = std::pow(xi, K) / (1.0 - xi);
  finish_activation(act);
  return act;
}

ActivationSpec experiment_activation(int N, int K) {
  if (K < 1) throw ValidationError("experiment_activation: K must be >= 1");
  if (N < 2) throw ValidationError("experiment_activation: N must be >= 2 (q = 0 otherwise)");
  ActivationSpec act;
  act.name = "experiment";
  act.kind = ActivationKind::Experiment;
  act.dimension = N;
  const double q = static_cast<double>(N - 1) / static_cast<double>(N);
  act.param = q;
  act.coeffs.resize(K);
  for (int k = 1; k <= K; ++k) act.coeffs[k - 1] = std::pow(q, k) / std::sqrt(static_cast<double>(k));
  act.tail_bound = std::pow(q, 2 * (K + 1)) / (1.0 - q * q);
  finish_activation(act);
  return act;
}

ActivationSpec custom_activation(int N, const CVector& coeffs) {
  ActivationSpec act;
  act.name = "custom";
  act.kind = ActivationKind::Custom;
  act.dimension = N;
  act.coeffs = coeffs;
  act.tail_bound = std::numeric_limits<double>::quiet_NaN();
  finish_activation(act);
  return act;
}

ActivationSpec make_activation(const std::string& name, int N, int K, const CVector& custom_coeffs) {
  if (name == "arctan") return arctan_activation(N, K);
  if (name == "experiment") return experiment_activation(N, K);
  if (name == "custom") {
    if (custom_coeffs.size() != K) throw ValidationError("custom activation: need exactly K coefficients");
    return custom_activation(N, custom_coeffs);
  }
  throw ValidationError("unknown activation '" + name + "'");
}

bool TeacherSpec::satisfies_support() const {
  const int cut = isqrt(dimension);
  for (Eigen::Index i = cut; i < h_star.size(); ++i)
    if (h_star[i] != cplx{0.0, 0.0}) return false;
  for (Eigen::Index j = cut; j < alphas.size(); ++j)
    if (alphas[j] != cplx{0.0, 0.0}) return false;
  return true;
}

TeacherSpec make_teacher(const CVector& h_star, const CVector& alphas, int N) {
  if (N < 1) throw ValidationError("teacher: N must be >= 1");
  if (h_star.size() < 1) throw ValidationError("teacher: empty h*");
  if (std::abs(h_star.norm() - 1.0) > 1e-12) throw ValidationError("teacher: h* must have unit norm");
  TeacherSpec t;
  t.h_star = h_star;
  t.alphas = alphas;
  t.dimension = N;
  t.info_exponent = information_exponent(alphas);
  return t;
}

CVector random_h_star(int N, Rng& rng) {
  const int d = isqrt(N);
  if (d < 1) throw ValidationError("random_h_star: N must be >= 1");
  CVector h(d);
  for (int i = 0; i < d; ++i) h[i] = rng.complex_normal();
  return h / h.norm();
}

CVector experiment_alphas() {
  CVector a = CVector::Zero(5);
  a[2] = a[3] = a[4] = 1.0 / std::sqrt(3.0);
  return a;
}

CVector uniform_frozen_weights(int M, Rng& rng) {
  if (M < 1) throw ValidationError("uniform_frozen_weights: M must be >= 1");
  CVector a(M);
  for (int m = 0; m < M; ++m) a[m] = rng.unit_circle();
  return a;
}

int information_exponent(const CVector& alphas) {
  for (Eigen::Index j = 0; j < alphas.size(); ++j)
    if (std::abs(alphas[j]) > kZeroThreshold) return static_cast<int>(j + 1);
  throw ValidationError("information_exponent: all coefficients are zero");
}

cplx link_value(const CVector& alphas, cplx z) {
  cplx acc{0.0, 0.0};
  cplx power{1.0, 0.0};
  for (Eigen::Index j = 1; j <= alphas.size(); ++j) {
    power *= z;
    acc += alphas[j - 1] * power / std::sqrt(factorial(static_cast<int>(j)));
  }
  return acc;
}

cplx link_derivative(const CVector& alphas, cplx z) {
  cplx acc{0.0, 0.0};
  cplx power{1.0, 0.0};  // z^{j-1}
  for (Eigen::Index j = 1; j <= alphas.size(); ++j) {
    acc += alphas[j - 1] * static_cast<double>(j) * power / std::sqrt(factorial(static_cast<int>(j)));
    power *= z;
  }
  return acc;
}

cplx StudentSpec::link(cplx z) const {
  return link_scale_ * ipow(z, link_exponent_) / std::sqrt(factorial(link_exponent_));
}

cplx StudentSpec::link_derivative(cplx z) const {
  return link_scale_ * static_cast<double>(link_exponent_) * ipow(z, link_exponent_ - 1) /
         std::sqrt(factorial(link_exponent_));
}

const Preconditioner& StudentSpec::preconditioner() const {
  std::call_once(cache_->once, [this] {
    cache_->pre = std::make_unique<Preconditioner>(compute_preconditioner(A_));
  });
  return *cache_->pre;
}

StudentSpec build_A(const ActivationSpec& act, const CVector& frozen, int K) {
  if (K < 1 || K > act.depth()) throw ValidationError("build_A: need 1 <= K <= activation depth");
  if (frozen.size() < 1) throw ValidationError("build_A: no frozen weights");
  for (Eigen::Index m = 0; m < frozen.size(); ++m)
    if (std::abs(std::abs(frozen[m]) - 1.0) > 1e-9)
      throw ValidationError("build_A: frozen weight " + std::to_string(m) + " is off the unit circle");
  StudentSpec s;
  s.frozen_ = frozen;
  s.activation_ = act;
  s.A_.resize(K, frozen.size());
  for (Eigen::Index m = 0; m < frozen.size(); ++m) {
    cplx power{1.0, 0.0};
    for (int k = 1; k <= K; ++k) {
      power *= frozen[m];
      s.A_(k - 1, m) = act.coefficient(k) * std::sqrt(static_cast<double>(k)) * power;
    }
  }
  return s;
}

StudentSpec student_from_matrix(const CMatrix& A) {
  if (A.rows() < 1 || A.cols() < 1) throw ValidationError("student_from_matrix: empty matrix");
  StudentSpec s;
  s.A_ = A;
  return s;
}

void set_link(StudentSpec& student, cplx scale, int exponent) {
  if (exponent < 1) throw ValidationError("student link exponent must be >= 1");
  student.link_scale_ = scale;
  student.link_exponent_ = exponent;
}

void attach_link(StudentSpec& student, const TeacherSpec& teacher, LinkConvention convention) {
  const cplx a = teacher.alpha_s();
  const cplx scale = convention == LinkConvention::Theory ? a / std::abs(a) : cplx{1.0, 0.0};
  set_link(student, scale, teacher.info_exponent);
}

cplx teacher_eval_features(const TeacherSpec& teacher, const CVector& powersums) {
  if (powersums.size() < teacher.h_star.size())
    throw ValidationError("teacher_eval: not enough powersum features");
  cplx z{0.0, 0.0};
  for (Eigen::Index k = 0; k < teacher.h_star.size(); ++k) z += teacher.h_star[k] * powersums[k];
  return link_value(teacher.alphas, z);
}

cplx teacher_eval(const TeacherSpec& teacher, const CVector& x) {
  const int depth = static_cast<int>(teacher.h_star.size());
  return teacher_eval_features(teacher, powersum_vector(x, depth).values);
}

cplx student_eval(const StudentSpec& student, const CVector& w, const CVector& x) {
  if (w.size() != student.width()) throw ValidationError("student_eval: weight dimension mismatch");
  const CVector u = student.A() * w;
  const PowersumVector p = powersum_vector(x, student.depth());
  cplx z{0.0, 0.0};
  for (int k = 0; k < student.depth(); ++k) z += u[k] * p.values[k];
  return student.link(z);
}

cplx student_eval_direct(const StudentSpec& student, const CVector& w, const CVector& x,
                         bool closed_form) {
  if (!student.activation()) throw ValidationError("student_eval_direct: student has no activation");
  if (w.size() != student.width()) throw ValidationError("student_eval_direct: weight dimension mismatch");
  const ActivationSpec& act = *student.activation();
  if (closed_form && act.kind != ActivationKind::Arctan)
    throw ValidationError("student_eval_direct: no closed form for activation " + act.name);
  ActivationSpec truncated = act;
  truncated.coeffs = act.coeffs.head(student.depth());
  cplx z{0.0, 0.0};
  for (int m = 0; m < student.width(); ++m) {
    cplx phi{0.0, 0.0};
    for (Eigen::Index n = 0; n < x.size(); ++n) {
      const cplx arg = student.frozen_weights()[m] * x[n];
      phi += closed_form ? *act.evaluate_closed_form(arg) : truncated.evaluate_series(arg);
    }
    z += w[m] * phi;
  }
  return student.link(z);
}

}  // namespace symidx
