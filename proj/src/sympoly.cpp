#include "symidx/sympoly.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace symidx {

namespace {

std::vector<cplx> sorted_points(const CVector& x) {
  std::vector<cplx> pts(x.data(), x.data() + x.size());
  std::sort(pts.begin(), pts.end(), [](const cplx& a, const cplx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return pts;
}

}  // namespace

cplx powersum_eval(int k, const CVector& x) {
  if (k < 1) throw ValidationError("powersum_eval: k must be >= 1 (no constant term)");
  if (x.size() < 1) throw ValidationError("powersum_eval: empty input");
  cplx sum{0.0, 0.0};
  for (const cplx& xn : sorted_points(x)) {
    cplx power{1.0, 0.0};
    for (int j = 0; j < k; ++j) power *= xn;
    sum += power;
  }
  return sum / std::sqrt(static_cast<double>(k));
}

PowersumVector powersum_vector(const CVector& x, int depth) {
  if (depth < 1) throw ValidationError("powersum_vector: depth must be >= 1");
  if (x.size() < 1) throw ValidationError("powersum_vector: empty input");
  PowersumVector out;
  out.point = x;
  out.depth = depth;
  out.values = CVector::Zero(depth);
  for (const cplx& xn : sorted_points(x)) {
    cplx power{1.0, 0.0};
    for (int k = 0; k < depth; ++k) {
      power *= xn;
      out.values[k] += power;
    }
  }
  for (int k = 0; k < depth; ++k) out.values[k] /= std::sqrt(static_cast<double>(k + 1));
  return out;
}

Partition::Partition(std::vector<int> parts) : parts_(std::move(parts)) {
  for (int p : parts_)
    if (p <= 0) throw ValidationError("Partition: parts must be positive");
  std::sort(parts_.begin(), parts_.end(), std::greater<>());
  weight_ = std::accumulate(parts_.begin(), parts_.end(), 0);
}

std::map<int, int> Partition::multiplicities() const {
  std::map<int, int> m;
  for (int p : parts_) ++m[p];
  return m;
}

std::uint64_t partition_t_constant(const Partition& lambda) {
  std::uint64_t t = 1;
  for (const auto& [part, count] : lambda.multiplicities())
    for (int i = 2; i <= count; ++i) t *= static_cast<std::uint64_t>(i);
  return t;
}

cplx powersum_product(const Partition& lambda, const PowersumVector& p) {
  cplx prod{1.0, 0.0};
  for (int part : lambda.parts()) {
    if (part > p.depth) throw ValidationError("powersum_product: part exceeds powersum depth");
    prod *= p.values[part - 1];
  }
  return prod;
}

std::uint64_t hall_inner_product_exact(const Partition& lambda, const Partition& mu, int N) {
  if (lambda.weight() > N)
    throw RegimeError("hall_inner_product_exact: |lambda| = " + std::to_string(lambda.weight()) +
                      " exceeds N = " + std::to_string(N));
  return lambda == mu ? partition_t_constant(lambda) : 0;
}

double McEstimate::z_score(cplx target) const {
  const double err = std::abs(estimate - target);
  if (std_error == 0.0) return err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return err / std_error;
}

McEstimate mean_with_stderr(const std::vector<cplx>& values) {
  McEstimate est;
  est.samples = values.size();
  if (values.empty()) throw ValidationError("mean_with_stderr: no samples");
  cplx sum{0.0, 0.0};
  for (const cplx& v : values) sum += v;
  est.estimate = sum / static_cast<double>(values.size());
  if (values.size() == 1) {
    est.std_error = std::numeric_limits<double>::infinity();
    return est;
  }
  double ss = 0.0;
  for (const cplx& v : values) ss += std::norm(v - est.estimate);
  const auto n = static_cast<double>(values.size());
  est.std_error = std::sqrt(ss / (n - 1.0) / n);
  return est;
}

McEstimate mc_inner_product(const SampleFunction& f, const SampleFunction& g,
                            const std::vector<SpectrumSample>& batch) {
  std::vector<cplx> values;
  values.reserve(batch.size());
  for (const auto& s : batch) values.push_back(f(s.points) * std::conj(g(s.points)));
  return mean_with_stderr(values);
}

McEstimate mc_inner_product(const SampleFunction& f, const SampleFunction& g, int N,
                            std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw ValidationError("mc_inner_product: n_samples must be >= 1");
  return mc_inner_product(f, g, sample_batch(N, n_samples, seed));
}

void require_low_support(const CVector& h, int N, const char* what) {
  const int cut = isqrt(N);
  for (Eigen::Index i = cut; i < h.size(); ++i)
    if (h[i] != cplx{0.0, 0.0})
      throw RegimeError(std::string(what) + ": vector must be supported on the first floor(sqrt N) = " +
                        std::to_string(cut) + " indices");
}

cplx semigroup_identity_exact(const CVector& h, const CVector& h_tilde, int k, int l) {
  if (k != l) return {0.0, 0.0};
  return factorial(k) * ipow(coeff_inner(h, h_tilde), k);
}

SemigroupCheck semigroup_identity_check(const CVector& h, const CVector& h_tilde, int k, int l,
                                        int N, const std::vector<SpectrumSample>& batch) {
  if (k < 0 || l < 0) throw ValidationError("semigroup_identity_check: exponents must be >= 0");
  require_low_support(h, N, "semigroup_identity_check");
  if (k > isqrt(N)) throw RegimeError("semigroup_identity_check: k exceeds floor(sqrt N)");
  const int depth = static_cast<int>(std::max<Eigen::Index>({h.size(), h_tilde.size(), 1}));
  auto pairing = [depth](const CVector& coeffs) {
    return [depth, coeffs](const CVector& x) {
      const PowersumVector p = powersum_vector(x, depth);
      cplx z{0.0, 0.0};
      for (Eigen::Index i = 0; i < coeffs.size(); ++i) z += coeffs[i] * p.values[i];
      return z;
    };
  };
  const auto feature = pairing(h);
  const auto feature_tilde = pairing(h_tilde);
  SemigroupCheck out;
  out.lhs = mc_inner_product([&](const CVector& x) { return ipow(feature(x), k); },
                             [&](const CVector& x) { return ipow(feature_tilde(x), l); }, batch);
  out.rhs = semigroup_identity_exact(h, h_tilde, k, l);
  out.z_score = out.lhs.z_score(out.rhs);
  return out;
}

SemigroupCheck semigroup_identity_check(const CVector& h, const CVector& h_tilde, int k, int l,
                                        int N, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw ValidationError("semigroup_identity_check: n_samples must be >= 1");
  require_low_support(h, N, "semigroup_identity_check");
  return semigroup_identity_check(h, h_tilde, k, l, N, sample_batch(N, n_samples, seed));
}

}  // namespace symidx
