#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <vector>

#include "symidx/core.hpp"
#include "symidx/cue.hpp"

namespace symidx {

/// Normalized powersum p_k(x) = k^{-1/2} sum_n x_n^k.
///
/// Points are summed in lexicographic (re, im) order so the result is
/// bitwise invariant under permutations of x. Throws ValidationError for k < 1
/// (the constant term is not part of the feature map) or empty x.
cplx powersum_eval(int k, const CVector& x);

struct PowersumVector {
  CVector values;  // values[k-1] = p_k(point)
  CVector point;
  int depth = 0;
};

/// [p_1(x), ..., p_K(x)] in O(NK) by cumulative per-entry multiplication.
/// Equal bit for bit to powersum_eval(k, x) for every k.
PowersumVector powersum_vector(const CVector& x, int depth);

/// Integer partition with parts stored in non-increasing order.
class Partition {
 public:
  Partition() = default;
  /// Any order is accepted; parts are sorted. Non-positive parts are rejected.
  explicit Partition(std::vector<int> parts);
  Partition(std::initializer_list<int> parts) : Partition(std::vector<int>(parts)) {}

  const std::vector<int>& parts() const { return parts_; }
  int weight() const { return weight_; }
  int length() const { return static_cast<int>(parts_.size()); }
  /// part value -> number of parts equal to it
  std::map<int, int> multiplicities() const;

  friend bool operator==(const Partition& a, const Partition& b) { return a.parts_ == b.parts_; }

 private:
  std::vector<int> parts_;
  int weight_ = 0;
};

/// t_lambda = prod_i (m_i)!
std::uint64_t partition_t_constant(const Partition& lambda);

/// p_lambda(x) = prod_i p_{lambda_i}(x), taken from a precomputed powersum vector.
cplx powersum_product(const Partition& lambda, const PowersumVector& p);

/// Exact <p_lambda, p_mu>_V = t_lambda [lambda == mu]. Requires |lambda| <= N;
/// otherwise throws RegimeError.
std::uint64_t hall_inner_product_exact(const Partition& lambda, const Partition& mu, int N);

/// Sample mean of complex observations with its standard error.
struct McEstimate {
  cplx estimate{0.0, 0.0};
  double std_error = 0.0;  // sqrt(sum |X_i - mean|^2 / (n (n - 1)))
  std::size_t samples = 0;

  /// |estimate - target| / stderr; zero when both the error and stderr vanish.
  double z_score(cplx target) const;
};

McEstimate mean_with_stderr(const std::vector<cplx>& values);

using SampleFunction = std::function<cplx(const CVector&)>;

/// Monte Carlo estimate of E_{x~V}[f(x) conj(g(x))] over a fresh seeded CUE batch.
McEstimate mc_inner_product(const SampleFunction& f, const SampleFunction& g, int N,
                            std::size_t n_samples, std::uint64_t seed);
/// Same estimator over a caller-supplied batch.
McEstimate mc_inner_product(const SampleFunction& f, const SampleFunction& g,
                            const std::vector<SpectrumSample>& batch);

struct SemigroupCheck {
  McEstimate lhs;
  cplx rhs{0.0, 0.0};
  double z_score = 0.0;
};

/// Exact right-hand side delta_{kl} k! <h, h_tilde>^k of the powersum semigroup identity.
cplx semigroup_identity_exact(const CVector& h, const CVector& h_tilde, int k, int l);

/// Monte Carlo check of <<h,p>^k, <h~,p>^l>_V = delta_{kl} k! <h,h~>^k.
/// The feature pairing <h, p(x)> = sum_k h_k p_k(x) does not conjugate.
/// Requires h supported on the first floor(sqrt N) indices and k <= floor(sqrt N).
SemigroupCheck semigroup_identity_check(const CVector& h, const CVector& h_tilde, int k, int l,
                                        int N, std::size_t n_samples, std::uint64_t seed);
SemigroupCheck semigroup_identity_check(const CVector& h, const CVector& h_tilde, int k, int l,
                                        int N, const std::vector<SpectrumSample>& batch);

/// Throws RegimeError unless h vanishes beyond index floor(sqrt N).
void require_low_support(const CVector& h, int N, const char* what);

}  // namespace symidx
