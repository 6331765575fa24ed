#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"
#include "symidx/sympoly.hpp"

using namespace symidx;

namespace {

// Direct oracle: k^{-1/2} sum_n x_n^k via std::pow.
cplx powersum_oracle(int k, const CVector& x) {
  cplx acc{0.0, 0.0};
  for (Eigen::Index n = 0; n < x.size(); ++n) acc += std::pow(x[n], k);
  return acc / std::sqrt(static_cast<double>(k));
}

}  // namespace

TEST_CASE("powersum_eval on small inputs") {
  CHECK(close(powersum_eval(1, vec({1, 1, 1})), cplx(3.0, 0.0), 1e-15));
  CHECK(close(powersum_eval(1, vec({1, -1})), cplx(0.0, 0.0), 1e-15));
  CHECK(close(powersum_eval(2, vec({1, -1})), cplx(std::sqrt(2.0), 0.0), 1e-15));
  CVector roots(6);
  for (int j = 0; j < 6; ++j) roots[j] = std::polar(1.0, 2.0 * std::numbers::pi * j / 6.0);
  CHECK(std::abs(powersum_eval(3, roots)) < 1e-14);
  CHECK_THROWS_AS(powersum_eval(0, vec({1})), ValidationError);
  CHECK_THROWS_AS(powersum_eval(1, CVector()), ValidationError);
}

TEST_CASE("powersum_vector matches direct summation") {
  const PowersumVector one = powersum_vector(vec({1}), 3);
  CHECK(close(one.values[0], 1.0, 1e-15));
  CHECK(close(one.values[1], 1.0 / std::sqrt(2.0), 1e-15));
  CHECK(close(one.values[2], 1.0 / std::sqrt(3.0), 1e-15));

  CVector x(2);
  x << cplx(0, 1), cplx(0, -1);
  const PowersumVector p = powersum_vector(x, 2);
  CHECK(close(p.values[0], 0.0, 1e-15));
  CHECK(close(p.values[1], -std::sqrt(2.0), 1e-14));

  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    CVector y(7);
    for (auto& e : y) e = rng.unit_circle();
    const PowersumVector q = powersum_vector(y, 10);
    for (int k = 1; k <= 10; ++k) {
      CHECK(close(q.values[k - 1], powersum_oracle(k, y), 1e-12));
      CHECK(q.values[k - 1] == powersum_eval(k, y));
      CHECK(std::abs(q.values[k - 1]) <= 7.0 / std::sqrt(double(k)) + 1e-12);
    }
  }
}

TEST_CASE("property: powersums are bitwise permutation invariant") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int N = 2 + static_cast<int>(rng.uniform() * 20);
    CVector x(N);
    for (auto& e : x) e = rng.unit_circle();
    std::vector<cplx> perm(x.data(), x.data() + N);
    for (int i = N - 1; i > 0; --i) std::swap(perm[i], perm[static_cast<std::size_t>(rng.uniform() * (i + 1))]);
    const CVector y = Eigen::Map<CVector>(perm.data(), N);
    const PowersumVector a = powersum_vector(x, 12);
    const PowersumVector b = powersum_vector(y, 12);
    CHECK(a.values == b.values);
  }
}

TEST_CASE("partitions and t constants") {
  CHECK(partition_t_constant(Partition{1}) == 1);
  CHECK(partition_t_constant(Partition{2, 1, 1}) == 2);
  CHECK(partition_t_constant(Partition{3, 3, 3}) == 6);
  CHECK(partition_t_constant(Partition{1, 2, 1}) == partition_t_constant(Partition{2, 1, 1}));
  CHECK(Partition{1, 2, 1} == Partition{2, 1, 1});
  const Partition lam{3, 1, 2, 1};
  CHECK(lam.parts() == std::vector<int>{3, 2, 1, 1});
  CHECK(lam.weight() == 7);
  int parts = 0;
  for (const auto& [value, count] : lam.multiplicities()) parts += count;
  CHECK(parts == lam.length());
  CHECK_THROWS_AS(Partition({2, 0}), ValidationError);
  CHECK_THROWS_AS(Partition({-1}), ValidationError);
}

TEST_CASE("property: t constant is a product of multiplicity factorials") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> parts;
    const int len = 1 + static_cast<int>(rng.uniform() * 6);
    for (int i = 0; i < len; ++i) parts.push_back(1 + static_cast<int>(rng.uniform() * 3));
    std::vector<int> shuffled = parts;
    std::reverse(shuffled.begin(), shuffled.end());
    std::uint64_t oracle = 1;
    for (int v = 1; v <= 3; ++v) {
      const auto m = std::count(parts.begin(), parts.end(), v);
      for (int f = 2; f <= m; ++f) oracle *= static_cast<std::uint64_t>(f);
    }
    CHECK(partition_t_constant(Partition(parts)) == oracle);
    CHECK(partition_t_constant(Partition(shuffled)) == oracle);
  }
}

TEST_CASE("exact Hall inner product") {
  CHECK(hall_inner_product_exact(Partition{2}, Partition{2}, 10) == 1);
  CHECK(hall_inner_product_exact(Partition{1, 1}, Partition{2}, 10) == 0);
  CHECK(hall_inner_product_exact(Partition{1, 1}, Partition{1, 1}, 10) == 2);
  CHECK_THROWS_AS(hall_inner_product_exact(Partition{6, 5}, Partition{6, 5}, 10), RegimeError);
}

TEST_CASE("Monte Carlo inner products") {
  const auto p = [](int k) { return [k](const CVector& x) { return powersum_eval(k, x); }; };
  const auto batch = sample_batch(10, 200000, 42);
  const McEstimate diag = mc_inner_product(p(2), p(2), batch);
  CHECK(diag.z_score(1.0) <= 3.0);
  const McEstimate off = mc_inner_product(p(1), p(3), batch);
  CHECK(off.z_score(0.0) <= 3.0);

  const McEstimate hall = mc_inner_product(
      [](const CVector& x) { return powersum_eval(1, x) * powersum_eval(1, x); },
      [](const CVector& x) { return powersum_eval(1, x) * powersum_eval(1, x); }, batch);
  CHECK(hall.z_score(2.0) <= 3.0);

  const auto unit = [](const CVector&) { return cplx(1.0, 0.0); };
  const McEstimate c = mc_inner_product(unit, unit, 4, 10, 1);
  CHECK(c.estimate == cplx(1.0, 0.0));
  CHECK(c.std_error == 0.0);
  CHECK(c.samples == 10);

  const McEstimate again = mc_inner_product(p(2), p(2), 6, 500, 9);
  CHECK(again.estimate == mc_inner_product(p(2), p(2), 6, 500, 9).estimate);
}

TEST_CASE("semigroup identity") {
  CHECK(close(semigroup_identity_exact(unit_vector(1, 0), unit_vector(1, 0), 1, 1), 1.0, 1e-15));
  CHECK(semigroup_identity_exact(unit_vector(5, 1), unit_vector(5, 1), 2, 3) == cplx(0.0, 0.0));

  Rng rng(77);
  CVector h(5), ht(20);
  for (auto& e : h) e = rng.complex_normal();
  for (auto& e : ht) e = rng.complex_normal();
  h /= h.norm();
  ht /= ht.norm();
  const cplx inner = coeff_inner(h, ht);
  CHECK(close(semigroup_identity_exact(h, ht, 3, 3), 6.0 * inner * inner * inner, 1e-14));

  const SemigroupCheck e1 = semigroup_identity_check(unit_vector(3, 0), unit_vector(3, 0), 1, 1, 9, 20000, 4);
  CHECK(e1.rhs == cplx(1.0, 0.0));
  CHECK(e1.z_score <= 4.0);

  const auto batch = head(shared_batch_25(), 100000);
  for (int k = 1; k <= 3; ++k) {
    for (int l = 1; l <= 3; ++l) {
      const SemigroupCheck chk = semigroup_identity_check(h, ht, k, l, 25, batch);
      CHECK(chk.z_score <= 4.0);
    }
  }

  CVector wide = CVector::Zero(6);
  wide[5] = 1.0;
  CHECK_THROWS_AS(semigroup_identity_check(wide, wide, 1, 1, 25, 10, 1), RegimeError);
  CHECK_THROWS_AS(semigroup_identity_check(h, ht, 6, 6, 25, 10, 1), RegimeError);
}
