#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "watatani/temperley_lieb.hpp"

using namespace watatani;
using namespace watatani::tl;

namespace {

// Independent composition: glue a over b with union-find on 3n points and read off
// the boundary pairing and the number of closed components.
std::pair<std::vector<int>, int> oracle_compose(const Diagram& a, const Diagram& b) {
  const int n = a.n();
  // 0..n-1 result top, n..2n-1 middle, 2n..3n-1 result bottom
  std::vector<int> parent(3 * n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x];
    return x;
  };
  auto unite = [&](int x, int y) { parent[find(x)] = find(y); };
  auto in_a = [n](int id) { return id < n ? id : n + (id - n); };
  auto in_b = [n](int id) { return id < n ? n + id : 2 * n + (id - n); };
  for (int x = 0; x < 2 * n; ++x) {
    unite(in_a(x), in_a(a.partner()[x]));
    unite(in_b(x), in_b(b.partner()[x]));
  }
  std::vector<int> p(2 * n);
  auto out_id = [n](int node) { return node < n ? node : node - n; };
  for (int u = 0; u < 3 * n; ++u) {
    if (u >= n && u < 2 * n) continue;
    for (int v = 0; v < 3 * n; ++v) {
      if (v == u || (v >= n && v < 2 * n)) continue;
      if (find(u) == find(v)) p[out_id(u)] = out_id(v);
    }
  }
  std::vector<bool> boundary_root(3 * n, false);
  for (int u = 0; u < 3 * n; ++u)
    if (u < n || u >= 2 * n) boundary_root[find(u)] = true;
  int loops = 0;
  for (int u = n; u < 2 * n; ++u)
    if (find(u) == u && !boundary_root[u]) ++loops;
  return {p, loops};
}

Scalar rat(const JonesData& j, long num, long den = 1) { return Scalar(j.tau.field(), Rational(num, den)); }

std::vector<JonesData> parameter_sets(int n) {
  return {JonesData::from_tau(n, Rational(1, 2)), JonesData::from_tau(n, Rational(1, 3)),
          JonesData::from_loop_index(n, 5)};
}

}  // namespace

TEST(TlDiagram, CatalanCounts) {
  const std::vector<std::size_t> catalan = {1, 1, 2, 5, 14, 42, 132, 429};
  for (int n = 1; n <= 7; ++n) EXPECT_EQ(Diagram::all(n).size(), catalan[n]) << n;
}

TEST(TlDiagram, RejectsCrossings) {
  // t1-b2 and t2-b1 cross
  EXPECT_THROW(Diagram(2, {3, 2, 1, 0}), Error);
  EXPECT_THROW(Diagram(2, {1, 0, 3, 1}), Error);
  EXPECT_NO_THROW(Diagram(2, {1, 0, 3, 2}));
}

TEST(TlDiagram, CompositionMatchesOracle) {
  for (int n : {3, 4, 5}) {
    const auto ds = Diagram::all(n);
    for (const auto& a : ds)
      for (const auto& b : ds) {
        const auto [d, loops] = compose(a, b);
        const auto [p, oloops] = oracle_compose(a, b);
        ASSERT_EQ(d.partner(), p);
        ASSERT_EQ(loops, oloops);
      }
  }
}

TEST(TlMultiply, JonesRelations) {
  const auto j3 = JonesData::from_tau(3, Rational(1, 2));
  EXPECT_EQ(j3.proj(1) * j3.proj(2) * j3.proj(1), j3.tau * j3.proj(1));
  EXPECT_EQ(j3.proj(1) * j3.proj(1), j3.proj(1));
  const auto j4 = JonesData::from_tau(4, Rational(1, 2));
  EXPECT_TRUE((j4.proj(1) * j4.proj(3) - j4.proj(3) * j4.proj(1)).is_zero());
  EXPECT_THROW(j3.proj(1) * j4.proj(1), Error);
}

TEST(TlMultiply, RelationsUpToEightStrands) {
  for (int n = 2; n <= 8; ++n)
    for (const auto& j : parameter_sets(n)) EXPECT_TRUE(j.relation_violations().empty()) << n;
}

TEST(TlMultiply, Associativity) {
  std::mt19937_64 rng(11);
  const auto j = JonesData::from_loop_index(5, 5);
  const auto ds = Diagram::all(5);
  for (int t = 0; t < 200; ++t) {
    const auto a = random_element(rng, j.space, ds), b = random_element(rng, j.space, ds),
               c = random_element(rng, j.space, ds);
    ASSERT_EQ((a * b) * c, a * (b * c));
    ASSERT_EQ((a * b).adjoint(), b.adjoint() * a.adjoint());
  }
}

TEST(MarkovTrace, Values) {
  for (const auto& j : parameter_sets(5)) {
    EXPECT_EQ(markov_trace(j.unit()), j.one());
    for (int i = 1; i < 5; ++i) EXPECT_EQ(markov_trace(j.proj(i)), j.tau);
    EXPECT_EQ(markov_trace(j.proj(1) * j.proj(3)), j.tau * j.tau);
    for (const auto& x : j.e)
      for (const auto& y : j.e) EXPECT_EQ(markov_trace(x * y), markov_trace(y * x));
  }
}

TEST(MarkovTrace, MarkovProperty) {
  std::mt19937_64 rng(5);
  int instances = 0;
  for (int n : {3, 4, 5, 6, 7}) {
    const auto small = JonesData::from_tau(n - 1, Rational(1, 3));
    const auto big = JonesData::from_tau(n, Rational(1, 3));
    const auto ds = Diagram::all(n - 1);
    for (int t = 0; t < 10; ++t, ++instances) {
      const auto x = random_element(rng, small.space, ds, 4);
      EXPECT_EQ(markov_trace(x.extend(big.space) * big.proj(n - 1)), big.tau * markov_trace(x));
      EXPECT_EQ(markov_trace(x.extend(big.space)), markov_trace(x));
    }
  }
  EXPECT_EQ(instances, 50);
}

TEST(JonesAlgebra, Dimensions) {
  const auto j4 = JonesData::from_tau(4, Rational(1, 2));
  const auto alg4 = jones_algebra_build(j4);
  EXPECT_EQ(alg4.a_dim, 2u);
  EXPECT_EQ(alg4.b_basis.size(), 4u);
  EXPECT_TRUE(alg4.closed);
  for (int n : {5, 6}) {
    const auto j = JonesData::from_tau(n, Rational(1, 2));
    const auto alg = jones_algebra_build(j);
    EXPECT_EQ(alg.b_basis.size(), 2 * alg.a_dim);
    EXPECT_TRUE(alg.closed);
  }
  EXPECT_THROW(jones_algebra_build(JonesData::from_tau(3, Rational(1, 2))), Error);
}

TEST(JonesCe, Examples) {
  for (const auto& j : parameter_sets(5)) {
    const auto alg = jones_algebra_build(j);
    const JonesExpectation e(j, alg);
    EXPECT_EQ(e(j.proj(1)), Element::scalar(j.space, j.tau));
    EXPECT_EQ(e(j.unit() - j.proj(1)), Element::scalar(j.space, j.one() - j.tau));
    EXPECT_EQ(e(j.proj(3) * j.proj(1)), j.tau * j.proj(3));
    EXPECT_TRUE(e.violations().empty());
    EXPECT_THROW(e(j.proj(2)), Error);
  }
}

TEST(JonesCe, UniqueTracePreserving) {
  const auto j = JonesData::from_tau(6, Rational(1, 3));
  const auto alg = jones_algebra_build(j);
  const JonesExpectation e(j, alg);
  for (const auto& x : alg.b_basis)
    for (const auto& y : alg.a_basis) EXPECT_EQ(markov_trace(e(x) * y), markov_trace(x * y));
}

TEST(JonesQuasiBasis, HalfAndThird) {
  const auto half = JonesData::from_tau(4, Rational(1, 2));
  const auto rh = jones_quasi_basis_verify(half, jones_algebra_build(half));
  EXPECT_TRUE(rh.identities_pass());
  EXPECT_TRUE(rh.index_scalar);
  EXPECT_EQ(rh.index_on_e1, rat(half, 2));
  EXPECT_EQ(jones_index(half), Element::scalar(half.space, rat(half, 2)));
  EXPECT_LT(rh.index_minus_four_cos_sq_numeric, 1e-12);

  const auto third = JonesData::from_tau(5, Rational(1, 3));
  const auto rt = jones_quasi_basis_verify(third, jones_algebra_build(third));
  EXPECT_TRUE(rt.identities_pass());
  EXPECT_FALSE(rt.index_scalar);
  EXPECT_EQ(rt.index_on_e1, rat(third, 3));
  EXPECT_EQ(rt.index_on_complement, rat(third, 3, 2));
}

TEST(JonesRokhlin, HalfPassesThirdFails) {
  for (int n : {4, 6}) {
    const auto j = JonesData::from_tau(n, Rational(1, 2));
    const auto rep = jones_rokhlin_check(j, jones_algebra_build(j));
    EXPECT_TRUE(rep.commutators_exact_zero);
    EXPECT_TRUE(rep.index_identity_e1);
    EXPECT_TRUE(rep.index_identity_complement);
    EXPECT_TRUE(rep.injectivity_surrogate) << rep.norm_gap_numeric;
    EXPECT_TRUE(rep.pass());
  }
  const auto j = JonesData::from_tau(5, Rational(1, 3));
  const auto rep = jones_rokhlin_check(j, jones_algebra_build(j));
  EXPECT_TRUE(rep.commutators_exact_zero);
  EXPECT_FALSE(rep.index_identity_e1 && rep.index_identity_complement);
  EXPECT_FALSE(rep.pass());
}

TEST(SwapAutomorphism, EqualsExpectationAtHalf) {
  const auto half = JonesData::from_tau(4, Rational(1, 2));
  const auto rh = swap_automorphism_check(half, jones_algebra_build(half));
  EXPECT_TRUE(rh.automorphism());
  EXPECT_TRUE(rh.equals_expectation);

  const auto third = JonesData::from_tau(4, Rational(1, 3));
  const auto rt = swap_automorphism_check(third, jones_algebra_build(third));
  EXPECT_TRUE(rt.automorphism());
  EXPECT_FALSE(rt.equals_expectation);
  EXPECT_EQ(rt.deviation_on_e1, rat(third, -1, 6));
}
