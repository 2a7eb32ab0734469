#include <gtest/gtest.h>

#include <random>

#include "watatani/rokhlin.hpp"

using namespace watatani;
using namespace watatani::mm;

namespace {

using E = Element<Scalar>;

Scalar q(long n, long d = 1) { return Scalar(NumberField::rationals(), Rational(n, d)); }

E diag(const AlgebraPtr<Scalar>& a, std::vector<Scalar> entries) {
  E x(a);
  std::size_t k = 0;
  for (int b = 0; b < a->block_count(); ++b)
    for (int i = 0; i < a->block_size(b); ++i) x.at(b, i, i) = entries[k++];
  return x;
}

}  // namespace

TEST(MultiMatrix, ElementAlgebra) {
  const auto a = exact_algebra({2, 1});
  EXPECT_EQ(a->dim(), 5u);
  const auto e12 = E::matrix_unit(a, 0, 0, 1);
  const auto e21 = E::matrix_unit(a, 0, 1, 0);
  EXPECT_EQ(e12 * e21, E::matrix_unit(a, 0, 0, 0));
  EXPECT_TRUE((e21 * e21).is_zero());
  EXPECT_EQ(e12.adjoint(), e21);
  EXPECT_EQ(E::unit(a) * e12, e12);
  EXPECT_TRUE(E::block_unit(a, 1).is_projection());
  EXPECT_THROW(Algebra<double>::make({}, 0.0, 1.0), Error);
}

TEST(MultiMatrix, InclusionValidation) {
  const auto a = exact_algebra({2});
  EXPECT_THROW(Inclusion<Scalar>::make(a, {E::matrix_unit(a, 0, 0, 1)}), Error);
  EXPECT_THROW(Inclusion<Scalar>::make(a, {E::unit(a), E::unit(a)}), Error);
  EXPECT_NO_THROW(Inclusion<Scalar>::make(a, {E::matrix_unit(a, 0, 0, 0), E::matrix_unit(a, 0, 1, 1)}));
}

TEST(TraceCe, DirectSumOfScalars) {
  const auto a = exact_algebra({1, 1});
  const auto e = trace_ce_construct(diagonal_subalgebra(a), TraceFunctional<Scalar>::uniform(a));
  const auto x = diag(a, {q(3), q(7)});
  EXPECT_EQ(e(x), diag(a, {q(5), q(5)}));
}

TEST(TraceCe, WholeAlgebraIsIdentity) {
  const auto a = exact_algebra({2, 1});
  const auto e = trace_ce_construct(whole_algebra(a), TraceFunctional<Scalar>::uniform(a));
  EXPECT_TRUE(maps_equal(e.map, Matrix<Scalar>::identity(a->dim(), a->zero(), a->one()), 0.0));
  EXPECT_EQ(with_quasi_basis(e).index(), E::unit(a));
}

TEST(TraceCe, ScalarsInM2) {
  const auto a = exact_algebra({2});
  const auto e = with_quasi_basis(trace_ce_construct(scalar_subalgebra(a), TraceFunctional<Scalar>::uniform(a)));
  E x(a);
  x.at(0, 0, 0) = q(3);
  x.at(0, 0, 1) = q(5);
  x.at(0, 1, 1) = q(-1);
  EXPECT_EQ(e(x), E::scalar(a, q(1)));
  EXPECT_EQ(e.index(), E::scalar(a, q(4)));
  EXPECT_TRUE(verify_quasi_basis(e, *e.quasi_basis).pass());
  EXPECT_EQ(irreducible_by_index(e.index()), std::optional<bool>(false));
}

TEST(TraceCe, FaithfulnessRequired) {
  const auto a = exact_algebra({1, 1});
  const auto tau = TraceFunctional<Scalar>::make(a, {q(1), q(0)});
  EXPECT_THROW(trace_ce_construct(diagonal_subalgebra(a), tau), Error);
  EXPECT_THROW(TraceFunctional<Scalar>::make(a, {q(1), q(1)}), Error);
}

TEST(TraceCe, AxiomsOnFullBasis) {
  // weighted trace on M2 + M1 + M2, P = span of block units plus a diagonal M1 copy
  const auto a = exact_algebra({2, 1, 2});
  const auto tau = TraceFunctional<Scalar>::make(a, {q(1, 4), q(1, 10), q(1, 5)});
  std::vector<E> pb = {E::block_unit(a, 0), E::block_unit(a, 1), E::block_unit(a, 2) - E::matrix_unit(a, 2, 1, 1),
                       E::matrix_unit(a, 2, 1, 1)};
  const auto e = trace_ce_construct(Inclusion<Scalar>::make(a, pb), tau);
  EXPECT_TRUE(cond_exp_violations(e).empty());
  const auto basis = matrix_unit_basis(a);
  for (const auto& x : basis) {
    EXPECT_EQ(tau(e(x)), tau(x));
    EXPECT_EQ(e(e(x)), e(x));
    for (const auto& b : pb)
      for (const auto& c : pb) EXPECT_EQ(e(b * x * c), b * e(x) * c);
  }
  const auto qb = solve_quasi_basis(e);
  const auto check = verify_quasi_basis(e, qb);
  EXPECT_TRUE(check.pass());
}

TEST(TraceCe, FloatMode) {
  const auto a = float_algebra({2, 2});
  const auto e = with_quasi_basis(trace_ce_construct(diagonal_subalgebra(a), TraceFunctional<double>::uniform(a)));
  EXPECT_NEAR(e.index().at(0, 0, 0), 2.0, 1e-9);
  EXPECT_NEAR(e.index().at(1, 1, 1), 2.0, 1e-9);
  EXPECT_TRUE(verify_quasi_basis(e, *e.quasi_basis).pass());
}

TEST(DirectSumExample, IndexEqualsN) {
  for (int n : {2, 3, 5})
    for (int dim : {1, 2}) {
      const auto ex = direct_sum_example(dim, n);
      EXPECT_EQ(ex.expectation.index(), E::scalar(ex.expectation.big(), q(n))) << n << " " << dim;
      for (const auto& f : ex.family) EXPECT_EQ(ex.expectation(f), E::scalar(ex.expectation.big(), q(1, n)));
    }
}

TEST(DirectSumExample, NormPreservation) {
  const auto ex = direct_sum_example(1, 2);
  const auto& a = ex.expectation.big();
  const auto x = diag(a, {q(1), q(-1)});
  double best = 0;
  for (const auto& f : ex.family) best = std::max(best, operator_norm(x * f));
  EXPECT_NEAR(best, 1.0, 1e-12);
  EXPECT_NEAR(operator_norm(x), 1.0, 1e-12);
}

TEST(CoverExample, IndexAndCocycle) {
  CoverMaps maps{2, 3, {{{0, 1}, {1, 2, 0}}}};
  const auto ex = cover_example(exact_algebra({1}), maps);
  EXPECT_EQ(ex.expectation.index(), E::scalar(ex.expectation.big(), q(2)));
  EXPECT_TRUE(cond_exp_violations(ex.expectation).empty());

  CoverMaps three{3, 2, {{{0, 1}, {1, 0}}, {{0, 2}, {0, 1}}}};
  EXPECT_EQ(cover_example(exact_algebra({1}), three).expectation.index(),
            E::scalar(cover_example(exact_algebra({1}), three).expectation.big(), q(3)));

  CoverMaps bad{2, 3, {{{0, 1}, {1, 2, 0}}, {{1, 0}, {1, 2, 0}}}};
  try {
    (void)cover_example(exact_algebra({1}), bad);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::CocycleViolation);
  }

  CoverMaps single{1, 4, {}};
  const auto one = cover_example(exact_algebra({1}), single);
  EXPECT_EQ(one.expectation.index(), E::unit(one.expectation.big()));
}

TEST(GroupAverage, ShiftGivesDiagonal) {
  for (auto [n, dim] : {std::pair{2, 1}, std::pair{4, 2}}) {
    const auto ex = direct_sum_example(dim, n);
    const auto rep = group_average_ce(ex.expectation, cyclic_block_shift(ex.expectation.big()));
    EXPECT_TRUE(rep.fixed_equals_subalgebra);
    EXPECT_TRUE(rep.average_equals_expectation);
  }
  const auto ex = direct_sum_example(1, 3);
  const auto neg = group_average_ce(ex.expectation, identity_action(ex.expectation.big(), 3));
  EXPECT_FALSE(neg.fixed_equals_subalgebra);
  EXPECT_EQ(neg.fixed_dim, 3u);
  EXPECT_FALSE(neg.pass());
}

TEST(GroupAction, RejectsNonAction) {
  const auto a = exact_algebra({1, 1});
  auto act = cyclic_block_shift(a);
  act.maps[1] = Matrix<Scalar>::identity(2, a->zero(), a->one());
  act.maps[1](0, 0) = q(2);
  EXPECT_THROW(act.verify(), Error);
}

TEST(RokhlinPeriodic, DirectSumFamily) {
  const auto ex = direct_sum_example(1, 3);
  const auto basis = matrix_unit_basis(ex.expectation.big());
  const auto rep = rokhlin_periodic_check(ex.expectation, ex.family, basis);
  EXPECT_TRUE(rep.commutators_exact_zero);
  EXPECT_TRUE(rep.index_defect_exact_zero);
  EXPECT_TRUE(rep.injectivity_surrogate);
  EXPECT_TRUE(rep.pass());

  const auto neg = rokhlin_periodic_check(ex.expectation, {E::unit(ex.expectation.big())}, basis);
  EXPECT_FALSE(neg.pass());
  EXPECT_NEAR(neg.index_defect_numeric, 2.0, 1e-12);
}

TEST(RokhlinPeriodic, NormSurrogateOnEveryBasisElement) {
  for (int n : {2, 3, 5})
    for (int dim : {1, 2}) {
      const auto ex = direct_sum_example(dim, n);
      const auto rep = rokhlin_periodic_check(ex.expectation, ex.family, matrix_unit_basis(ex.expectation.big()));
      EXPECT_LE(rep.norm_gap_numeric, 1e-9);
    }
}

TEST(RokhlinPeriodic, CoverFamily) {
  const auto ex = cover_example(exact_algebra({1}), CoverMaps{2, 3, {{{0, 1}, {2, 0, 1}}}});
  const auto rep = rokhlin_periodic_check(ex.expectation, ex.family, matrix_unit_basis(ex.expectation.big()));
  EXPECT_TRUE(rep.commutators_exact_zero);
  EXPECT_TRUE(rep.index_defect_exact_zero);
}

TEST(TwoNorm, Examples) {
  const auto m2 = exact_algebra({2});
  const auto tau = TraceFunctional<Scalar>::uniform(m2);
  EXPECT_EQ(two_norm(E::matrix_unit(m2, 0, 0, 0), tau).square, q(1, 2));
  EXPECT_EQ(two_norm(E(m2), tau).square, q(0));
  const auto c2 = exact_algebra({1, 1});
  const auto n = two_norm(E::unit(c2), TraceFunctional<Scalar>::uniform(c2));
  EXPECT_EQ(n.square, q(1));
  EXPECT_DOUBLE_EQ(n.numeric, 1.0);
}

TEST(Mvn, BlockRanks) {
  const auto a = exact_algebra({1, 1});
  EXPECT_TRUE(mvn_subequivalent(diag(a, {q(1), q(0)}), E::unit(a)));
  EXPECT_TRUE(mvn_subequivalent(E::unit(a), E::unit(a)));
  const auto m2 = exact_algebra({2});
  EXPECT_FALSE(mvn_subequivalent(E::unit(m2), E::matrix_unit(m2, 0, 0, 0)));
  EXPECT_THROW(mvn_subequivalent(E::scalar(m2, q(1, 2)), E::unit(m2)), Error);
}

TEST(Mvn, OrderLaws) {
  std::mt19937_64 rng(7);
  const auto a = exact_algebra({3, 2});
  auto random_projection = [&] {
    E p(a);
    for (int b = 0; b < 2; ++b) {
      const auto x = random_partial_isometry_column(rng, a->block_size(b), 1).front();
      p.set_block(b, (x.adjoint() * x).block(0));
    }
    return p;
  };
  for (int t = 0; t < 40; ++t) {
    const auto p = random_projection(), r = random_projection(), s = random_projection();
    ASSERT_TRUE(p.is_projection());
    EXPECT_TRUE(mvn_subequivalent(p, p));
    if (mvn_subequivalent(p, r) && mvn_subequivalent(r, s)) EXPECT_TRUE(mvn_subequivalent(p, s));
  }
}

TEST(SupportProjection, ExactAndFloat) {
  const auto m2 = exact_algebra({2});
  E a(m2);
  a.at(0, 0, 0) = q(1);
  a.at(0, 0, 1) = q(1);
  a.at(0, 1, 0) = q(1);
  a.at(0, 1, 1) = q(1);
  const auto p = support_projection(a);
  EXPECT_TRUE(p.is_projection());
  EXPECT_EQ(p, Scalar(q(1, 2)) * a);

  const auto f2 = float_algebra({2});
  Element<double> b(f2, {1.0, 1.0, 1.0, 1.0});
  const auto pf = support_projection(b);
  EXPECT_NEAR(pf.at(0, 0, 1), 0.5, 1e-12);
}

TEST(TracialRokhlin, DirectSumData) {
  const auto ex = direct_sum_example(1, 2);
  const auto& a = ex.expectation.big();
  const auto gens = matrix_unit_basis(a);
  const auto rep = tracial_rokhlin_check(ex.expectation, ex.family[0], gens, E::unit(a), 1e-9);
  EXPECT_TRUE(rep.pass());

  const auto zero = tracial_rokhlin_check(ex.expectation, E(a), gens, E::unit(a), 1e-9);
  EXPECT_TRUE(zero.idempotent);
  EXPECT_TRUE(zero.subequivalent);
  const auto partial = tracial_rokhlin_check(ex.expectation, E(a), gens, diag(a, {q(1), q(0)}), 1e-9);
  EXPECT_FALSE(partial.subequivalent);

  const auto half = tracial_rokhlin_check(ex.expectation, q(1, 2) * ex.family[0], gens, E::unit(a), 1e-9);
  EXPECT_FALSE(half.idempotent);
  EXPECT_FALSE(half.pass());
  EXPECT_THROW(tracial_rokhlin_check(ex.expectation, ex.family[0], gens, diag(a, {q(1), q(-1)}), 1e-9), Error);
}

TEST(ProbabilisticRokhlin, ExactZeros) {
  const auto ex = direct_sum_example(1, 2);
  const auto& a = ex.expectation.big();
  const auto gens = matrix_unit_basis(a);
  const auto rep = probabilistic_rokhlin_check(ex.expectation, ex.family[0], gens, ex.tau, 1e-9);
  EXPECT_TRUE(rep.commutator_square.is_zero());
  EXPECT_TRUE(rep.defect_square.is_zero());
  EXPECT_TRUE(rep.pass());

  const auto half = probabilistic_rokhlin_check(ex.expectation, E::scalar(a, q(1, 2)), gens, ex.tau, 1e-9);
  EXPECT_TRUE(half.pass());
  EXPECT_FALSE(half.e_is_projection);
  EXPECT_TRUE(half.record("E").metadata.contains("NonProjection"));
}

TEST(ProbabilisticRokhlin, FloatPerturbation) {
  const auto exf = direct_sum_example(float_algebra({1}), 2, 2);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1e-6, 1e-6);
  auto e = exf.family[0];
  for (std::size_t k = 0; k < e.coords().size(); ++k) e[k] += u(rng);
  const auto rep = probabilistic_rokhlin_check(exf.expectation, e, matrix_unit_basis(exf.expectation.big()), exf.tau,
                                               1e-5);
  EXPECT_LT(rep.commutator_numeric, 1e-5);
  EXPECT_LT(rep.defect_numeric, 1e-5);
}

TEST(Elpw, CyclicShift) {
  const auto a = exact_algebra({1, 1, 1});
  const auto act = cyclic_block_shift(a);
  std::vector<E> family;
  for (int b = 0; b < 3; ++b) family.push_back(E::block_unit(a, b));
  const auto tau = TraceFunctional<Scalar>::uniform(a);
  const auto rep = elpw_check(act, family, matrix_unit_basis(a), tau, 1e-9);
  EXPECT_TRUE(rep.equivariance_exact_zero);
  EXPECT_TRUE(rep.commutators_exact_zero);
  EXPECT_TRUE(rep.partition_of_unity);
  EXPECT_TRUE(rep.pass());

  family[2] = E(a);
  EXPECT_FALSE(elpw_check(act, family, matrix_unit_basis(a), tau, 1e-9).partition_of_unity);

  const auto trivial = elpw_check(trivial_group(a), {E::unit(a)}, matrix_unit_basis(a), tau, 1e-9);
  EXPECT_TRUE(trivial.pass());
}

TEST(ThetaLemma, Examples) {
  const auto m2 = exact_algebra({2});
  EXPECT_TRUE(theta_lemma_check<Scalar>({E::matrix_unit(m2, 0, 0, 0)}, q(2)).pass());
  EXPECT_TRUE(theta_lemma_check<Scalar>({E(m2)}, q(2)).pass());
  try {
    (void)theta_lemma_check<Scalar>({E::scalar(m2, q(1, 2))}, q(2));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::NotProjection);
  }
}

TEST(ThetaLemma, SeededInstances) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 20; ++t) {
    const int k = 2 + t % 3, m = 1 + t % 4;
    const auto x = random_partial_isometry_column(rng, k, m);
    EXPECT_TRUE(theta_lemma_check(x, q(m + 1)).pass()) << t;
  }
}
