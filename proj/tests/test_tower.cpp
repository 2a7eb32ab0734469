#include <gtest/gtest.h>

#include "watatani/tower.hpp"

using namespace watatani;
using namespace watatani::tower;
using mm::Element;

namespace {

TowerBase<Scalar> exact_base(int a_dim, int n) { return direct_sum_base(mm::direct_sum_example(a_dim, n)); }

TowerBase<double> float_base(int a_dim, int n) {
  return direct_sum_base(mm::direct_sum_example(mm::float_algebra({1}), a_dim, n));
}

TowerBase<double> twisted_float_base(int a_dim, int n) {
  return twisted_direct_sum_base(mm::direct_sum_example(mm::float_algebra({1}), a_dim, n));
}

}  // namespace

TEST(Tower, IndexRoundTrip) {
  const TensorTower<Scalar> t(exact_base(2, 2), 3);
  for (int k = 1; k <= 3; ++k)
    for (std::size_t i = 0; i < t.level(k)->dim(); ++i) ASSERT_EQ(t.index_of(k, t.slots_of(k, i)), i);
}

TEST(Tower, TensorIsMultiplicative) {
  const TensorTower<Scalar> t(exact_base(2, 2), 2);
  const auto basis = mm::matrix_unit_basis(t.base_algebra());
  for (const auto& a : basis)
    for (const auto& b : basis)
      for (const auto& c : basis) {
        const auto& d = basis[(a.coords().size() + 3) % basis.size()];
        ASSERT_EQ(t.tensor({a, b}) * t.tensor({c, d}), t.tensor({a * c, b * d}));
      }
}

TEST(Tower, DepthFourDefectZero) {
  const TensorTower<Scalar> t(exact_base(1, 2), 4);
  const auto rep = verify_tower(t);
  EXPECT_TRUE(rep.defect_zero);
  EXPECT_TRUE(rep.phi_homomorphism);
  EXPECT_TRUE(rep.expectations_valid);
  EXPECT_EQ(rep.index_levels_checked, 3);
  EXPECT_TRUE(rep.index_matches);
  EXPECT_TRUE(rep.pass());
}

TEST(Tower, MatrixBlockBase) {
  const TensorTower<Scalar> t(exact_base(2, 2), 2);
  EXPECT_TRUE(verify_tower(t).pass());
}

TEST(Tower, DepthOneIsBase) {
  const auto base = exact_base(1, 2);
  const TensorTower<Scalar> t(base, 1);
  EXPECT_EQ(t.level(1)->blocks(), base.expectation.big()->blocks());
  EXPECT_EQ(t.expect(1, base.e), base.expectation(base.e));
}

TEST(Tower, BaseValidation) {
  auto bad = exact_base(1, 2);
  bad.e = Element<Scalar>::unit(bad.expectation.big());
  try {
    TensorTower<Scalar> t(bad, 3);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::BadBase);
  }
  auto half = exact_base(1, 2);
  half.e = Element<Scalar>::scalar(half.expectation.big(), Scalar(Rational(1, 2)));
  const TensorTower<Scalar> t(half, 2);
  EXPECT_FALSE(t.e_is_projection());
  EXPECT_TRUE(verify_tower(t).record("T").metadata.contains("NonProjection"));
}

TEST(Tower, CostGuard) {
  EXPECT_THROW(TensorTower<Scalar>(exact_base(2, 2), 9), Error);
}

TEST(TowerRokhlin, AllM) {
  const TensorTower<Scalar> t(exact_base(1, 2), 5);
  for (int m = 1; m < 5; ++m) {
    const auto rep = tower_rokhlin_check(t, m);
    EXPECT_TRUE(rep.commutators_exact_zero) << m;
    EXPECT_TRUE(rep.index_identity) << m;
  }
  EXPECT_THROW(tower_rokhlin_check(t, 5), Error);
}

TEST(TowerRokhlin, NegativeControl) {
  const auto base = exact_base(1, 2);
  const TensorTower<Scalar> t(base, 4);
  // e' = 1/4 * 1: (Index E) E(e') = 1/2
  const auto rep = tower_rokhlin_check(
      t, 2, std::optional(Element<Scalar>::scalar(base.expectation.big(), Scalar(Rational(1, 4)))));
  EXPECT_TRUE(rep.commutators_exact_zero);
  EXPECT_FALSE(rep.index_identity);
  EXPECT_NEAR(rep.defect_norm_numeric, 0.5, 1e-12);
}

TEST(Budget, ZeroPerturbation) {
  const TensorTower<double> t(float_base(2, 2), 3);
  const auto plan = make_plan(*t.base_algebra(), 3, 0.0, 1);
  const auto rep = perturbed_budget_check(t, plan, 1);
  EXPECT_EQ(rep.delta1, 0.0);
  EXPECT_EQ(rep.delta2, 0.0);
  EXPECT_TRUE(rep.pass());
}

TEST(Budget, HoldsAcrossScales) {
  const TensorTower<double> t(twisted_float_base(2, 2), 4);
  for (double eps : {1e-6, 1e-3, 0.5})
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto plan = make_plan(*t.base_algebra(), 4, eps, seed);
      const auto rep = perturbed_budget_check(t, plan, 1);
      EXPECT_TRUE(rep.budget_ok) << eps;
      EXPECT_TRUE(rep.triangle_ok) << eps;
      EXPECT_TRUE(rep.level_bound_ok) << eps;
      // the twisted e does not commute with the perturbation
      EXPECT_GT(rep.delta1, 0.1 * eps) << eps << " " << seed;
      EXPECT_LE(rep.delta1, 2 * rep.sinh_bound * 3 + 1e-12);
      EXPECT_EQ(rep.large, eps > 0.1);
    }
}

TEST(Budget, TwistedBaseIsValid) {
  const auto base = twisted_direct_sum_base(mm::direct_sum_example(2, 2));
  EXPECT_TRUE(base.e.is_projection());
  EXPECT_FALSE(base.e == base.expectation.inclusion.small_basis.front());
  const TensorTower<Scalar> t(base, 2);
  EXPECT_TRUE(verify_tower(t).pass());
  EXPECT_TRUE(tower_rokhlin_check(t, 1).index_identity);
}

TEST(Budget, CentralProjectionIsRigid) {
  // unitaries of B commute with a central e, so W e-hat W^* = e-hat
  const TensorTower<double> t(float_base(2, 2), 4);
  const auto rep = perturbed_budget_check(t, make_plan(*t.base_algebra(), 4, 0.5, 3), 1);
  EXPECT_LT(rep.delta1, 1e-14);
  EXPECT_TRUE(rep.pass());
}
