#include <gtest/gtest.h>

#include <random>

#include "watatani/cuntz.hpp"

using namespace watatani;
using namespace watatani::cuntz;

namespace {

const RhoEndomorphism& rho() {
  static const RhoEndomorphism r;
  return r;
}

FieldPtr F() { return rho().field(); }

CuntzElement mono(const std::string& mu, const std::string& nu) {
  return CuntzElement::monomial(F(), WordPair{Word::parse(mu), Word::parse(nu)}, Scalar::one(F()));
}

WordPair random_pair(std::mt19937_64& rng, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len);
  auto word = [&] {
    const int n = len(rng);
    return Word{rng() & Word::mask(n), n};
  };
  const Word mu = word();
  return WordPair{mu, word()};
}

}  // namespace

TEST(CuntzMultiply, ContractionRule) {
  EXPECT_TRUE((mono("", "1") * mono("2", "")).is_zero());
  EXPECT_EQ(mono("1", "1") * mono("1", "1"), mono("1", "1"));
  EXPECT_EQ(mono("1", "2") * mono("2", "1"), mono("1", "1"));
  const auto p = mono("1", "2") * mono("2", "1");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.terms().begin()->first, (WordPair{Word::parse("1"), Word::parse("1")}));
}

TEST(CuntzNormalize, UnitRelation) {
  const auto one = CuntzElement::unit(F());
  const auto n1 = one.normalize(1);
  EXPECT_EQ(n1.terms().size(), 2u);
  EXPECT_TRUE(n1.terms().count({Word::parse("1"), Word::parse("1")}));
  EXPECT_TRUE(n1.terms().count({Word::parse("2"), Word::parse("2")}));
  EXPECT_EQ(mono("1", "1") + mono("2", "2"), one);

  const auto e = mono("1", "2").normalize(2);
  EXPECT_EQ(e.terms().size(), 2u);
  EXPECT_TRUE(e.terms().count({Word::parse("11"), Word::parse("21")}));
  EXPECT_TRUE(e.terms().count({Word::parse("12"), Word::parse("22")}));

  try {
    (void)mono("11", "22").normalize(1);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::LevelTooSmall);
  }
}

TEST(CuntzNormalize, IdempotentAndStepwise) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    CuntzElement a(F());
    for (int k = 0; k < 3; ++k) a.add_term(random_pair(rng, 3), Scalar(F(), Rational(k + 1)));
    const auto n3 = a.normalize(3);
    EXPECT_EQ(n3.normalize(3).terms(), n3.terms());
    EXPECT_EQ(a.normalize(4).terms(), n3.normalize(4).terms());
    EXPECT_EQ(n3, a);
  }
}

TEST(CuntzAlgebra, AssociativityAndAdjoint) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = CuntzElement::monomial(F(), random_pair(rng, 3), Scalar::one(F()));
    const auto b = CuntzElement::monomial(F(), random_pair(rng, 3), Scalar::one(F()));
    const auto c = CuntzElement::monomial(F(), random_pair(rng, 3), Scalar::one(F()));
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ((a * b).adjoint(), b.adjoint() * a.adjoint());
    EXPECT_EQ(a.adjoint().adjoint(), a);
  }
}

TEST(Rho, RelationsAndUnit) {
  const auto rep = rho_relation_check(rho());
  EXPECT_TRUE(rep.pass());
  const auto one = CuntzElement::unit(F());
  EXPECT_EQ(apply_rho(rho(), one), one);
  EXPECT_EQ(rho().image_adjoint(1) * rho().image(1), one);
}

TEST(Rho, MultiplicativeAndStarPreserving) {
  std::mt19937_64 rng(13);
  RhoWorkspace ws(rho());
  for (int trial = 0; trial < 60; ++trial) {
    const auto a = CuntzElement::monomial(F(), random_pair(rng, 2), Scalar::one(F()));
    const auto b = CuntzElement::monomial(F(), random_pair(rng, 2), Scalar::one(F()));
    EXPECT_EQ(ws.apply_rho(a * b), ws.apply_rho(a) * ws.apply_rho(b));
    EXPECT_EQ(ws.apply_rho(a.adjoint()), ws.apply_rho(a).adjoint());
  }
}

TEST(ERho, Examples) {
  const auto& r = rho();
  const auto one = CuntzElement::unit(F());
  const Scalar inv_d2 = r.inv_d() * r.inv_d();
  EXPECT_EQ(e_rho(r, mono("1", "1")), CuntzElement::scalar(F(), inv_d2));
  EXPECT_EQ(e_rho(r, one), one);
  EXPECT_EQ(e_rho(r, r.image(2)), r.image(2));
}

TEST(QuasiBasis, IzumiSweep) {
  const auto r0 = quasi_basis_identity_check(rho(), 0);
  EXPECT_TRUE(r0.pass());
  EXPECT_EQ(r0.instance_count, 1u);
  const auto r3 = quasi_basis_identity_check(rho(), 3);
  EXPECT_TRUE(r3.pass()) << r3.failures.size();
  EXPECT_EQ(r3.instance_count, 225u);
  EXPECT_LT(r3.index_minus_four_cos_sq_numeric, 1e-12);
  EXPECT_TRUE(r3.irreducible_by_index);
}

TEST(CeAxioms, SweepLengthOne) {
  const auto rep = ce_axiom_check(rho(), 1);
  EXPECT_TRUE(rep.pass());
  EXPECT_EQ(rep.bimodularity_count, 9u * 9u * 9u);
}

TEST(CeAxioms, SpecificInstances) {
  RhoWorkspace ws(rho());
  const auto a = ws.apply_rho(mono("1", ""));
  const auto x = mono("2", "2");
  EXPECT_EQ(ws.e_rho(a * x), a * ws.e_rho(x));
  EXPECT_EQ(ws.e_rho(mono("", "1")), ws.e_rho(mono("1", "")).adjoint());
}

TEST(Commutant, OnlyScalars) {
  EXPECT_EQ(commutant_truncation(rho(), 0).size(), 1u);
  const auto rep = commutant_check(rho(), 2);
  EXPECT_TRUE(rep.pass());
  EXPECT_EQ(rep.basis.size(), 1u);
}

TEST(ERhoImage, FixesImageAndLandsInIt) {
  const auto rep = e_rho_image_check(rho(), 1);
  EXPECT_TRUE(rep.pass());
}

TEST(GoldenIntPath, AgreesWithGenericField) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> coef(-3, 3);
  auto random_element = [&] {
    CuntzElement x(F());
    for (int k = 0; k < 3; ++k) {
      std::vector<Rational> c(4);
      for (auto& v : c) v = coef(rng);
      x.add_term(random_pair(rng, 2), Scalar(F(), std::move(c)));
    }
    return x;
  };
  RhoWorkspace slow(rho());
  FastRhoWorkspace fast(rho());
  for (int t = 0; t < 100; ++t) {
    const auto a = random_element(), b = random_element();
    EXPECT_EQ(to_exact(to_fast(a)), a);
    EXPECT_EQ(to_exact(to_fast(a) * to_fast(b)), a * b);
    EXPECT_EQ(to_exact(fast.e_rho(to_fast(a))), slow.e_rho(a));
  }
}
