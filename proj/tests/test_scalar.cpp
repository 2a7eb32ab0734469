#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "watatani/number_field.hpp"

using namespace watatani;

namespace {

Scalar make(const FieldPtr& f, std::initializer_list<long> coords) {
  std::vector<Rational> c;
  for (long v : coords) c.emplace_back(v);
  c.resize(f->degree());
  return Scalar(f, c);
}

Scalar random_scalar(const FieldPtr& f, std::mt19937_64& rng) {
  std::uniform_int_distribution<long> num(-9, 9), den(1, 5);
  std::vector<Rational> c;
  for (int k = 0; k < f->degree(); ++k) {
    Rational r(num(rng), den(rng));
    r.canonicalize();
    c.push_back(r);
  }
  return Scalar(f, c);
}

}  // namespace

TEST(GoldenQuartic, DefiningRelations) {
  auto f = fields::golden_quartic();
  const Scalar s = Scalar::generator(f);
  const Scalar d = s * s;
  EXPECT_EQ(d * d, make(f, {1, 0, 1}));
  EXPECT_EQ(d.inverse(), make(f, {-1, 0, 1}));
  EXPECT_EQ(s.inverse(), make(f, {0, -1, 0, 1}));
  EXPECT_EQ(field_arith(Scalar::one(f), d, FieldOp::div) + field_arith(Scalar::one(f), d * d, FieldOp::div),
            Scalar::one(f));
}

TEST(GoldenQuartic, Embedding) {
  auto f = fields::golden_quartic();
  const Scalar s = Scalar::generator(f);
  const Rational tol = parse_rational("1e-12");
  const auto phi = embed_real(s * s, tol);
  EXPECT_LE(phi.width(), tol);
  EXPECT_NEAR(phi.to_double(), std::numbers::phi, 1e-12);
  const auto d2 = embed_real(s * s * s * s, tol);
  const double c = std::cos(std::numbers::pi / 5);
  EXPECT_LT(std::abs(d2.to_double() - 4 * c * c), 1e-12);
}

TEST(Rationals, EmbedExactly) {
  auto q = NumberField::rationals();
  const auto iv = embed_real(Scalar(q, Rational(3, 2)), Rational(1, 10));
  EXPECT_EQ(iv.lo, Rational(3, 2));
  EXPECT_EQ(iv.hi, Rational(3, 2));
}

TEST(Errors, MismatchAndDivision) {
  auto f = fields::golden_quartic();
  auto q = NumberField::rationals();
  try {
    (void)field_arith(Scalar::one(f), Scalar::one(q), FieldOp::add);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FieldMismatch);
  }
  try {
    (void)field_arith(Scalar::one(f), Scalar::zero(f), FieldOp::div);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DivisionByZero);
  }
}

TEST(NumberFieldConstruction, RejectsBadInput) {
  auto kind = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  // reducible: x^2 - 4
  EXPECT_EQ(kind([] { NumberField::make({Rational(-4), 0, 1}, Rational(1), Rational(3)); }), ErrorKind::InvalidField);
  // reducible quartic (x^2+1)(x^2-2) = x^4 - x^2 - 2
  EXPECT_EQ(kind([] { NumberField::make({Rational(-2), 0, Rational(-1), 0, 1}, Rational(1), Rational(2)); }),
            ErrorKind::InvalidField);
  // no sign change
  EXPECT_EQ(kind([] { NumberField::make({Rational(-2), 0, 1}, Rational(2), Rational(3)); }), ErrorKind::InvalidField);
  // degree 5 without attestation
  EXPECT_EQ(kind([] { NumberField::make({Rational(-2), 0, 0, 0, 0, 1}, Rational(1), Rational(2)); }),
            ErrorKind::InvalidField);
}

TEST(TwoCosFields, EmbedToTwoCos) {
  for (int m = 3; m <= 12; ++m) {
    auto f = fields::two_cos_field(m);
    const double v = Scalar::generator(f).to_double();
    EXPECT_NEAR(v, 2 * std::cos(std::numbers::pi / m), 1e-13) << "m=" << m;
  }
}

TEST(FieldLaws, RandomizedAlgebraicLaws) {
  std::mt19937_64 rng(20240611);
  for (const auto& f : {fields::golden_quartic(), fields::two_cos_field(7), fields::two_cos_field(11)}) {
    for (int trial = 0; trial < 60; ++trial) {
      const Scalar a = random_scalar(f, rng), b = random_scalar(f, rng), c = random_scalar(f, rng);
      EXPECT_EQ((a + b) + c, a + (b + c));
      EXPECT_EQ((a * b) * c, a * (b * c));
      EXPECT_EQ(a * b, b * a);
      EXPECT_EQ(a * (b + c), a * b + a * c);
      if (!a.is_zero()) {
        EXPECT_EQ(a * a.inverse(), Scalar::one(f));
      }
    }
  }
}

TEST(FieldLaws, EmbeddingOfProductLiesInIntervalProduct) {
  std::mt19937_64 rng(7);
  auto f = fields::golden_quartic();
  const Rational tol(1, 1000000);
  for (int trial = 0; trial < 50; ++trial) {
    const Scalar a = random_scalar(f, rng), b = random_scalar(f, rng);
    const auto ia = embed_real(a, tol), ib = embed_real(b, tol), iab = embed_real(a * b, tol);
    const auto prod = ia * ib;
    EXPECT_GE(iab.lo, prod.lo - 2 * tol);
    EXPECT_LE(iab.hi, prod.hi + 2 * tol);
  }
}

TEST(Sign, ExactZeroAndSmallValues) {
  auto f = fields::golden_quartic();
  const Scalar s = Scalar::generator(f);
  EXPECT_EQ((s * s * s * s - s * s - Scalar::one(f)).sign(), 0);
  EXPECT_EQ((Scalar(f, Rational(4)) - s * s * s * s).sign(), 1);
  EXPECT_EQ((s - Scalar(f, Rational(2))).sign(), -1);
}
