#pragma once

// Exact arithmetic in real number fields Q[x]/(p(x)) with a designated real
// embedding, fixed by an isolating interval for one real root of p.

#include <cmath>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "watatani/error.hpp"
#include "watatani/rational.hpp"

namespace watatani {

/// Dense univariate polynomial over Q, coefficients stored low degree first.
using Poly = std::vector<Rational>;

namespace poly {

inline void trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

inline int degree(const Poly& p) { return static_cast<int>(p.size()) - 1; }

inline Rational eval(const Poly& p, const Rational& x) {
  Rational acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

inline int sign(const Rational& r) { return sgn(r); }

inline Poly derivative(const Poly& p) {
  Poly d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<long>(i));
  trim(d);
  return d;
}

/// Remainder of a divided by b (b nonzero).
inline Poly remainder(Poly a, const Poly& b) {
  trim(a);
  const int db = degree(b);
  while (degree(a) >= db && !a.empty()) {
    const int shift = degree(a) - db;
    const Rational factor = a.back() / b.back();
    for (int i = 0; i <= db; ++i) a[i + shift] -= factor * b[i];
    a.pop_back();
    trim(a);
  }
  return a;
}

inline std::vector<Poly> sturm_sequence(const Poly& p) {
  std::vector<Poly> seq{p, derivative(p)};
  while (!seq.back().empty() && degree(seq.back()) > 0) {
    Poly r = remainder(seq[seq.size() - 2], seq.back());
    if (r.empty()) break;
    for (auto& c : r) c = -c;
    seq.push_back(std::move(r));
  }
  return seq;
}

inline int sign_changes(const std::vector<Poly>& seq, const Rational& x) {
  int changes = 0;
  int last = 0;
  for (const auto& q : seq) {
    const int s = sign(eval(q, x));
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

/// Number of distinct real roots in the half-open interval (lo, hi].
inline int count_roots(const Poly& p, const Rational& lo, const Rational& hi) {
  const auto seq = sturm_sequence(p);
  return sign_changes(seq, lo) - sign_changes(seq, hi);
}

inline std::string to_string(const Poly& p, const std::string& var) {
  std::ostringstream os;
  bool first = true;
  for (int i = degree(p); i >= 0; --i) {
    const Rational& c = p[i];
    if (c == 0) continue;
    Rational mag = abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    const bool unit = mag == 1;
    if (i == 0) {
      os << mag.get_str();
    } else {
      if (!unit) os << mag.get_str() << "*";
      os << var;
      if (i > 1) os << "^" << i;
    }
  }
  if (first) os << "0";
  return os.str();
}

}  // namespace poly

namespace detail {

inline std::vector<Integer> divisors(Integer n) {
  n = abs(n);
  std::vector<Integer> out;
  if (n == 0) return out;
  if (n > Integer("1000000000000")) {
    throw Error(ErrorKind::InvalidField,
                "constant term too large for automated irreducibility check; supply an attestation");
  }
  for (Integer d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      if (d * d != n) out.push_back(n / d);
    }
  }
  return out;
}

inline bool is_square(const Integer& n, Integer& root) {
  if (n < 0) return false;
  root = sqrt(n);
  return root * root == n;
}

/// Monic integer polynomial with the same splitting behaviour as the monic rational p.
inline std::vector<Integer> integral_model(const Poly& p) {
  Integer m = 1;
  for (const auto& c : p) {
    Integer den = c.get_den();
    mpz_lcm(m.get_mpz_t(), m.get_mpz_t(), den.get_mpz_t());
  }
  const int n = poly::degree(p);
  std::vector<Integer> q(p.size());
  for (int i = 0; i <= n; ++i) {
    Integer scale;
    mpz_pow_ui(scale.get_mpz_t(), m.get_mpz_t(), static_cast<unsigned long>(n - i));
    Rational v = p[i] * Rational(scale);
    q[i] = v.get_num();
  }
  return q;
}

inline Integer eval_int(const std::vector<Integer>& q, const Integer& x) {
  Integer acc = 0;
  for (auto it = q.rbegin(); it != q.rend(); ++it) acc = acc * x + *it;
  return acc;
}

/// Irreducibility over Q for monic p of degree <= 4: rational-root test plus
/// elimination of factorizations into two monic integer quadratics.
inline bool irreducible_upto_quartic(const Poly& p) {
  const int n = poly::degree(p);
  if (n == 1) return true;
  auto q = integral_model(p);
  if (q[0] == 0) return false;
  for (const auto& d : divisors(q[0])) {
    if (eval_int(q, d) == 0 || eval_int(q, -d) == 0) return false;
  }
  if (n <= 3) return true;
  // (y^2 + a y + b)(y^2 + c y + e) = y^4 + q3 y^3 + q2 y^2 + q1 y + q0
  const Integer &q3 = q[3], &q2 = q[2], &q1 = q[1], &q0 = q[0];
  for (const auto& dpos : divisors(q0)) {
    for (const Integer& b : {dpos, Integer(-dpos)}) {
      const Integer e = q0 / b;
      if (b != e) {
        const Integer num = q1 - b * q3;
        const Integer den = e - b;
        if (num % den != 0) continue;
        const Integer a = num / den;
        const Integer c = q3 - a;
        if (b + e + a * c == q2) return false;
      } else {
        if (q1 != b * q3) continue;
        // a + c = q3, a c = q2 - 2b
        const Integer disc = q3 * q3 - 4 * (q2 - 2 * b);
        Integer root;
        if (is_square(disc, root) && (q3 + root) % 2 == 0) return false;
      }
    }
  }
  return true;
}

}  // namespace detail

class NumberField;
using FieldPtr = std::shared_ptr<const NumberField>;

/// Q[x]/(p) with a real root of p singled out by an isolating interval.
class NumberField {
 public:
  /// `monic` lists coefficients low degree first; the leading coefficient must be 1.
  /// Degrees above 4 require `irreducibility_attested`.
  static FieldPtr make(Poly monic, Rational lo, Rational hi, bool irreducibility_attested = false,
                       std::string generator = "x") {
    return std::shared_ptr<const NumberField>(
        new NumberField(std::move(monic), std::move(lo), std::move(hi), irreducibility_attested,
                        std::move(generator)));
  }

  /// The plain rational field, realised as Q[x]/(x) with root 0.
  static FieldPtr rationals() {
    static const FieldPtr q = make(Poly{Rational(0), Rational(1)}, Rational(-1), Rational(1), false, "x");
    return q;
  }

  int degree() const { return static_cast<int>(poly_.size()) - 1; }
  const Poly& minimal_polynomial() const { return poly_; }
  const Interval& root_interval() const { return root_; }
  const std::string& generator_name() const { return generator_; }
  bool irreducibility_attested() const { return attested_; }
  bool is_rational() const { return degree() == 1; }

  /// Coordinates of x^k reduced modulo p, for 0 <= k <= 2*degree - 2.
  const std::vector<std::vector<Rational>>& power_table() const { return powers_; }

  /// Isolating interval for the designated root of width at most `width`.
  Interval refine_root(const Rational& width) const {
    if (degree() == 1) {
      Rational r = -poly_[0];
      return {r, r};
    }
    Interval iv = root_;
    const int s_lo = poly::sign(poly::eval(poly_, iv.lo));
    while (iv.width() > width) {
      Rational mid = iv.midpoint();
      const int s_mid = poly::sign(poly::eval(poly_, mid));
      if (s_mid == 0) return {mid, mid};  // unreachable for irreducible p of degree >= 2
      if (s_mid == s_lo) {
        iv.lo = mid;
      } else {
        iv.hi = mid;
      }
    }
    return iv;
  }

  bool same_as(const NumberField& other) const {
    return this == &other || (poly_ == other.poly_ && root_.lo == other.root_.lo && root_.hi == other.root_.hi);
  }

  std::string describe() const {
    return "Q[" + generator_ + "]/(" + poly::to_string(poly_, generator_) + ") root in (" + root_.lo.get_str() +
           "," + root_.hi.get_str() + ")";
  }

 private:
  NumberField(Poly monic, Rational lo, Rational hi, bool attested, std::string generator)
      : poly_(std::move(monic)), root_{std::move(lo), std::move(hi)}, attested_(attested),
        generator_(std::move(generator)) {
    poly::trim(poly_);
    if (poly_.size() < 2) throw Error(ErrorKind::InvalidField, "minimal polynomial must have degree >= 1");
    if (poly_.back() != 1) throw Error(ErrorKind::InvalidField, "minimal polynomial must be monic");
    if (degree() > 8) throw Error(ErrorKind::InvalidField, "degree above 8 is not supported");
    if (!(root_.lo < root_.hi)) throw Error(ErrorKind::InvalidField, "root interval must satisfy lo < hi");
    if (degree() > 4) {
      if (!attested_) {
        throw Error(ErrorKind::InvalidField,
                    "irreducibility of degree > 4 polynomials must be attested by the caller");
      }
    } else if (!detail::irreducible_upto_quartic(poly_)) {
      throw Error(ErrorKind::InvalidField, poly::to_string(poly_, generator_) + " is reducible over Q");
    }
    const int s_lo = poly::sign(poly::eval(poly_, root_.lo));
    const int s_hi = poly::sign(poly::eval(poly_, root_.hi));
    if (s_lo == 0 || s_hi == 0 || s_lo == s_hi) {
      throw Error(ErrorKind::InvalidField, "polynomial does not change sign across the root interval");
    }
    if (poly::count_roots(poly_, root_.lo, root_.hi) != 1) {
      throw Error(ErrorKind::InvalidField, "root interval does not isolate exactly one real root");
    }
    const int d = degree();
    powers_.assign(std::max(2 * d - 1, 1), std::vector<Rational>(d, Rational(0)));
    for (int k = 0; k < std::min(d, 2 * d - 1); ++k) powers_[k][k] = 1;
    for (int k = d; k < 2 * d - 1; ++k) {
      // x^k = x * x^(k-1); x^d = -(p_0 + ... + p_{d-1} x^{d-1})
      const auto& prev = powers_[k - 1];
      std::vector<Rational> next(d, Rational(0));
      for (int i = 0; i + 1 < d; ++i) next[i + 1] = prev[i];
      const Rational top = prev[d - 1];
      if (top != 0) {
        for (int i = 0; i < d; ++i) next[i] -= top * poly_[i];
      }
      powers_[k] = std::move(next);
    }
  }

  Poly poly_;
  Interval root_;
  bool attested_;
  std::string generator_;
  std::vector<std::vector<Rational>> powers_;
};

/// Element of a NumberField in the power basis 1, x, ..., x^(d-1).
class Scalar {
 public:
  Scalar() : Scalar(NumberField::rationals(), Rational(0)) {}
  Scalar(FieldPtr field, const Rational& value) : field_(std::move(field)), c_(field_->degree(), Rational(0)) {
    c_[0] = value;
  }
  Scalar(FieldPtr field, std::vector<Rational> coords) : field_(std::move(field)), c_(std::move(coords)) {
    if (static_cast<int>(c_.size()) != field_->degree()) {
      throw Error(ErrorKind::InvalidArgument, "coordinate vector length differs from field degree");
    }
  }
  explicit Scalar(const Rational& value) : Scalar(NumberField::rationals(), value) {}
  explicit Scalar(long value) : Scalar(NumberField::rationals(), Rational(value)) {}

  static Scalar zero(const FieldPtr& f) { return Scalar(f, Rational(0)); }
  static Scalar one(const FieldPtr& f) { return Scalar(f, Rational(1)); }
  static Scalar generator(const FieldPtr& f) {
    if (f->degree() == 1) return Scalar(f, -f->minimal_polynomial()[0]);
    std::vector<Rational> c(f->degree(), Rational(0));
    c[1] = 1;
    return Scalar(f, std::move(c));
  }

  const FieldPtr& field() const { return field_; }
  const std::vector<Rational>& coords() const { return c_; }

  bool is_zero() const {
    for (const auto& x : c_)
      if (x != 0) return false;
    return true;
  }
  bool is_rational() const {
    for (std::size_t i = 1; i < c_.size(); ++i)
      if (c_[i] != 0) return false;
    return true;
  }
  const Rational& rational_part() const { return c_[0]; }

  Scalar operator-() const {
    Scalar r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
  }

  Scalar& operator+=(const Scalar& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Scalar& operator-=(const Scalar& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Scalar& operator*=(const Scalar& o) {
    *this = *this * o;
    return *this;
  }
  Scalar& operator/=(const Scalar& o) {
    *this = *this / o;
    return *this;
  }

  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }

  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    a.check_same(b);
    const int d = a.field_->degree();
    if (d == 1) return Scalar(a.field_, a.c_[0] * b.c_[0]);
    std::vector<Rational> prod(2 * d - 1, Rational(0));
    for (int i = 0; i < d; ++i) {
      if (a.c_[i] == 0) continue;
      for (int j = 0; j < d; ++j) {
        if (b.c_[j] == 0) continue;
        prod[i + j] += a.c_[i] * b.c_[j];
      }
    }
    std::vector<Rational> out(prod.begin(), prod.begin() + d);
    const auto& table = a.field_->power_table();
    for (int k = d; k < 2 * d - 1; ++k) {
      if (prod[k] == 0) continue;
      for (int i = 0; i < d; ++i) {
        if (table[k][i] != 0) out[i] += prod[k] * table[k][i];
      }
    }
    return Scalar(a.field_, std::move(out));
  }

  friend Scalar operator*(const Rational& r, Scalar a) {
    for (auto& x : a.c_) x *= r;
    return a;
  }

  friend Scalar operator/(const Scalar& a, const Scalar& b) { return a * b.inverse(); }

  /// Multiplicative inverse via the multiplication-by-a matrix.
  Scalar inverse() const {
    if (is_zero()) throw Error(ErrorKind::DivisionByZero, "inverse of zero scalar");
    const int d = field_->degree();
    if (d == 1) return Scalar(field_, Rational(1) / c_[0]);
    // column j of M holds coordinates of a * x^j
    std::vector<std::vector<Rational>> m(d, std::vector<Rational>(d + 1, Rational(0)));
    Scalar basis = one(field_);
    const Scalar x = generator(field_);
    for (int j = 0; j < d; ++j) {
      const Scalar col = *this * basis;
      for (int i = 0; i < d; ++i) m[i][j] = col.c_[i];
      basis = basis * x;
    }
    m[0][d] = 1;
    for (int col = 0; col < d; ++col) {
      int piv = col;
      while (piv < d && m[piv][col] == 0) ++piv;
      if (piv == d) throw Error(ErrorKind::DivisionByZero, "scalar is a zero divisor; field is not irreducible");
      std::swap(m[piv], m[col]);
      const Rational inv = Rational(1) / m[col][col];
      for (int k = col; k <= d; ++k) m[col][k] *= inv;
      for (int r = 0; r < d; ++r) {
        if (r == col || m[r][col] == 0) continue;
        const Rational f = m[r][col];
        for (int k = col; k <= d; ++k) m[r][k] -= f * m[col][k];
      }
    }
    std::vector<Rational> out(d);
    for (int i = 0; i < d; ++i) out[i] = m[i][d];
    return Scalar(field_, std::move(out));
  }

  Scalar pow(long e) const {
    if (e < 0) return inverse().pow(-e);
    Scalar result = one(field_), base = *this;
    while (e > 0) {
      if (e & 1) result = result * base;
      base = base * base;
      e >>= 1;
    }
    return result;
  }

  friend bool operator==(const Scalar& a, const Scalar& b) {
    a.check_same(b);
    return a.c_ == b.c_;
  }
  friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

  /// Interval of width <= tol containing the real value under the designated embedding.
  Interval embed(const Rational& tol) const {
    const int d = field_->degree();
    if (d == 1 || is_rational()) return {c_[0], c_[0]};
    // Lipschitz bound of the coordinate polynomial over the initial root interval.
    const Interval& root = field_->root_interval();
    const Rational bound = std::max(abs(root.lo), abs(root.hi));
    Rational lipschitz = 0;
    Rational power = 1;
    for (int i = 1; i < d; ++i) {
      lipschitz += abs(c_[i]) * Rational(i) * power;
      power *= bound;
    }
    Rational width = lipschitz > 0 ? Rational(tol / (2 * lipschitz)) : tol;
    for (;;) {
      const Interval r = field_->refine_root(width);
      Interval acc{c_[d - 1], c_[d - 1]};
      for (int i = d - 2; i >= 0; --i) {
        acc = acc * r;
        acc.lo += c_[i];
        acc.hi += c_[i];
      }
      if (acc.width() <= tol) return acc;
      width /= 2;
    }
  }

  double to_double() const {
    static const Rational tol = parse_rational("1e-40");
    return embed(tol).to_double();
  }

  /// Sign of the real value: exact zero test first, then interval refinement.
  int sign() const {
    if (is_zero()) return 0;
    if (is_rational()) return sgn(c_[0]);
    Rational tol = parse_rational("1e-6");
    for (;;) {
      const Interval iv = embed(tol);
      if (iv.lo > 0) return 1;
      if (iv.hi < 0) return -1;
      // A nonzero element of an irreducible field has nonzero real value, so refinement terminates.
      tol /= 1024;
    }
  }

  std::string to_string() const {
    const int d = field_->degree();
    if (d == 1) return c_[0].get_str();
    Poly p(c_.begin(), c_.end());
    poly::trim(p);
    return poly::to_string(p, field_->generator_name());
  }

  friend std::ostream& operator<<(std::ostream& os, const Scalar& s) { return os << s.to_string(); }

 private:
  void check_same(const Scalar& o) const {
    if (field_ != o.field_ && !field_->same_as(*o.field_)) {
      throw Error(ErrorKind::FieldMismatch, field_->describe() + " vs " + o.field_->describe());
    }
  }

  FieldPtr field_;
  std::vector<Rational> c_;
};

enum class FieldOp { add, sub, mul, div };

inline Scalar field_arith(const Scalar& a, const Scalar& b, FieldOp op) {
  switch (op) {
    case FieldOp::add: return a + b;
    case FieldOp::sub: return a - b;
    case FieldOp::mul: return a * b;
    case FieldOp::div:
      if (b.is_zero()) throw Error(ErrorKind::DivisionByZero, "division by zero scalar");
      return a / b;
  }
  return a;
}

inline Interval embed_real(const Scalar& a, const Rational& tol) {
  if (tol <= 0) throw Error(ErrorKind::InvalidArgument, "embedding tolerance must be positive");
  return a.embed(tol);
}

/// Built-in fields used throughout: Q(s) with s^4 = s^2 + 1, and Q(2cos(pi/m)).
namespace fields {

/// Q[s]/(s^4 - s^2 - 1) with s = sqrt of the golden ratio, root in (1,2).
inline FieldPtr golden_quartic() {
  static const FieldPtr f = NumberField::make(
      Poly{Rational(-1), Rational(0), Rational(-1), Rational(0), Rational(1)}, Rational(1), Rational(2), false, "s");
  return f;
}

/// Minimal polynomial data of 2cos(pi/m) for 3 <= m <= 12.
struct LoopParameter {
  Poly poly;
  Rational lo;
  Rational hi;
};

inline LoopParameter two_cos_pi_over(int m) {
  auto r = [](long n, long d = 1) { return make_rational(n, d); };
  switch (m) {
    case 3: return {{r(-1), r(1)}, r(0), r(2)};
    case 4: return {{r(-2), r(0), r(1)}, r(1), r(2)};
    case 5: return {{r(-1), r(-1), r(1)}, r(3, 2), r(17, 10)};
    case 6: return {{r(-3), r(0), r(1)}, r(17, 10), r(9, 5)};
    case 7: return {{r(1), r(-2), r(-1), r(1)}, r(9, 5), r(37, 20)};
    case 8: return {{r(2), r(0), r(-4), r(0), r(1)}, r(9, 5), r(47, 25)};
    case 9: return {{r(-1), r(-3), r(0), r(1)}, r(187, 100), r(19, 10)};
    case 10: return {{r(5), r(0), r(-5), r(0), r(1)}, r(19, 10), r(191, 100)};
    case 11: return {{r(-1), r(3), r(3), r(-4), r(-1), r(1)}, r(191, 100), r(193, 100)};
    case 12: return {{r(1), r(0), r(-4), r(0), r(1)}, r(193, 100), r(97, 50)};
    default: throw Error(ErrorKind::InvalidArgument, "2cos(pi/m) built in only for 3 <= m <= 12");
  }
}

/// Q(2cos(pi/m)); the m = 11 quintic carries a built-in irreducibility attestation
/// (it is the minimal polynomial of an algebraic integer of degree phi(22)/2 = 5).
inline FieldPtr two_cos_field(int m, std::string generator = "c") {
  auto lp = two_cos_pi_over(m);
  const bool attested = poly::degree(lp.poly) > 4;
  return NumberField::make(std::move(lp.poly), lp.lo, lp.hi, attested, std::move(generator));
}

}  // namespace fields

}  // namespace watatani
