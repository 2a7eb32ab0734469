#pragma once

// The ring of integers Z[s]/(s^4 - s^2 - 1) with overflow-checked 64-bit
// coordinates. Every coefficient that rho, E_rho and the quasi-basis produce
// from monomials is an algebraic integer (1/d = s^2 - 1, 1/sqrt d = s^3 - s),
// so the O_2 sweeps run on this type and convert to Scalar at the boundary.

#include <array>
#include <cstdint>
#include <string>

#include "watatani/error.hpp"
#include "watatani/number_field.hpp"

namespace watatani {

class GoldenInt {
 public:
  using Coords = std::array<std::int64_t, 4>;

  constexpr GoldenInt() = default;
  constexpr explicit GoldenInt(std::int64_t v) : c_{v, 0, 0, 0} {}
  constexpr explicit GoldenInt(Coords c) : c_(c) {}

  static GoldenInt s() { return GoldenInt(Coords{0, 1, 0, 0}); }

  const Coords& coords() const { return c_; }
  bool is_zero() const { return c_[0] == 0 && c_[1] == 0 && c_[2] == 0 && c_[3] == 0; }

  GoldenInt& operator+=(const GoldenInt& o) {
    for (int k = 0; k < 4; ++k)
      if (__builtin_add_overflow(c_[k], o.c_[k], &c_[k])) overflow();
    return *this;
  }
  GoldenInt& operator-=(const GoldenInt& o) {
    for (int k = 0; k < 4; ++k)
      if (__builtin_sub_overflow(c_[k], o.c_[k], &c_[k])) overflow();
    return *this;
  }
  friend GoldenInt operator+(GoldenInt a, const GoldenInt& b) { return a += b; }
  friend GoldenInt operator-(GoldenInt a, const GoldenInt& b) { return a -= b; }
  GoldenInt operator-() const { return GoldenInt() - *this; }

  friend GoldenInt operator*(const GoldenInt& a, const GoldenInt& b) {
    __int128 p[7] = {};
    for (int i = 0; i < 4; ++i) {
      if (a.c_[i] == 0) continue;
      for (int j = 0; j < 4; ++j) p[i + j] += static_cast<__int128>(a.c_[i]) * b.c_[j];
    }
    // s^4 = s^2 + 1, s^5 = s^3 + s, s^6 = 2 s^2 + 1
    const __int128 r0 = p[0] + p[4] + p[6];
    const __int128 r1 = p[1] + p[5];
    const __int128 r2 = p[2] + p[4] + 2 * p[6];
    const __int128 r3 = p[3] + p[5];
    return GoldenInt(Coords{narrow(r0), narrow(r1), narrow(r2), narrow(r3)});
  }
  GoldenInt& operator*=(const GoldenInt& o) { return *this = *this * o; }

  friend bool operator==(const GoldenInt&, const GoldenInt&) = default;

  Scalar to_scalar(const FieldPtr& golden) const {
    std::vector<Rational> c;
    for (auto v : c_) c.emplace_back(static_cast<long>(v));
    return Scalar(golden, std::move(c));
  }

  /// Throws InvalidArgument unless x lies in Z[s] with 64-bit coordinates.
  static GoldenInt from_scalar(const Scalar& x) {
    if (x.field()->degree() != 4) throw Error(ErrorKind::FieldMismatch, "expected Q[s]/(s^4 - s^2 - 1)");
    Coords c{};
    for (int k = 0; k < 4; ++k) {
      const Rational& q = x.coords()[k];
      if (q.get_den() != 1 || !q.get_num().fits_slong_p()) {
        throw Error(ErrorKind::InvalidArgument, "coefficient is not a 64-bit algebraic integer");
      }
      c[k] = q.get_num().get_si();
    }
    return GoldenInt(c);
  }

  std::string to_string() const {
    std::string out;
    static const char* names[] = {"", "s", "s^2", "s^3"};
    for (int k = 3; k >= 0; --k) {
      const std::int64_t v = c_[k];
      if (v == 0) continue;
      if (!out.empty()) out += v < 0 ? " - " : " + ";
      else if (v < 0) out += "-";
      const std::int64_t m = v < 0 ? -v : v;
      if (k == 0 || m != 1) out += std::to_string(m);
      out += names[k];
    }
    return out.empty() ? "0" : out;
  }

 private:
  [[noreturn]] static void overflow() {
    throw Error(ErrorKind::InvalidArgument, "64-bit overflow in Z[s]/(s^4 - s^2 - 1)");
  }
  static std::int64_t narrow(__int128 v) {
    if (v > INT64_MAX || v < INT64_MIN) overflow();
    return static_cast<std::int64_t>(v);
  }

  Coords c_{};
};

}  // namespace watatani
