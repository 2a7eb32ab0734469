#pragma once

// Finite-dimensional C*-algebras M_{n_1} + ... + M_{n_k} with real entries,
// over an exact number field (T = Scalar) or in float mode (T = double).
// Elements are coordinate vectors against the matrix units in lexicographic
// (block, row, col) order; linear maps are matrices on those coordinates.

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "watatani/error.hpp"
#include "watatani/linalg.hpp"
#include "watatani/number_field.hpp"

namespace watatani::mm {

/// Sparsity test for data flow: exact zero in both modes (float tolerances apply only to comparisons).
template <class T>
bool structural_zero(const T& x) {
  if constexpr (scalar_traits<T>::exact) return scalar_traits<T>::is_zero(x);
  else return x == T{};
}

template <class T>
class Algebra;

template <class T>
using AlgebraPtr = std::shared_ptr<const Algebra<T>>;

template <class T>
class Algebra {
 public:
  static constexpr double kDefaultTolerance = 1e-9;

  static AlgebraPtr<T> make(std::vector<int> blocks, T zero, T one, double tolerance = kDefaultTolerance) {
    if (blocks.empty()) throw Error(ErrorKind::InvalidArgument, "a multi-matrix algebra needs at least one block");
    for (int n : blocks)
      if (n <= 0) throw Error(ErrorKind::InvalidArgument, "block sizes must be positive");
    return AlgebraPtr<T>(new Algebra(std::move(blocks), std::move(zero), std::move(one), tolerance));
  }

  const std::vector<int>& blocks() const { return blocks_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  int block_size(int b) const { return blocks_[b]; }
  std::size_t dim() const { return dim_; }
  std::size_t offset(int b) const { return offsets_[b]; }
  std::size_t index(int b, int r, int c) const { return offsets_[b] + static_cast<std::size_t>(r * blocks_[b] + c); }

  /// (block, row, col) of coordinate k.
  std::tuple<int, int, int> locate(std::size_t k) const {
    int b = 0;
    while (b + 1 < block_count() && offsets_[b + 1] <= k) ++b;
    const int local = static_cast<int>(k - offsets_[b]);
    return {b, local / blocks_[b], local % blocks_[b]};
  }

  const T& zero() const { return zero_; }
  const T& one() const { return one_; }
  T from_rational(const Rational& r) const { return scalar_traits<T>::from_rational(r, zero_); }
  double tolerance() const { return tolerance_; }
  static constexpr bool exact() { return scalar_traits<T>::exact; }

  bool same_shape(const Algebra& o) const { return blocks_ == o.blocks_; }

  std::string describe() const {
    std::string s;
    for (int n : blocks_) {
      if (!s.empty()) s += " + ";
      s += "M" + std::to_string(n);
    }
    return s;
  }

 private:
  Algebra(std::vector<int> blocks, T zero, T one, double tolerance)
      : blocks_(std::move(blocks)), zero_(std::move(zero)), one_(std::move(one)), tolerance_(tolerance) {
    for (int n : blocks_) {
      offsets_.push_back(dim_);
      dim_ += static_cast<std::size_t>(n) * n;
    }
  }

  std::vector<int> blocks_;
  std::vector<std::size_t> offsets_;
  std::size_t dim_ = 0;
  T zero_;
  T one_;
  double tolerance_;
};

inline AlgebraPtr<Scalar> exact_algebra(std::vector<int> blocks, const FieldPtr& field = NumberField::rationals()) {
  return Algebra<Scalar>::make(std::move(blocks), Scalar::zero(field), Scalar::one(field));
}

inline AlgebraPtr<double> float_algebra(std::vector<int> blocks, double tolerance = 1e-9) {
  return Algebra<double>::make(std::move(blocks), 0.0, 1.0, tolerance);
}

template <class T>
class Element {
 public:
  explicit Element(AlgebraPtr<T> alg) : alg_(std::move(alg)), v_(alg_->dim(), alg_->zero()) {}
  Element(AlgebraPtr<T> alg, std::vector<T> coords) : alg_(std::move(alg)), v_(std::move(coords)) {
    if (v_.size() != alg_->dim()) throw Error(ErrorKind::InvalidArgument, "coordinate vector has the wrong length");
  }

  static Element unit(const AlgebraPtr<T>& a) {
    Element e(a);
    for (int b = 0; b < a->block_count(); ++b)
      for (int i = 0; i < a->block_size(b); ++i) e.at(b, i, i) = a->one();
    return e;
  }
  static Element matrix_unit(const AlgebraPtr<T>& a, int b, int r, int c) {
    Element e(a);
    e.at(b, r, c) = a->one();
    return e;
  }
  static Element basis(const AlgebraPtr<T>& a, std::size_t k) {
    Element e(a);
    e.v_[k] = a->one();
    return e;
  }
  /// Central projection onto block b.
  static Element block_unit(const AlgebraPtr<T>& a, int b) {
    Element e(a);
    for (int i = 0; i < a->block_size(b); ++i) e.at(b, i, i) = a->one();
    return e;
  }
  static Element scalar(const AlgebraPtr<T>& a, const T& s) { return s * unit(a); }

  const AlgebraPtr<T>& algebra() const { return alg_; }
  const std::vector<T>& coords() const { return v_; }
  T& operator[](std::size_t k) { return v_[k]; }
  const T& operator[](std::size_t k) const { return v_[k]; }
  T& at(int b, int r, int c) { return v_[alg_->index(b, r, c)]; }
  const T& at(int b, int r, int c) const { return v_[alg_->index(b, r, c)]; }

  Matrix<T> block(int b) const {
    const int n = alg_->block_size(b);
    Matrix<T> m(n, n, alg_->zero());
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = at(b, r, c);
    return m;
  }
  void set_block(int b, const Matrix<T>& m) {
    const int n = alg_->block_size(b);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) at(b, r, c) = m(r, c);
  }

  Eigen::MatrixXd block_double(int b) const {
    const int n = alg_->block_size(b);
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = scalar_traits<T>::to_double(at(b, r, c));
    return m;
  }

  Element& operator+=(const Element& o) {
    check(o);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
    return *this;
  }
  Element& operator-=(const Element& o) {
    check(o);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
    return *this;
  }
  friend Element operator+(Element a, const Element& b) { return a += b; }
  friend Element operator-(Element a, const Element& b) { return a -= b; }
  Element operator-() const { return Element(alg_) - *this; }
  friend Element operator*(const T& s, Element a) {
    for (auto& x : a.v_) x = s * x;
    return a;
  }

  friend Element operator*(const Element& a, const Element& b) {
    a.check(b);
    Element out(a.alg_);
    const auto& alg = *a.alg_;
    for (int blk = 0; blk < alg.block_count(); ++blk) {
      const int n = alg.block_size(blk);
      const std::size_t off = alg.offset(blk);
      for (int r = 0; r < n; ++r)
        for (int m = 0; m < n; ++m) {
          const T& x = a.v_[off + r * n + m];
          if (structural_zero(x)) continue;
          for (int c = 0; c < n; ++c) {
            const T& y = b.v_[off + m * n + c];
            if (structural_zero(y)) continue;
            out.v_[off + r * n + c] += x * y;
          }
        }
    }
    return out;
  }

  /// Blockwise transpose (entries are real).
  Element adjoint() const {
    Element out(alg_);
    for (int b = 0; b < alg_->block_count(); ++b) {
      const int n = alg_->block_size(b);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) out.at(b, c, r) = scalar_traits<T>::conj(at(b, r, c));
    }
    return out;
  }

  /// Exact zero in exact mode; max |entry| <= tolerance in float mode.
  bool is_zero() const {
    if constexpr (scalar_traits<T>::exact) {
      for (const auto& x : v_)
        if (!scalar_traits<T>::is_zero(x)) return false;
      return true;
    } else {
      return max_abs() <= alg_->tolerance();
    }
  }
  friend bool operator==(const Element& a, const Element& b) { return (a - b).is_zero(); }

  double max_abs() const {
    double m = 0.0;
    for (const auto& x : v_) m = std::max(m, scalar_traits<T>::magnitude(x));
    return m;
  }

  T block_trace(int b) const {
    T t = alg_->zero();
    for (int i = 0; i < alg_->block_size(b); ++i) t += at(b, i, i);
    return t;
  }

  bool is_self_adjoint() const { return *this == adjoint(); }
  bool is_projection() const { return is_self_adjoint() && *this * *this == *this; }

  /// Scalar c with x = c * 1, if any.
  std::optional<T> scalar_value() const {
    const T c = v_.empty() ? alg_->zero() : at(0, 0, 0);
    if (scalar(alg_, c) == *this) return c;
    return std::nullopt;
  }

  std::string to_string() const {
    std::string s;
    for (int b = 0; b < alg_->block_count(); ++b) {
      if (b > 0) s += " + ";
      s += "[";
      const int n = alg_->block_size(b);
      for (int r = 0; r < n; ++r) {
        if (r > 0) s += "; ";
        for (int c = 0; c < n; ++c) {
          if (c > 0) s += ", ";
          if constexpr (scalar_traits<T>::exact) s += at(b, r, c).to_string();
          else s += fmt::format("{:.15g}", at(b, r, c));
        }
      }
      s += "]";
    }
    return s;
  }

 private:
  void check(const Element& o) const {
    if (alg_ != o.alg_ && !alg_->same_shape(*o.alg_)) {
      throw Error(ErrorKind::InvalidArgument, "elements of different multi-matrix algebras");
    }
  }

  AlgebraPtr<T> alg_;
  std::vector<T> v_;
};

template <class T>
std::vector<Element<T>> matrix_unit_basis(const AlgebraPtr<T>& a) {
  std::vector<Element<T>> out;
  for (std::size_t k = 0; k < a->dim(); ++k) out.push_back(Element<T>::basis(a, k));
  return out;
}

/// Largest singular value, blockwise maximum, computed in double precision.
template <class T>
double operator_norm(const Element<T>& x) {
  double m = 0.0;
  for (int b = 0; b < x.algebra()->block_count(); ++b) {
    const auto blk = x.block_double(b);
    if (blk.size() == 0) continue;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(blk);
    m = std::max(m, svd.singularValues()(0));
  }
  return m;
}

/// Matrix of a linear map given by its action on the matrix units.
template <class T, class F>
Matrix<T> linear_map_matrix(const AlgebraPtr<T>& a, F&& f) {
  Matrix<T> m(a->dim(), a->dim(), a->zero());
  for (std::size_t k = 0; k < a->dim(); ++k) {
    const Element<T> y = f(Element<T>::basis(a, k));
    for (std::size_t r = 0; r < a->dim(); ++r) m(r, k) = y[r];
  }
  return m;
}

template <class T>
Element<T> apply(const Matrix<T>& map, const Element<T>& x) {
  Element<T> out(x.algebra());
  for (std::size_t k = 0; k < map.cols(); ++k) {
    if (structural_zero(x[k])) continue;
    for (std::size_t r = 0; r < map.rows(); ++r) {
      if (structural_zero(map(r, k))) continue;
      out[r] += map(r, k) * x[k];
    }
  }
  return out;
}

template <class T>
bool maps_equal(const Matrix<T>& a, const Matrix<T>& b, double tolerance) {
  for (std::size_t k = 0; k < a.data().size(); ++k) {
    if constexpr (scalar_traits<T>::exact) {
      if (!(a.data()[k] == b.data()[k])) return false;
    } else {
      if (std::abs(a.data()[k] - b.data()[k]) > tolerance) return false;
    }
  }
  return true;
}

/// Span of a list of elements with membership tests.
template <class T>
class Span {
 public:
  Span(const AlgebraPtr<T>& a, const std::vector<Element<T>>& gens) : ech_(a->zero()) {
    for (const auto& g : gens) ech_.add(to_sparse(g.coords()), a->zero());
  }
  std::size_t dim() const { return ech_.rank(); }
  bool contains(const Element<T>& x) const { return ech_.reduce(to_sparse(x.coords())).empty(); }

 private:
  RowEchelon<T> ech_;
};

/// Pivot-column selection: indices of a maximal independent subfamily.
template <class T>
std::vector<std::size_t> independent_subset(const std::vector<Element<T>>& xs) {
  std::vector<std::size_t> keep;
  if (xs.empty()) return keep;
  RowEchelon<T> ech(xs.front().algebra()->zero());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto before = ech.rank();
    ech.add(to_sparse(xs[i].coords()), xs.front().algebra()->zero());
    if (ech.rank() > before) keep.push_back(i);
  }
  return keep;
}

/// P subset of B given by a linear basis of P.
template <class T>
struct Inclusion {
  AlgebraPtr<T> big;
  std::vector<Element<T>> small_basis;
  bool unital = true;

  /// Verifies independence, closure under products and adjoints, and the unit.
  static Inclusion make(AlgebraPtr<T> big, std::vector<Element<T>> basis, bool unital = true) {
    if (independent_subset(basis).size() != basis.size()) {
      throw Error(ErrorKind::NotSubalgebra, "small_basis is linearly dependent");
    }
    Span<T> span(big, basis);
    for (const auto& x : basis) {
      if (!span.contains(x.adjoint())) throw Error(ErrorKind::NotSubalgebra, "span is not closed under adjoint");
      for (const auto& y : basis)
        if (!span.contains(x * y)) throw Error(ErrorKind::NotSubalgebra, "span is not closed under products");
    }
    if (unital && !span.contains(Element<T>::unit(big))) {
      throw Error(ErrorKind::NotSubalgebra, "subalgebra does not contain the unit");
    }
    return Inclusion{std::move(big), std::move(basis), unital};
  }

  Span<T> span() const { return Span<T>(big, small_basis); }
  bool contains(const Element<T>& x) const { return span().contains(x); }
};

/// The whole algebra as a subalgebra of itself.
template <class T>
Inclusion<T> whole_algebra(const AlgebraPtr<T>& a) {
  return Inclusion<T>::make(a, matrix_unit_basis(a));
}

/// C * 1.
template <class T>
Inclusion<T> scalar_subalgebra(const AlgebraPtr<T>& a) {
  return Inclusion<T>::make(a, {Element<T>::unit(a)});
}

/// Diagonal copy {(x, x, ..., x)} of M_m in a direct sum of equal blocks M_m.
template <class T>
Inclusion<T> diagonal_subalgebra(const AlgebraPtr<T>& a) {
  const int m = a->block_size(0);
  for (int n : a->blocks())
    if (n != m) throw Error(ErrorKind::NotSubalgebra, "diagonal subalgebra needs equal blocks");
  std::vector<Element<T>> basis;
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      Element<T> e(a);
      for (int b = 0; b < a->block_count(); ++b) e.at(b, r, c) = a->one();
      basis.push_back(e);
    }
  return Inclusion<T>::make(a, std::move(basis));
}

/// tau(x) = sum_b w_b Tr(x_b).
template <class T>
struct TraceFunctional {
  AlgebraPtr<T> algebra;
  std::vector<T> weights;

  static TraceFunctional make(AlgebraPtr<T> a, std::vector<T> weights) {
    if (weights.size() != a->blocks().size()) throw Error(ErrorKind::InvalidArgument, "one weight per block");
    T total = a->zero();
    for (int b = 0; b < a->block_count(); ++b) total += a->from_rational(Rational(a->block_size(b))) * weights[b];
    if (scalar_traits<T>::sign(total - a->one()) != 0) {
      throw Error(ErrorKind::InvalidArgument, "trace weights do not give tau(1) = 1");
    }
    return TraceFunctional{std::move(a), std::move(weights)};
  }

  /// Equal weight on every block entry: w_b = 1 / sum n_b.
  static TraceFunctional uniform(const AlgebraPtr<T>& a) {
    int total = 0;
    for (int n : a->blocks()) total += n;
    return make(a, std::vector<T>(a->blocks().size(), a->from_rational(Rational(1, total))));
  }

  T operator()(const Element<T>& x) const {
    T t = algebra->zero();
    for (int b = 0; b < algebra->block_count(); ++b) t += weights[b] * x.block_trace(b);
    return t;
  }

  bool faithful() const {
    for (const auto& w : weights)
      if (scalar_traits<T>::sign(w) <= 0) return false;
    return true;
  }

  /// tau(x^* x).
  T two_norm_squared(const Element<T>& x) const { return (*this)(x.adjoint() * x); }
};

template <class T>
struct QuasiBasis {
  std::vector<std::pair<Element<T>, Element<T>>> pairs;
  Element<T> index;
};

/// Conditional expectation B -> P stored as a coordinate matrix.
template <class T>
struct CondExp {
  Inclusion<T> inclusion;
  Matrix<T> map;
  std::optional<QuasiBasis<T>> quasi_basis;

  const AlgebraPtr<T>& big() const { return inclusion.big; }
  Element<T> operator()(const Element<T>& x) const { return apply(map, x); }

  const Element<T>& index() const {
    if (!quasi_basis) throw Error(ErrorKind::InvalidArgument, "index unknown: run solve_quasi_basis first");
    return quasi_basis->index;
  }
};

namespace detail {

/// Exact (or tolerance-based) positive semidefiniteness of a symmetric matrix
/// by symmetric elimination with positive pivots.
template <class T>
bool is_psd(Matrix<T> a, double tolerance) {
  const std::size_t n = a.rows();
  if constexpr (!scalar_traits<T>::exact) {
    Eigen::MatrixXd m(n, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) m(r, c) = a(r, c);
    if (n == 0) return true;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    return es.eigenvalues().minCoeff() >= -tolerance * scale;
  } else {
    (void)tolerance;
    std::vector<bool> done(n, false);
    for (;;) {
      std::size_t pivot = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (done[i]) continue;
        const int s = scalar_traits<T>::sign(a(i, i));
        if (s < 0) return false;
        if (s == 0) {
          for (std::size_t j = 0; j < n; ++j)
            if (!done[j] && !scalar_traits<T>::is_zero(a(i, j))) return false;
          done[i] = true;
        } else if (pivot == n) {
          pivot = i;
        }
      }
      if (pivot == n) return true;
      done[pivot] = true;
      const T inv = scalar_traits<T>::one_like(a(pivot, pivot)) / a(pivot, pivot);
      for (std::size_t i = 0; i < n; ++i) {
        if (done[i] || scalar_traits<T>::is_zero(a(i, pivot))) continue;
        const T f = a(i, pivot) * inv;
        for (std::size_t j = 0; j < n; ++j) {
          if (done[j]) continue;
          a(i, j) -= f * a(pivot, j);
        }
      }
    }
  }
}

}  // namespace detail

template <class T>
bool is_positive(const Element<T>& x) {
  if (!x.is_self_adjoint()) return false;
  for (int b = 0; b < x.algebra()->block_count(); ++b)
    if (!detail::is_psd(x.block(b), x.algebra()->tolerance())) return false;
  return true;
}

/// Checks the CondExp invariants on the matrix-unit basis: identity on P, image in P,
/// idempotence, *-compatibility, P-bimodularity and positivity of E(x^* x).
template <class T>
std::vector<std::string> cond_exp_violations(const CondExp<T>& e) {
  std::vector<std::string> out;
  const auto& a = e.big();
  const auto span = e.inclusion.span();
  const auto basis = matrix_unit_basis(a);
  for (const auto& p : e.inclusion.small_basis)
    if (!(e(p) == p)) out.push_back("E is not the identity on P");
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const auto ex = e(basis[k]);
    if (!span.contains(ex)) out.push_back("E(x) not in P for basis element " + std::to_string(k));
    if (!(e(ex) == ex)) out.push_back("E not idempotent on basis element " + std::to_string(k));
    if (!(e(basis[k].adjoint()) == ex.adjoint())) out.push_back("E(x*) != E(x)* on basis element " + std::to_string(k));
    for (const auto& p : e.inclusion.small_basis) {
      if (!(e(p * basis[k]) == p * ex) || !(e(basis[k] * p) == ex * p)) {
        out.push_back("E not P-bimodular on basis element " + std::to_string(k));
        break;
      }
    }
    if (!is_positive(e(basis[k].adjoint() * basis[k]))) out.push_back("E(x*x) not positive for basis element " + std::to_string(k));
  }
  return out;
}

template <class T>
CondExp<T> make_cond_exp(Inclusion<T> inc, Matrix<T> map) {
  CondExp<T> e{std::move(inc), std::move(map), std::nullopt};
  const auto v = cond_exp_violations(e);
  if (!v.empty()) throw Error(ErrorKind::InvalidArgument, "not a conditional expectation: " + v.front());
  return e;
}

/// The tau-orthogonal projection onto P: E(x) = sum_j c_j p_j with G c = (tau(p_i^* x))_i.
template <class T>
CondExp<T> trace_ce_construct(const Inclusion<T>& inc, const TraceFunctional<T>& tau) {
  if (!tau.faithful()) throw Error(ErrorKind::DegenerateTrace, "trace is not faithful on the big algebra");
  const auto& a = inc.big;
  const auto& p = inc.small_basis;
  const std::size_t m = p.size();
  Matrix<T> gram(m, m, a->zero());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) gram(i, j) = tau(p[i].adjoint() * p[j]);
  const auto ginv = inverse(gram);
  if (!ginv) throw Error(ErrorKind::DegenerateTrace, "Gram matrix of the subalgebra basis is singular");
  auto map = linear_map_matrix(a, [&](const Element<T>& x) {
    std::vector<T> rhs(m, a->zero());
    for (std::size_t i = 0; i < m; ++i) rhs[i] = tau(p[i].adjoint() * x);
    Element<T> y(a);
    for (std::size_t j = 0; j < m; ++j) {
      T c = a->zero();
      for (std::size_t i = 0; i < m; ++i) c += (*ginv)(j, i) * rhs[i];
      if (!structural_zero(c)) y += c * p[j];
    }
    return y;
  });
  auto e = make_cond_exp(inc, std::move(map));
  for (const auto& x : matrix_unit_basis(a)) {
    const T diff = tau(e(x)) - tau(x);
    if (scalar_traits<T>::exact ? !scalar_traits<T>::is_zero(diff)
                                : scalar_traits<T>::magnitude(diff) > a->tolerance()) {
      throw Error(ErrorKind::InvalidArgument, "trace-preserving projection does not preserve tau");
    }
  }
  return e;
}

namespace detail {

/// Left multiplication x -> a x as a sparse coordinate map: entries (row, col, value).
template <class T>
std::vector<std::tuple<std::size_t, std::size_t, T>> left_mult(const Element<T>& a) {
  std::vector<std::tuple<std::size_t, std::size_t, T>> out;
  const auto& alg = *a.algebra();
  for (int b = 0; b < alg.block_count(); ++b) {
    const int n = alg.block_size(b);
    for (int r = 0; r < n; ++r)
      for (int m = 0; m < n; ++m) {
        const T& v = a.at(b, r, m);
        if (scalar_traits<T>::is_zero(v)) continue;
        for (int c = 0; c < n; ++c) out.emplace_back(alg.index(b, r, c), alg.index(b, m, c), v);
      }
  }
  return out;
}

/// Right multiplication x -> x a.
template <class T>
std::vector<std::tuple<std::size_t, std::size_t, T>> right_mult(const Element<T>& a) {
  std::vector<std::tuple<std::size_t, std::size_t, T>> out;
  const auto& alg = *a.algebra();
  for (int b = 0; b < alg.block_count(); ++b) {
    const int n = alg.block_size(b);
    for (int m = 0; m < n; ++m)
      for (int c = 0; c < n; ++c) {
        const T& v = a.at(b, m, c);
        if (scalar_traits<T>::is_zero(v)) continue;
        for (int r = 0; r < n; ++r) out.emplace_back(alg.index(b, r, c), alg.index(b, r, m), v);
      }
  }
  return out;
}

}  // namespace detail

/// Solves for u_j with v_j = the matrix units: sum_j u_j E(v_j a) = a and
/// sum_j E(a u_j) v_j = a for every basis element a, as one joint exact (or
/// float) linear system in N^2 unknowns; free variables are set to zero.
/// Index E = sum_j u_j v_j must be central.
template <class T>
QuasiBasis<T> solve_quasi_basis(const CondExp<T>& e) {
  const auto& alg = e.big();
  const std::size_t n = alg->dim();
  const auto basis = matrix_unit_basis(alg);
  // unknown (j, q) = coordinate q of u_j  ->  column j * n + q
  RowEchelon<T> ech(alg->zero());
  std::map<std::size_t, T> row;
  auto flush = [&](const T& rhs) {
    SparseVec<T> r;
    for (auto& [col, v] : row)
      if (!scalar_traits<T>::is_zero(v)) r.emplace_back(col, v);
    row.clear();
    return ech.add(std::move(r), rhs);
  };
  auto accumulate = [&](std::size_t col, const T& v) {
    auto [it, inserted] = row.try_emplace(col, v);
    if (!inserted) it->second += v;
  };
  // E as a sparse column list for the mirror identity
  std::vector<std::vector<std::pair<std::size_t, T>>> ecols(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t r = 0; r < n; ++r)
      if (!scalar_traits<T>::is_zero(e.map(r, k))) ecols[k].emplace_back(r, e.map(r, k));

  bool consistent = true;
  for (std::size_t k = 0; k < n && consistent; ++k) {
    const auto& a = basis[k];
    // left identity: coordinate r of sum_j u_j E(v_j a)
    std::vector<std::vector<std::tuple<std::size_t, std::size_t, T>>> rmaps;
    for (std::size_t j = 0; j < n; ++j) rmaps.push_back(detail::right_mult(e(basis[j] * a)));
    std::vector<std::map<std::size_t, T>> left_rows(n);
    for (std::size_t j = 0; j < n; ++j)
      for (const auto& [r, q, v] : rmaps[j]) {
        auto [it, inserted] = left_rows[r].try_emplace(j * n + q, v);
        if (!inserted) it->second += v;
      }
    for (std::size_t r = 0; r < n && consistent; ++r) {
      row = std::move(left_rows[r]);
      consistent = flush(a[r]);
    }
    // mirror identity: coordinate r of sum_j E(a u_j) v_j
    const auto lm = detail::left_mult(a);  // coords(a u) = L u
    // M L as sparse map: for each (s, q): sum_t M(s, t) L(t, q)
    std::map<std::pair<std::size_t, std::size_t>, T> ml;
    for (const auto& [t, q, v] : lm)
      for (std::size_t s = 0; s < n; ++s) {
        if (scalar_traits<T>::is_zero(e.map(s, t))) continue;
        auto [it, inserted] = ml.try_emplace({s, q}, e.map(s, t) * v);
        if (!inserted) it->second += e.map(s, t) * v;
      }
    std::vector<std::map<std::size_t, T>> mirror_rows(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto rm = detail::right_mult(basis[j]);  // coords(y v_j) = R y
      for (const auto& [r, s, v] : rm)
        for (auto it = ml.lower_bound({s, 0}); it != ml.end() && it->first.first == s; ++it) {
          auto [jt, inserted] = mirror_rows[r].try_emplace(j * n + it->first.second, v * it->second);
          if (!inserted) jt->second += v * it->second;
        }
    }
    for (std::size_t r = 0; r < n && consistent; ++r) {
      row = std::move(mirror_rows[r]);
      consistent = flush(a[r]);
    }
  }
  (void)accumulate;
  if (!consistent) throw Error(ErrorKind::NoQuasiBasis, "quasi-basis system is inconsistent");
  const auto sol = ech.solve(n * n);
  if (!sol) throw Error(ErrorKind::NoQuasiBasis, "quasi-basis system is inconsistent");
  QuasiBasis<T> qb{{}, Element<T>(alg)};
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<T> u(sol->begin() + static_cast<std::ptrdiff_t>(j * n),
                     sol->begin() + static_cast<std::ptrdiff_t>((j + 1) * n));
    Element<T> uj(alg, std::move(u));
    qb.index += uj * basis[j];
    qb.pairs.emplace_back(std::move(uj), basis[j]);
  }
  for (const auto& x : basis)
    if (!(qb.index * x == x * qb.index)) throw Error(ErrorKind::NonCentralIndex, "Index E is not central");
  return qb;
}

template <class T>
CondExp<T> with_quasi_basis(CondExp<T> e) {
  e.quasi_basis = solve_quasi_basis(e);
  return e;
}

struct QuasiBasisCheck {
  bool left = false;
  bool right = false;
  bool central = false;
  bool self_adjoint = false;
  bool pass() const { return left && right && central && self_adjoint; }
};

/// Re-verifies both quasi-basis identities on the full basis.
template <class T>
QuasiBasisCheck verify_quasi_basis(const CondExp<T>& e, const QuasiBasis<T>& qb) {
  QuasiBasisCheck c{true, true, true, qb.index.is_self_adjoint()};
  for (const auto& a : matrix_unit_basis(e.big())) {
    Element<T> l(e.big()), r(e.big());
    for (const auto& [u, v] : qb.pairs) {
      l += u * e(v * a);
      r += e(a * u) * v;
    }
    c.left = c.left && l == a;
    c.right = c.right && r == a;
    c.central = c.central && qb.index * a == a * qb.index;
  }
  return c;
}

/// B = n copies of M_{A_dim}, D = diagonal copy, E = averaging of the blocks
/// (the trace-preserving expectation for the uniform trace), and the central
/// block projections e_1, ..., e_n.
template <class T>
struct DirectSumExample {
  int a_dim = 1;
  int n = 2;
  TraceFunctional<T> tau;
  CondExp<T> expectation;
  std::vector<Element<T>> family;
};

template <class T>
DirectSumExample<T> direct_sum_example(const AlgebraPtr<T>& shape_source, int a_dim, int n) {
  if (a_dim < 1 || n < 1) throw Error(ErrorKind::InvalidArgument, "direct_sum_example needs A_dim >= 1 and n >= 1");
  auto big = Algebra<T>::make(std::vector<int>(n, a_dim), shape_source->zero(), shape_source->one(),
                              shape_source->tolerance());
  auto tau = TraceFunctional<T>::uniform(big);
  auto e = with_quasi_basis(trace_ce_construct(diagonal_subalgebra(big), tau));
  std::vector<Element<T>> family;
  for (int b = 0; b < n; ++b) family.push_back(Element<T>::block_unit(big, b));
  return DirectSumExample<T>{a_dim, n, std::move(tau), std::move(e), std::move(family)};
}

inline DirectSumExample<Scalar> direct_sum_example(int a_dim, int n, const FieldPtr& f = NumberField::rationals()) {
  return direct_sum_example(exact_algebra({1}, f), a_dim, n);
}

/// Maps sigma_i^j : X_i -> X_j between n finite point sets of equal size m, as permutations of {0..m-1}.
struct CoverMaps {
  int n = 1;
  int size = 1;
  std::map<std::pair<int, int>, std::vector<int>> sigma;  // (i, j) -> sigma_i^j, 0-based i, j
};

/// Fills sigma_i^i = id, sigma_j^i = inverse of a given sigma_i^j, and sigma_i^j = sigma_0^j o sigma_i^0,
/// then checks every cocycle condition sigma_j^k o sigma_i^j = sigma_i^k.
inline CoverMaps complete_cover_maps(CoverMaps maps) {
  const int n = maps.n, m = maps.size;
  auto valid_perm = [m](const std::vector<int>& p) {
    if (static_cast<int>(p.size()) != m) return false;
    std::vector<bool> seen(m, false);
    for (int v : p) {
      if (v < 0 || v >= m || seen[v]) return false;
      seen[v] = true;
    }
    return true;
  };
  for (const auto& [ij, p] : maps.sigma)
    if (!valid_perm(p)) throw Error(ErrorKind::InvalidArgument, "sigma is not a bijection of the point set");
  std::vector<int> id(m);
  for (int t = 0; t < m; ++t) id[t] = t;
  for (int i = 0; i < n; ++i) maps.sigma.try_emplace({i, i}, id);
  auto inverse_of = [m](const std::vector<int>& p) {
    std::vector<int> q(m);
    for (int t = 0; t < m; ++t) q[p[t]] = t;
    return q;
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!maps.sigma.count({i, j}) && maps.sigma.count({j, i})) maps.sigma[{i, j}] = inverse_of(maps.sigma[{j, i}]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (maps.sigma.count({i, j})) continue;
      if (!maps.sigma.count({i, 0}) || !maps.sigma.count({0, j})) {
        throw Error(ErrorKind::InvalidArgument, "cover maps do not determine every sigma_i^j");
      }
      std::vector<int> p(m);
      for (int t = 0; t < m; ++t) p[t] = maps.sigma[{0, j}][maps.sigma[{i, 0}][t]];
      maps.sigma[{i, j}] = p;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const auto& sij = maps.sigma[{i, j}];
        const auto& sjk = maps.sigma[{j, k}];
        const auto& sik = maps.sigma[{i, k}];
        for (int t = 0; t < m; ++t)
          if (sjk[sij[t]] != sik[t]) {
            throw Error(ErrorKind::CocycleViolation, "cocycle violated for (i,j,k) = (" + std::to_string(i + 1) + "," +
                                                         std::to_string(j + 1) + "," + std::to_string(k + 1) + ")");
          }
      }
  return maps;
}

template <class T>
struct CoverExample {
  CoverMaps maps;
  TraceFunctional<T> tau;
  CondExp<T> expectation;
  std::vector<Element<T>> family;  // indicator functions of X_1, ..., X_n
};

/// C(X) for X = X_1 u ... u X_n discretized to points (n*m one-dimensional blocks,
/// point t of X_i is block i*m + t), P = compatible tuples f_i(sigma_j^i(t)) = f_j(t),
/// and E(f)(t) = (1/n) sum_k f_k(sigma_i^k(t)) for t in X_i.
template <class T>
CoverExample<T> cover_example(const AlgebraPtr<T>& scalars_from, CoverMaps maps) {
  maps = complete_cover_maps(std::move(maps));
  const int n = maps.n, m = maps.size;
  auto big = Algebra<T>::make(std::vector<int>(n * m, 1), scalars_from->zero(), scalars_from->one(),
                              scalars_from->tolerance());
  auto point = [m](int i, int t) { return i * m + t; };
  std::vector<Element<T>> pbasis;
  for (int t = 0; t < m; ++t) {
    Element<T> f(big);
    for (int k = 0; k < n; ++k) f.at(point(k, maps.sigma[{0, k}][t]), 0, 0) = big->one();
    pbasis.push_back(f);
  }
  auto inc = Inclusion<T>::make(big, pbasis);
  const T inv_n = big->from_rational(Rational(1, n));
  Matrix<T> map(big->dim(), big->dim(), big->zero());
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < m; ++t)
      for (int k = 0; k < n; ++k) map(point(i, t), point(k, maps.sigma[{i, k}][t])) += inv_n;
  auto e = with_quasi_basis(make_cond_exp(std::move(inc), std::move(map)));
  std::vector<Element<T>> family;
  for (int i = 0; i < n; ++i) {
    Element<T> f(big);
    for (int t = 0; t < m; ++t) f.at(point(i, t), 0, 0) = big->one();
    family.push_back(f);
  }
  return CoverExample<T>{std::move(maps), TraceFunctional<T>::uniform(big), std::move(e), std::move(family)};
}

/// Flag set when the scalar part of Index E embeds below 4; advisory, since the
/// underlying criterion assumes simple algebras.
template <class T>
std::optional<bool> irreducible_by_index(const Element<T>& index) {
  const auto c = index.scalar_value();
  if (!c) return std::nullopt;
  return scalar_traits<T>::sign(index.algebra()->from_rational(Rational(4)) - *c) > 0;
}

}  // namespace watatani::mm
