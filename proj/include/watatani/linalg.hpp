#pragma once

// Field-generic linear algebra: dense matrices, incremental sparse row
// reduction (solve / rank), and column-dependency kernels. Works over exact
// Scalars and over double with a pivot tolerance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "watatani/error.hpp"
#include "watatani/number_field.hpp"

namespace watatani {

template <class T>
struct scalar_traits;

template <>
struct scalar_traits<Scalar> {
  static constexpr bool exact = true;
  static bool is_zero(const Scalar& x) { return x.is_zero(); }
  static double magnitude(const Scalar& x) { return std::abs(x.to_double()); }
  static double to_double(const Scalar& x) { return x.to_double(); }
  static Scalar zero_like(const Scalar& x) { return Scalar::zero(x.field()); }
  static Scalar one_like(const Scalar& x) { return Scalar::one(x.field()); }
  static Scalar from_rational(const Rational& r, const Scalar& like) { return Scalar(like.field(), r); }
  static Scalar conj(const Scalar& x) { return x; }
  static int sign(const Scalar& x) { return x.sign(); }
};

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  static constexpr double pivot_tolerance = 1e-12;
  static bool is_zero(double x) { return std::abs(x) <= pivot_tolerance; }
  static double magnitude(double x) { return std::abs(x); }
  static double to_double(double x) { return x; }
  static double zero_like(double) { return 0.0; }
  static double one_like(double) { return 1.0; }
  static double from_rational(const Rational& r, double) { return r.get_d(); }
  static double conj(double x) { return x; }
  static int sign(double x) { return is_zero(x) ? 0 : (x > 0 ? 1 : -1); }
};

/// Dense row-major matrix.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const T& fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n, const T& zero, const T& one) {
    Matrix m(n, n, zero);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = one;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  Matrix transpose() const {
    Matrix t(cols_, rows_, data_.empty() ? T{} : data_.front());
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = scalar_traits<T>::conj((*this)(r, c));
    return t;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) {
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] += b.data_[i];
    return a;
  }
  friend Matrix operator-(Matrix a, const Matrix& b) {
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
    return a;
  }
  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    const T zero = scalar_traits<T>::zero_like(a.data_.front());
    Matrix out(a.rows_, b.cols_, zero);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T& aik = a(i, k);
        if (scalar_traits<T>::is_zero(aik)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) {
          if (scalar_traits<T>::is_zero(b(k, j))) continue;
          out(i, j) += aik * b(k, j);
        }
      }
    }
    return out;
  }
  friend Matrix operator*(const T& s, Matrix a) {
    for (auto& x : a.data_) x = s * x;
    return a;
  }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <class T>
Matrix<T> kron(const Matrix<T>& a, const Matrix<T>& b) {
  const T zero = scalar_traits<T>::zero_like(a(0, 0));
  Matrix<T> out(a.rows() * b.rows(), a.cols() * b.cols(), zero);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (scalar_traits<T>::is_zero(a(i, j))) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    }
  return out;
}

/// Sparse vector: (index, value) pairs sorted by index, no stored zeros.
template <class T>
using SparseVec = std::vector<std::pair<std::size_t, T>>;

template <class T>
SparseVec<T> to_sparse(const std::vector<T>& dense) {
  SparseVec<T> out;
  for (std::size_t i = 0; i < dense.size(); ++i)
    if (!scalar_traits<T>::is_zero(dense[i])) out.emplace_back(i, dense[i]);
  return out;
}

namespace detail {

/// a - f * b for sorted sparse vectors.
template <class T>
SparseVec<T> axpy_sparse(const SparseVec<T>& a, const T& f, const SparseVec<T>& b) {
  SparseVec<T> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      T v = f * b[j].second;
      out.emplace_back(b[j].first, -v);
      ++j;
    } else {
      T v = a[i].second - f * b[j].second;
      if (!scalar_traits<T>::is_zero(v)) out.emplace_back(a[i].first, std::move(v));
      ++i;
      ++j;
    }
  }
  if constexpr (!scalar_traits<T>::exact) {
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const auto& e) { return scalar_traits<T>::is_zero(e.second); }),
              out.end());
  }
  return out;
}

}  // namespace detail

/// Incremental row echelon form of a linear system A x = b.
template <class T>
class RowEchelon {
 public:
  explicit RowEchelon(T zero) : zero_(std::move(zero)) {}

  /// Adds one equation; returns false when it is inconsistent with the previous ones.
  bool add(SparseVec<T> row, T rhs) {
    for (;;) {
      if (row.empty()) {
        if (!scalar_traits<T>::is_zero(rhs)) {
          consistent_ = false;
          return false;
        }
        return true;
      }
      auto lead = row.front().first;
      auto it = pivots_.find(lead);
      if (it == pivots_.end()) break;
      const T f = row.front().second;
      rhs -= f * it->second.rhs;
      row = detail::axpy_sparse(row, f, it->second.coeffs);
    }
    const T inv = scalar_traits<T>::one_like(row.front().second) / row.front().second;
    for (auto& e : row) e.second = inv * e.second;
    rhs = inv * rhs;
    const auto lead = row.front().first;
    pivots_.emplace(lead, Row{std::move(row), std::move(rhs)});
    return true;
  }

  bool consistent() const { return consistent_; }
  std::size_t rank() const { return pivots_.size(); }
  bool has_pivot(std::size_t col) const { return pivots_.count(col) != 0; }

  /// Reduces `row` against the current pivots; the result is zero iff row lies in the row span.
  SparseVec<T> reduce(SparseVec<T> row) const {
    SparseVec<T> residual;
    while (!row.empty()) {
      auto it = pivots_.find(row.front().first);
      if (it == pivots_.end()) {
        residual.push_back(row.front());
        row.erase(row.begin());
        continue;
      }
      const T f = row.front().second;
      row = detail::axpy_sparse(row, f, it->second.coeffs);
    }
    return residual;
  }

  /// Particular solution with free variables set to zero.
  std::optional<std::vector<T>> solve(std::size_t unknowns) const {
    if (!consistent_) return std::nullopt;
    std::vector<T> x(unknowns, zero_);
    for (auto it = pivots_.rbegin(); it != pivots_.rend(); ++it) {
      T v = it->second.rhs;
      for (std::size_t k = 1; k < it->second.coeffs.size(); ++k) {
        const auto& [col, coef] = it->second.coeffs[k];
        v -= coef * x[col];
      }
      x[it->first] = std::move(v);
    }
    return x;
  }

 private:
  struct Row {
    SparseVec<T> coeffs;
    T rhs;
  };
  T zero_;
  std::map<std::size_t, Row> pivots_;
  bool consistent_ = true;
};

/// Collects column vectors and records every linear dependency among them; the
/// dependencies form a basis of the kernel of the matrix with those columns.
template <class T>
class KernelBuilder {
 public:
  explicit KernelBuilder(T zero) : zero_(std::move(zero)) {}

  /// Adds column `index` (indices must be added in increasing order, starting at 0).
  void add_column(SparseVec<T> column) {
    const std::size_t index = count_++;
    SparseVec<T> combo{{index, scalar_traits<T>::one_like(zero_)}};
    for (;;) {
      if (column.empty()) {
        kernel_.push_back(std::move(combo));
        return;
      }
      auto it = pivots_.find(column.front().first);
      if (it == pivots_.end()) break;
      const T f = column.front().second;
      column = detail::axpy_sparse(column, f, it->second.vec);
      combo = detail::axpy_sparse(combo, f, it->second.combo);
    }
    const T inv = scalar_traits<T>::one_like(zero_) / column.front().second;
    for (auto& e : column) e.second = inv * e.second;
    for (auto& e : combo) e.second = inv * e.second;
    const auto lead = column.front().first;
    pivots_.emplace(lead, Entry{std::move(column), std::move(combo)});
  }

  std::size_t columns() const { return count_; }
  std::size_t rank() const { return pivots_.size(); }
  const std::vector<SparseVec<T>>& kernel() const { return kernel_; }

 private:
  struct Entry {
    SparseVec<T> vec;
    SparseVec<T> combo;
  };
  T zero_;
  std::size_t count_ = 0;
  std::map<std::size_t, Entry> pivots_;
  std::vector<SparseVec<T>> kernel_;
};

template <class T>
std::size_t rank_of_rows(const std::vector<SparseVec<T>>& rows, const T& zero) {
  RowEchelon<T> ech(zero);
  for (const auto& r : rows) ech.add(r, zero);
  return ech.rank();
}

template <class T>
std::size_t rank(const Matrix<T>& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  const T zero = scalar_traits<T>::zero_like(m(0, 0));
  RowEchelon<T> ech(zero);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::vector<T> row(m.cols(), zero);
    for (std::size_t c = 0; c < m.cols(); ++c) row[c] = m(r, c);
    ech.add(to_sparse(row), zero);
  }
  return ech.rank();
}

/// Gauss-Jordan inverse; nullopt when singular (exact zero test, or pivot tolerance for doubles).
template <class T>
std::optional<Matrix<T>> inverse(const Matrix<T>& m) {
  const std::size_t n = m.rows();
  if (n != m.cols()) throw Error(ErrorKind::InvalidArgument, "inverse of a non-square matrix");
  if (n == 0) return m;
  const T zero = scalar_traits<T>::zero_like(m(0, 0));
  const T one = scalar_traits<T>::one_like(m(0, 0));
  Matrix<T> a = m;
  Matrix<T> inv = Matrix<T>::identity(n, zero, one);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = n;
    double best = 0.0;
    for (std::size_t r = col; r < n; ++r) {
      if (scalar_traits<T>::is_zero(a(r, col))) continue;
      const double mag = scalar_traits<T>::magnitude(a(r, col));
      if (pivot == n || (!scalar_traits<T>::exact && mag > best)) {
        pivot = r;
        best = mag;
        if constexpr (scalar_traits<T>::exact) break;
      }
    }
    if (pivot == n) return std::nullopt;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(a(pivot, c), a(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    }
    const T f = one / a(col, col);
    for (std::size_t c = 0; c < n; ++c) {
      a(col, c) = f * a(col, c);
      inv(col, c) = f * inv(col, c);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || scalar_traits<T>::is_zero(a(r, col))) continue;
      const T g = a(r, col);
      for (std::size_t c = 0; c < n; ++c) {
        a(r, c) -= g * a(col, c);
        inv(r, c) -= g * inv(col, c);
      }
    }
  }
  return inv;
}

}  // namespace watatani
