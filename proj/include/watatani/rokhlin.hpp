#pragma once

// Finite-stage Rokhlin-type criteria for multi-matrix inclusions: periodic
// Rokhlin families, tracial and 2-norm variants, finite group actions and the
// Hilbert-module projection identities.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "watatani/multimatrix.hpp"
#include "watatani/report.hpp"

namespace watatani::mm {

namespace detail {

template <class T>
const char* mode_name() {
  return scalar_traits<T>::exact ? "exact" : "float";
}

/// Exact quantities as strings, float quantities as numbers.
template <class T>
json value_json(const T& v) {
  if constexpr (scalar_traits<T>::exact) return v.to_string();
  else return v;
}

template <class T>
bool is_exact_zero(const Element<T>& x) {
  if constexpr (scalar_traits<T>::exact) return x.is_zero();
  else return false;
}

}  // namespace detail

template <class T>
struct TwoNorm {
  T square;
  double numeric = 0.0;
};

/// ||x||_{2,tau} = tau(x^* x)^{1/2}: the square exactly, the root numerically.
template <class T>
TwoNorm<T> two_norm(const Element<T>& x, const TraceFunctional<T>& tau) {
  const T sq = tau.two_norm_squared(x);
  return TwoNorm<T>{sq, std::sqrt(std::max(0.0, scalar_traits<T>::to_double(sq)))};
}

/// Per-block ranks of an element.
template <class T>
std::vector<std::size_t> block_ranks(const Element<T>& x) {
  std::vector<std::size_t> out;
  for (int b = 0; b < x.algebra()->block_count(); ++b) {
    if constexpr (scalar_traits<T>::exact) {
      out.push_back(rank(x.block(b)));
    } else {
      const auto m = x.block_double(b);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
      const auto& sv = svd.singularValues();
      const double cut = std::max(1.0, sv.size() ? sv(0) : 0.0) * 1e-8;
      std::size_t r = 0;
      for (Eigen::Index k = 0; k < sv.size(); ++k) r += sv(k) > cut ? 1 : 0;
      out.push_back(r);
    }
  }
  return out;
}

/// p <~ q for projections: blockwise rank(p) <= rank(q).
template <class T>
bool mvn_subequivalent(const Element<T>& p, const Element<T>& q) {
  if (!p.is_projection()) throw Error(ErrorKind::NotProjection, "p is not a projection");
  if (!q.is_projection()) throw Error(ErrorKind::NotProjection, "q is not a projection");
  const auto rp = block_ranks(p), rq = block_ranks(q);
  for (std::size_t b = 0; b < rp.size(); ++b)
    if (rp[b] > rq[b]) return false;
  return true;
}

/// Range projection of a positive element. Exact mode: C (C^T C)^{-1} C^T over a
/// column basis C of each block; float mode: eigenvectors above 1e-8 ||a||.
template <class T>
Element<T> support_projection(const Element<T>& a) {
  const auto& alg = a.algebra();
  Element<T> out(alg);
  if constexpr (scalar_traits<T>::exact) {
    for (int b = 0; b < alg->block_count(); ++b) {
      const int n = alg->block_size(b);
      const auto blk = a.block(b);
      std::vector<std::vector<T>> cols;
      RowEchelon<T> ech(alg->zero());
      for (int c = 0; c < n; ++c) {
        std::vector<T> col(n, alg->zero());
        for (int r = 0; r < n; ++r) col[r] = blk(r, c);
        const auto before = ech.rank();
        ech.add(to_sparse(col), alg->zero());
        if (ech.rank() > before) cols.push_back(std::move(col));
      }
      if (cols.empty()) continue;
      Matrix<T> cm(n, cols.size(), alg->zero());
      for (std::size_t j = 0; j < cols.size(); ++j)
        for (int r = 0; r < n; ++r) cm(r, j) = cols[j][r];
      const auto ct = cm.transpose();
      const auto g = inverse(ct * cm);
      out.set_block(b, cm * (*g) * ct);
    }
  } else {
    const double cut = 1e-8 * operator_norm(a);
    for (int b = 0; b < alg->block_count(); ++b) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.block_double(b));
      Eigen::MatrixXd p = Eigen::MatrixXd::Zero(alg->block_size(b), alg->block_size(b));
      for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
        if (es.eigenvalues()(k) > cut) p += es.eigenvectors().col(k) * es.eigenvectors().col(k).transpose();
      Matrix<T> m(alg->block_size(b), alg->block_size(b), 0.0);
      for (int r = 0; r < alg->block_size(b); ++r)
        for (int c = 0; c < alg->block_size(b); ++c) m(r, c) = p(r, c);
      out.set_block(b, m);
    }
  }
  return out;
}

/// A finite group (multiplication table on {0..order-1}, identity 0) acting by
/// automorphisms given as coordinate maps.
template <class T>
struct GroupAction {
  AlgebraPtr<T> algebra;
  int order = 1;
  std::vector<std::vector<int>> table;
  std::vector<Matrix<T>> maps;

  Element<T> act(int g, const Element<T>& x) const { return apply(maps[g], x); }

  /// Throws NotAction unless every map is a unital *-automorphism and g -> alpha_g is multiplicative.
  void verify() const {
    if (static_cast<int>(table.size()) != order || static_cast<int>(maps.size()) != order) {
      throw Error(ErrorKind::NotAction, "table and maps must have one entry per group element");
    }
    const auto basis = matrix_unit_basis(algebra);
    for (int g = 0; g < order; ++g) {
      if (!(act(g, Element<T>::unit(algebra)) == Element<T>::unit(algebra))) {
        throw Error(ErrorKind::NotAction, "alpha_g is not unital");
      }
      for (const auto& x : basis) {
        if (!(act(g, x.adjoint()) == act(g, x).adjoint())) throw Error(ErrorKind::NotAction, "alpha_g is not *-preserving");
        for (const auto& y : basis)
          if (!(act(g, x * y) == act(g, x) * act(g, y))) throw Error(ErrorKind::NotAction, "alpha_g is not multiplicative");
      }
      for (int h = 0; h < order; ++h)
        if (!maps_equal(maps[g] * maps[h], maps[table[g][h]], algebra->tolerance())) {
          throw Error(ErrorKind::NotAction, "alpha_g alpha_h != alpha_gh");
        }
    }
  }
};

namespace detail {

inline std::vector<std::vector<int>> cyclic_table(int n) {
  std::vector<std::vector<int>> t(n, std::vector<int>(n));
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h) t[g][h] = (g + h) % n;
  return t;
}

}  // namespace detail

/// Z/n acting on n equal blocks by alpha_k(x)_b = x_{b-k}.
template <class T>
GroupAction<T> cyclic_block_shift(const AlgebraPtr<T>& a) {
  const int n = a->block_count();
  for (int s : a->blocks())
    if (s != a->block_size(0)) throw Error(ErrorKind::NotAction, "cyclic shift needs equal blocks");
  GroupAction<T> act{a, n, detail::cyclic_table(n), {}};
  for (int k = 0; k < n; ++k) {
    act.maps.push_back(linear_map_matrix(a, [&](const Element<T>& x) {
      Element<T> y(a);
      for (int b = 0; b < n; ++b) y.set_block((b + k) % n, x.block(b));
      return y;
    }));
  }
  act.verify();
  return act;
}

/// Z/order acting trivially.
template <class T>
GroupAction<T> identity_action(const AlgebraPtr<T>& a, int order) {
  GroupAction<T> act{a, order, detail::cyclic_table(order), {}};
  for (int k = 0; k < order; ++k) act.maps.push_back(Matrix<T>::identity(a->dim(), a->zero(), a->one()));
  act.verify();
  return act;
}

template <class T>
GroupAction<T> trivial_group(const AlgebraPtr<T>& a) {
  return identity_action(a, 1);
}

struct GroupAverageReport {
  std::size_t fixed_dim = 0;
  std::size_t subalgebra_dim = 0;
  bool subalgebra_fixed = false;
  bool fixed_equals_subalgebra = false;
  bool average_equals_expectation = false;
  double max_deviation_numeric = 0.0;
  std::string mode = "exact";

  bool pass() const { return fixed_equals_subalgebra && average_equals_expectation; }

  CheckRecord record(const std::string& target) const {
    CheckRecord r{"group_average", target, mode};
    r.quantities["fixed_dim"] = fixed_dim;
    r.quantities["subalgebra_dim"] = subalgebra_dim;
    r.quantities["fixed_equals_subalgebra"] = fixed_equals_subalgebra;
    r.quantities["average_equals_expectation"] = average_equals_expectation;
    r.quantities["max_deviation_numeric"] = max_deviation_numeric;
    r.pass = pass();
    return r;
  }
};

/// Compares the fixed-point algebra of the action with the subalgebra of E,
/// and the averaging map (1/|G|) sum_g alpha_g with E.
template <class T>
GroupAverageReport group_average_ce(const CondExp<T>& e, const GroupAction<T>& action) {
  GroupAverageReport rep;
  rep.mode = detail::mode_name<T>();
  const auto& a = e.big();
  const std::size_t n = a->dim();
  RowEchelon<T> ech(a->zero());
  for (int g = 0; g < action.order; ++g)
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<T> row(n, a->zero());
      for (std::size_t c = 0; c < n; ++c) row[c] = action.maps[g](r, c) - (r == c ? a->one() : a->zero());
      ech.add(to_sparse(row), a->zero());
    }
  rep.fixed_dim = n - ech.rank();
  rep.subalgebra_dim = e.inclusion.small_basis.size();
  rep.subalgebra_fixed = true;
  for (const auto& p : e.inclusion.small_basis)
    for (int g = 0; g < action.order; ++g) rep.subalgebra_fixed = rep.subalgebra_fixed && action.act(g, p) == p;
  rep.fixed_equals_subalgebra = rep.subalgebra_fixed && rep.fixed_dim == rep.subalgebra_dim;

  Matrix<T> avg(n, n, a->zero());
  for (const auto& m : action.maps) avg = avg + m;
  avg = a->from_rational(Rational(1, action.order)) * avg;
  rep.average_equals_expectation = maps_equal(avg, e.map, a->tolerance());
  for (std::size_t k = 0; k < avg.data().size(); ++k) {
    rep.max_deviation_numeric =
        std::max(rep.max_deviation_numeric, scalar_traits<T>::magnitude(avg.data()[k] - e.map.data()[k]));
  }
  return rep;
}

struct PeriodicRokhlinReport {
  double commutator_numeric = 0.0;        // (a) max ||e_j g - g e_j||
  double index_defect_numeric = 0.0;      // (b) max ||1 - Index E * E(e_j)||
  bool commutators_exact_zero = false;
  bool index_defect_exact_zero = false;
  double norm_gap_numeric = 0.0;          // (c) max over x of | max_j ||x e_j|| - ||x|| |
  bool injectivity_surrogate = false;
  std::string mode = "exact";
  double tolerance = 1e-9;

  bool pass() const {
    const bool a = mode == "exact" ? commutators_exact_zero : commutator_numeric <= tolerance;
    const bool b = mode == "exact" ? index_defect_exact_zero : index_defect_numeric <= tolerance;
    return a && b && injectivity_surrogate;
  }

  CheckRecord record(const std::string& target) const {
    CheckRecord r{"rokhlin", target, mode};
    r.quantities["commutator_norm_numeric"] = commutator_numeric;
    r.quantities["index_defect_norm_numeric"] = index_defect_numeric;
    r.quantities["norm_gap_numeric"] = norm_gap_numeric;
    r.quantities["injectivity_surrogate"] = injectivity_surrogate;
    if (mode == "exact") {
      r.quantities["commutators_exact_zero"] = commutators_exact_zero;
      r.quantities["index_defect_exact_zero"] = index_defect_exact_zero;
    }
    r.pass = pass();
    return r;
  }
};

/// (a) commutators of the family with gens, (b) 1 - (Index E) E(e_j), (c) the
/// norm preservation max_j ||x e_j|| = ||x|| standing in for injectivity.
template <class T>
PeriodicRokhlinReport rokhlin_periodic_check(const CondExp<T>& e, const std::vector<Element<T>>& family,
                                             const std::vector<Element<T>>& gens, double tolerance = 1e-9) {
  PeriodicRokhlinReport rep;
  rep.mode = detail::mode_name<T>();
  rep.tolerance = tolerance;
  const auto& index = e.index();
  const auto one = Element<T>::unit(e.big());
  bool comm_zero = true, defect_zero = true;
  for (const auto& f : family) {
    for (const auto& g : gens) {
      const auto c = f * g - g * f;
      comm_zero = comm_zero && detail::is_exact_zero(c);
      rep.commutator_numeric = std::max(rep.commutator_numeric, operator_norm(c));
    }
    const auto d = one - index * e(f);
    defect_zero = defect_zero && detail::is_exact_zero(d);
    rep.index_defect_numeric = std::max(rep.index_defect_numeric, operator_norm(d));
  }
  rep.commutators_exact_zero = comm_zero;
  rep.index_defect_exact_zero = defect_zero && !family.empty();
  rep.injectivity_surrogate = true;
  for (const auto& x : gens) {
    double best = 0.0;
    for (const auto& f : family) best = std::max(best, operator_norm(x * f));
    const double gap = std::abs(best - operator_norm(x));
    rep.norm_gap_numeric = std::max(rep.norm_gap_numeric, gap);
    rep.injectivity_surrogate = rep.injectivity_surrogate && gap <= tolerance;
  }
  return rep;
}

struct TracialRokhlinReport {
  bool idempotent = false;                 // (1)
  double commutator_numeric = 0.0;         // (2)
  bool commutator_ok = false;
  bool complement_is_projection = false;
  bool subequivalent = false;              // (3)
  std::string mode = "exact";

  bool pass() const { return idempotent && commutator_ok && subequivalent; }

  CheckRecord record(const std::string& target) const {
    CheckRecord r{"tracial_rokhlin", target, mode};
    r.quantities["idempotent"] = idempotent;
    r.quantities["commutator_norm_numeric"] = commutator_numeric;
    r.quantities["commutator_below_eps"] = commutator_ok;
    r.quantities["subequivalent"] = subequivalent;
    if (!complement_is_projection) r.metadata["complement"] = "1 - g is not a projection";
    r.pass = pass();
    return r;
  }
};

/// g := (Index E) E(e): (1) g^2 = g, (2) ||e x - x e|| < eps for x in gens,
/// (3) 1 - g <~ supp(a).
template <class T>
TracialRokhlinReport tracial_rokhlin_check(const CondExp<T>& e, const Element<T>& proj,
                                           const std::vector<Element<T>>& gens, const Element<T>& a, double eps) {
  if (a.is_zero() || !is_positive(a)) throw Error(ErrorKind::NotPositive, "a must be positive and nonzero");
  TracialRokhlinReport rep;
  rep.mode = detail::mode_name<T>();
  const auto g = e.index() * e(proj);
  rep.idempotent = g * g == g;
  for (const auto& x : gens) rep.commutator_numeric = std::max(rep.commutator_numeric, operator_norm(proj * x - x * proj));
  rep.commutator_ok = rep.commutator_numeric < eps;
  const auto complement = Element<T>::unit(e.big()) - g;
  rep.complement_is_projection = complement.is_projection();
  rep.subequivalent = rep.complement_is_projection && mvn_subequivalent(complement, support_projection(a));
  return rep;
}

template <class T>
struct ProbabilisticRokhlinReport {
  T commutator_square;  // max tau(c^* c) over gens
  T defect_square;      // tau(d^* d), d = 1 - (Index E) E(e)
  double commutator_numeric = 0.0;
  double defect_numeric = 0.0;
  bool e_is_projection = false;
  double eps = 0.0;
  std::string mode = "exact";

  bool pass() const { return commutator_numeric < eps && defect_numeric < eps; }

  CheckRecord record(const std::string& target) const {
    CheckRecord r{"probabilistic_rokhlin", target, mode};
    r.quantities["commutator_two_norm_numeric"] = commutator_numeric;
    r.quantities["defect_two_norm_numeric"] = defect_numeric;
    r.quantities["commutator_two_norm_square"] = detail::value_json(commutator_square);
    r.quantities["defect_two_norm_square"] = detail::value_json(defect_square);
    if constexpr (scalar_traits<T>::exact) {
      r.quantities["commutator_exact_zero"] = commutator_square.is_zero();
      r.quantities["defect_exact_zero"] = defect_square.is_zero();
    }
    if (!e_is_projection) r.metadata["NonProjection"] = true;
    r.pass = pass();
    return r;
  }
};

template <class T>
ProbabilisticRokhlinReport<T> probabilistic_rokhlin_check(const CondExp<T>& e, const Element<T>& proj,
                                                          const std::vector<Element<T>>& gens,
                                                          const TraceFunctional<T>& tau, double eps) {
  const auto& a = e.big();
  ProbabilisticRokhlinReport<T> rep{a->zero(), a->zero()};
  rep.mode = detail::mode_name<T>();
  rep.eps = eps;
  rep.e_is_projection = proj.is_projection();
  for (const auto& x : gens) {
    const auto n = two_norm(proj * x - x * proj, tau);
    if (n.numeric >= rep.commutator_numeric) {
      rep.commutator_numeric = n.numeric;
      rep.commutator_square = n.square;
    }
  }
  const auto d = two_norm(Element<T>::unit(a) - e.index() * e(proj), tau);
  rep.defect_square = d.square;
  rep.defect_numeric = d.numeric;
  return rep;
}

struct ElpwReport {
  double equivariance_numeric = 0.0;  // (1) max ||alpha_g(e_h) - e_gh||_2
  double commutator_numeric = 0.0;    // (2) max ||[e_g, a]||_2
  bool equivariance_exact_zero = false;
  bool commutators_exact_zero = false;
  bool partition_of_unity = false;    // (3)
  double eps = 0.0;
  std::string mode = "exact";

  bool pass() const { return equivariance_numeric < eps && commutator_numeric < eps && partition_of_unity; }

  CheckRecord record(const std::string& target) const {
    CheckRecord r{"elpw", target, mode};
    r.quantities["equivariance_two_norm_numeric"] = equivariance_numeric;
    r.quantities["commutator_two_norm_numeric"] = commutator_numeric;
    r.quantities["partition_of_unity"] = partition_of_unity;
    if (mode == "exact") {
      r.quantities["equivariance_exact_zero"] = equivariance_exact_zero;
      r.quantities["commutators_exact_zero"] = commutators_exact_zero;
    }
    r.pass = pass();
    return r;
  }
};

template <class T>
ElpwReport elpw_check(const GroupAction<T>& action, const std::vector<Element<T>>& family,
                      const std::vector<Element<T>>& gens, const TraceFunctional<T>& tau, double eps) {
  action.verify();
  if (static_cast<int>(family.size()) != action.order) {
    throw Error(ErrorKind::InvalidArgument, "one family member per group element");
  }
  ElpwReport rep;
  rep.mode = detail::mode_name<T>();
  rep.eps = eps;
  bool eq_zero = true, comm_zero = true;
  for (int g = 0; g < action.order; ++g) {
    for (int h = 0; h < action.order; ++h) {
      const auto diff = action.act(g, family[h]) - family[action.table[g][h]];
      eq_zero = eq_zero && detail::is_exact_zero(diff);
      rep.equivariance_numeric = std::max(rep.equivariance_numeric, two_norm(diff, tau).numeric);
    }
    for (const auto& x : gens) {
      const auto c = family[g] * x - x * family[g];
      comm_zero = comm_zero && detail::is_exact_zero(c);
      rep.commutator_numeric = std::max(rep.commutator_numeric, two_norm(c, tau).numeric);
    }
  }
  rep.equivariance_exact_zero = eq_zero;
  rep.commutators_exact_zero = comm_zero;
  Element<T> sum(action.algebra);
  for (const auto& f : family) sum += f;
  rep.partition_of_unity = sum == Element<T>::unit(action.algebra);
  return rep;
}

struct ThetaReport {
  bool inner_product_preserved = false;  // <z,z> = p
  bool theta_idempotent = false;
  bool theta_self_adjoint = false;
  bool index_identity = false;           // lambda^{-1} (lambda <z,z>) = p
  std::string mode = "exact";

  bool pass() const { return inner_product_preserved && theta_idempotent && theta_self_adjoint && index_identity; }

  CheckRecord record(const std::string& target) const {
    CheckRecord r{"theta_lemma", target, mode};
    r.quantities["inner_product_preserved"] = inner_product_preserved;
    r.quantities["theta_idempotent"] = theta_idempotent;
    r.quantities["theta_self_adjoint"] = theta_self_adjoint;
    r.quantities["index_identity"] = index_identity;
    r.pass = pass();
    return r;
  }
};

/// x in A^m with p = <x,x> = sum x_i^* x_i a projection; z = x p. Checks <z,z> = p,
/// that Theta_{z,z} = (z_i z_j^*)_{ij} is a self-adjoint idempotent in M_m(A), and
/// that lambda^{-1} E(Theta) = <x,x> for the rule E(Theta) = lambda <z,z>.
template <class T>
ThetaReport theta_lemma_check(const std::vector<Element<T>>& x, const T& lambda) {
  if (x.empty()) throw Error(ErrorKind::InvalidArgument, "module vector must have m >= 1 entries");
  if (scalar_traits<T>::sign(lambda) <= 0) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  const auto& alg = x.front().algebra();
  const std::size_t m = x.size();
  Element<T> p(alg);
  for (const auto& xi : x) p += xi.adjoint() * xi;
  if (!p.is_projection()) throw Error(ErrorKind::NotProjection, "<x,x> is not a projection");
  ThetaReport rep;
  rep.mode = detail::mode_name<T>();
  std::vector<Element<T>> z;
  for (const auto& xi : x) z.push_back(xi * p);
  Element<T> zz(alg);
  for (const auto& zi : z) zz += zi.adjoint() * zi;
  rep.inner_product_preserved = zz == p;
  std::vector<std::vector<Element<T>>> theta(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) theta[i].push_back(z[i] * z[j].adjoint());
  rep.theta_idempotent = true;
  rep.theta_self_adjoint = true;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      Element<T> sq(alg);
      for (std::size_t k = 0; k < m; ++k) sq += theta[i][k] * theta[k][j];
      rep.theta_idempotent = rep.theta_idempotent && sq == theta[i][j];
      rep.theta_self_adjoint = rep.theta_self_adjoint && theta[j][i].adjoint() == theta[i][j];
    }
  const T inv = scalar_traits<T>::one_like(lambda) / lambda;
  rep.index_identity = inv * (lambda * zz) == p;
  return rep;
}

/// Exact instance for theta_lemma_check in M_k over Q: x_i = a_i Q P with Q a
/// Cayley-transform orthogonal matrix, P a diagonal projection and sum a_i^2 = 1.
inline std::vector<Element<Scalar>> random_partial_isometry_column(std::mt19937_64& rng, int k, int m) {
  static const std::vector<std::vector<Rational>> weights = {
      {Rational(1)},
      {Rational(3, 5), Rational(4, 5)},
      {Rational(1, 3), Rational(2, 3), Rational(2, 3)},
      {Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2)}};
  if (m < 1 || m > static_cast<int>(weights.size())) throw Error(ErrorKind::InvalidArgument, "m must be in 1..4");
  const auto alg = exact_algebra({k});
  const Scalar zero = alg->zero(), one = alg->one();
  std::uniform_int_distribution<int> entry(-3, 3);
  Matrix<Scalar> s(k, k, zero);
  for (int r = 0; r < k; ++r)
    for (int c = r + 1; c < k; ++c) {
      s(r, c) = alg->from_rational(Rational(entry(rng), 2));
      s(c, r) = -s(r, c);
    }
  const auto id = Matrix<Scalar>::identity(k, zero, one);
  const auto q = (id - s) * *inverse(id + s);  // I + S is invertible for skew S
  Matrix<Scalar> pm(k, k, zero);
  for (int i = 0; i < k; ++i)
    if (rng() & 1) pm(i, i) = one;
  std::vector<Element<Scalar>> x;
  for (int i = 0; i < m; ++i) {
    Element<Scalar> xi(alg);
    xi.set_block(0, alg->from_rational(weights[m - 1][i]) * (q * pm));
    x.push_back(std::move(xi));
  }
  return x;
}

}  // namespace watatani::mm
