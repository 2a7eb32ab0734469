#pragma once

// Tensor towers B, B (x) B, ..., B^{(x) depth} over a base inclusion with
// embeddings phi_k(x) = 1 (x) x and expectations E_k = id (x) ... (x) id (x) E on
// the last slot, plus unitary perturbation budgets.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "watatani/multimatrix.hpp"
#include "watatani/report.hpp"

namespace watatani::tower {

using mm::AlgebraPtr;
using mm::CondExp;
using mm::Element;

template <class T>
struct TowerBase {
  CondExp<T> expectation;  // quasi-basis already solved
  Element<T> e;
};

template <class T>
class TensorTower {
 public:
  static constexpr std::size_t kDefaultDimensionCap = 10'000'000;

  /// Throws BadBase unless (Index E) E(e) = 1; CostGuard if dim(B)^depth exceeds the cap.
  TensorTower(TowerBase<T> base, int depth) : base_(std::move(base)), depth_(depth) {
    if (depth < 1) throw Error(ErrorKind::InvalidArgument, "depth must be at least 1");
    const auto& b = base_.expectation.big();
    const std::size_t cap = cost_guard(kDefaultDimensionCap);
    double total = 1.0;
    for (int k = 0; k < depth; ++k) total *= static_cast<double>(b->dim());
    if (total > static_cast<double>(cap)) {
      throw Error(ErrorKind::CostGuard, "dim(B)^depth = " + fmt::format("{:.0f}", total) + " exceeds the cap");
    }
    if (!(base_.expectation.index() * base_.expectation(base_.e) == Element<T>::unit(b))) {
      throw Error(ErrorKind::BadBase, "(Index E) E(e) != 1 for the base");
    }
    for (std::size_t j = 0; j < b->dim(); ++j) {
      std::vector<std::pair<std::size_t, T>> col;
      for (std::size_t r = 0; r < b->dim(); ++r)
        if (!mm::structural_zero(base_.expectation.map(r, j))) col.emplace_back(r, base_.expectation.map(r, j));
      e_cols_.push_back(std::move(col));
    }
    levels_.push_back(b);
    for (int k = 2; k <= depth; ++k) {
      std::vector<int> blocks;
      for (int x : levels_.back()->blocks())
        for (int y : b->blocks()) blocks.push_back(x * y);
      levels_.push_back(mm::Algebra<T>::make(std::move(blocks), b->zero(), b->one(), b->tolerance()));
    }
  }

  int depth() const { return depth_; }
  const TowerBase<T>& base() const { return base_; }
  const AlgebraPtr<T>& base_algebra() const { return base_.expectation.big(); }
  const AlgebraPtr<T>& level(int k) const { return levels_.at(k - 1); }
  bool e_is_projection() const { return base_.e.is_projection(); }

  /// Matrix-unit index of level k from the per-slot matrix-unit indices of B.
  std::size_t index_of(int k, const std::vector<std::size_t>& slots) const {
    const auto& b = *base_algebra();
    std::size_t block = 0, row = 0, col = 0;
    for (int s = 0; s < k; ++s) {
      const auto [bb, r, c] = b.locate(slots[s]);
      const std::size_t n = b.block_size(bb);
      block = block * b.block_count() + bb;
      row = row * n + r;
      col = col * n + c;
    }
    return level(k)->index(static_cast<int>(block), static_cast<int>(row), static_cast<int>(col));
  }

  /// Inverse of index_of.
  std::vector<std::size_t> slots_of(int k, std::size_t idx) const {
    const auto& b = *base_algebra();
    auto [block, row, col] = level(k)->locate(idx);
    std::vector<std::size_t> out(k);
    for (int s = k - 1; s >= 0; --s) {
      const int bb = block % b.block_count();
      const int n = b.block_size(bb);
      out[s] = b.index(bb, row % n, col % n);
      block /= b.block_count();
      row /= n;
      col /= n;
    }
    return out;
  }

  /// x_1 (x) ... (x) x_k for elements of B.
  Element<T> tensor(const std::vector<Element<T>>& factors) const {
    const int k = static_cast<int>(factors.size());
    Element<T> out(level(k));
    std::vector<std::vector<std::pair<std::size_t, T>>> nz(k);
    for (int s = 0; s < k; ++s)
      for (std::size_t i = 0; i < factors[s].coords().size(); ++i)
        if (!mm::structural_zero(factors[s][i])) nz[s].emplace_back(i, factors[s][i]);
    std::vector<std::size_t> slots(k);
    auto rec = [&](auto&& self, int s, const T& coef) -> void {
      if (s == k) {
        out[index_of(k, slots)] += coef;
        return;
      }
      for (const auto& [i, v] : nz[s]) {
        slots[s] = i;
        self(self, s + 1, coef * v);
      }
    };
    if (k > 0) rec(rec, 0, base_algebra()->one());
    return out;
  }

  /// 1 (x) ... (x) y (x) ... (x) 1 with y in slot s (1-based) of level k.
  Element<T> slot(int k, int s, const Element<T>& y) const {
    std::vector<Element<T>> f(k, Element<T>::unit(base_algebra()));
    f[s - 1] = y;
    return tensor(f);
  }

  /// phi_k(x) = 1 (x) x from level k to level k+1.
  Element<T> phi(int k, const Element<T>& x) const {
    Element<T> out(level(k + 1));
    const auto one = Element<T>::unit(base_algebra());
    for (std::size_t idx = 0; idx < x.coords().size(); ++idx) {
      if (mm::structural_zero(x[idx])) continue;
      auto slots = slots_of(k, idx);
      slots.insert(slots.begin(), 0);
      for (std::size_t u = 0; u < one.coords().size(); ++u) {
        if (mm::structural_zero(one[u])) continue;
        slots[0] = u;
        out[index_of(k + 1, slots)] += x[idx];
      }
    }
    return out;
  }

  /// E_k = id (x) ... (x) id (x) E on level k.
  Element<T> expect(int k, const Element<T>& x) const {
    Element<T> out(level(k));
    for (std::size_t idx = 0; idx < x.coords().size(); ++idx) {
      if (mm::structural_zero(x[idx])) continue;
      auto slots = slots_of(k, idx);
      const std::size_t j = slots.back();
      for (const auto& [r, v] : e_cols_[j]) {
        slots.back() = r;
        out[index_of(k, slots)] += v * x[idx];
      }
    }
    return out;
  }

  /// 1 (x) ... (x) 1 (x) Index E.
  Element<T> index(int k) const { return slot(k, k, base_.expectation.index()); }

  /// e-hat = 1 (x) ... (x) 1 (x) e at level k.
  Element<T> e_hat(int k) const { return slot(k, k, base_.e); }

  /// Generators of the image of E_k: B in slots 1..k-1 and the subalgebra in slot k.
  std::vector<Element<T>> image_generators(int k) const {
    std::vector<Element<T>> out;
    for (int s = 1; s < k; ++s)
      for (const auto& u : mm::matrix_unit_basis(base_algebra())) out.push_back(slot(k, s, u));
    for (const auto& p : base_.expectation.inclusion.small_basis) out.push_back(slot(k, k, p));
    return out;
  }

  /// E_k as a CondExp object (image basis = level-(k-1) units (x) small basis); small levels only.
  CondExp<T> level_cond_exp(int k) const {
    const auto& alg = level(k);
    std::vector<Element<T>> pbasis;
    const auto& small = base_.expectation.inclusion.small_basis;
    for (std::size_t i = 0; i < (k > 1 ? level(k - 1)->dim() : 1); ++i)
      for (const auto& p : small) {
        if (k == 1) {
          pbasis.push_back(p);
        } else {
          auto slots_prefix = slots_of(k - 1, i);
          Element<T> y(alg);
          for (std::size_t j = 0; j < p.coords().size(); ++j) {
            if (mm::structural_zero(p[j])) continue;
            auto s = slots_prefix;
            s.push_back(j);
            y[index_of(k, s)] += p[j];
          }
          pbasis.push_back(y);
        }
      }
    auto map = mm::linear_map_matrix(alg, [&](const Element<T>& x) { return expect(k, x); });
    return mm::make_cond_exp(mm::Inclusion<T>::make(alg, std::move(pbasis)), std::move(map));
  }

 private:
  TowerBase<T> base_;
  int depth_;
  std::vector<AlgebraPtr<T>> levels_;
  std::vector<std::vector<std::pair<std::size_t, T>>> e_cols_;
};

template <class T>
TensorTower<T> build_tower(TowerBase<T> base, int depth) {
  return TensorTower<T>(std::move(base), depth);
}

/// Direct-sum base: B = n copies of M_{A_dim}, e = first block unit.
template <class T>
TowerBase<T> direct_sum_base(const mm::DirectSumExample<T>& ex) {
  return TowerBase<T>{ex.expectation, ex.family.front()};
}

/// Same inclusion with the non-central projection e = (p_1, ..., p_n), where p_b is the
/// sum of the diagonal units E_ii with i = b mod n. Since sum_b p_b = 1, (Index E) E(e) = 1.
/// Unlike a block unit, this e does not commute with the unitaries of B.
template <class T>
TowerBase<T> twisted_direct_sum_base(const mm::DirectSumExample<T>& ex) {
  const auto& b = ex.expectation.big();
  Element<T> e(b);
  for (int blk = 0; blk < b->block_count(); ++blk)
    for (int i = 0; i < b->block_size(blk); ++i)
      if (i % ex.n == blk) e.at(blk, i, i) = b->one();
  return TowerBase<T>{ex.expectation, e};
}

struct TowerReport {
  int depth = 0;
  bool defect_zero = false;              // E_{k+1} phi_k = phi_k E_k on bases
  double max_defect_numeric = 0.0;
  bool phi_homomorphism = false;         // unital, multiplicative, *-preserving
  bool expectations_valid = false;       // idempotent, unital, bimodular over image generators
  int index_levels_checked = 0;
  bool index_matches = false;
  bool e_is_projection = true;
  std::string mode = "exact";

  bool pass() const { return defect_zero && phi_homomorphism && expectations_valid && index_matches; }

  CheckRecord record(const std::string& target) const {
    CheckRecord r{"tower", target, mode};
    r.quantities["depth"] = depth;
    r.quantities["intertwining_defect_zero"] = defect_zero;
    r.quantities["intertwining_defect_numeric"] = max_defect_numeric;
    r.quantities["phi_homomorphism"] = phi_homomorphism;
    r.quantities["expectations_valid"] = expectations_valid;
    r.quantities["index_levels_checked"] = index_levels_checked;
    r.quantities["index_matches"] = index_matches;
    if (!e_is_projection) r.metadata["NonProjection"] = true;
    r.metadata["embedding"] = "phi_k(x) = 1 (x) x, expectation on the last slot";
    r.pass = pass();
    return r;
  }
};

namespace detail {

/// All basis pairs when the level is small, otherwise a seeded sample of them.
inline std::vector<std::pair<std::size_t, std::size_t>> basis_pairs(std::size_t dim, std::size_t limit,
                                                                    std::uint64_t seed) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (dim * dim <= limit) {
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) out.emplace_back(i, j);
    return out;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, dim - 1);
  for (std::size_t t = 0; t < limit; ++t) out.emplace_back(pick(rng), pick(rng));
  return out;
}

}  // namespace detail

/// Verifies every tower invariant level by level.
template <class T>
TowerReport verify_tower(const TensorTower<T>& t, int max_index_level = 3) {
  TowerReport rep;
  rep.depth = t.depth();
  rep.mode = scalar_traits<T>::exact ? "exact" : "float";
  rep.e_is_projection = t.e_is_projection();
  rep.defect_zero = rep.phi_homomorphism = rep.expectations_valid = rep.index_matches = true;
  for (int k = 1; k <= t.depth(); ++k) {
    const auto& alg = t.level(k);
    const auto basis = mm::matrix_unit_basis(alg);
    if (k < t.depth()) {
      rep.phi_homomorphism = rep.phi_homomorphism && t.phi(k, Element<T>::unit(alg)) == Element<T>::unit(t.level(k + 1));
      for (const auto& [i, j] : detail::basis_pairs(basis.size(), 4096, 17 + k)) {
        rep.phi_homomorphism = rep.phi_homomorphism && t.phi(k, basis[i] * basis[j]) == t.phi(k, basis[i]) * t.phi(k, basis[j]);
      }
      for (const auto& x : basis) {
        const auto px = t.phi(k, x);
        rep.phi_homomorphism = rep.phi_homomorphism && t.phi(k, x.adjoint()) == px.adjoint();
        const auto d = t.expect(k + 1, px) - t.phi(k, t.expect(k, x));
        rep.defect_zero = rep.defect_zero && d.is_zero();
        rep.max_defect_numeric = std::max(rep.max_defect_numeric, d.max_abs());
      }
    }
    const auto gens = t.image_generators(k);
    rep.expectations_valid = rep.expectations_valid && t.expect(k, Element<T>::unit(alg)) == Element<T>::unit(alg);
    for (const auto& x : basis) {
      const auto ex = t.expect(k, x);
      rep.expectations_valid = rep.expectations_valid && t.expect(k, ex) == ex;
      for (const auto& g : gens) {
        rep.expectations_valid =
            rep.expectations_valid && t.expect(k, g * x) == g * ex && t.expect(k, x * g) == ex * g;
      }
    }
    if (k <= max_index_level && alg->dim() <= 64) {
      const auto ce = mm::with_quasi_basis(t.level_cond_exp(k));
      rep.index_matches = rep.index_matches && ce.index() == t.index(k);
      ++rep.index_levels_checked;
    }
  }
  return rep;
}

struct TowerRokhlinReport {
  int m = 0;
  bool commutators_exact_zero = false;  // (a)
  bool index_identity = false;          // (b)
  double commutator_numeric = 0.0;
  double defect_norm_numeric = 0.0;     // ||1 - Index E_depth(e-hat)||
  std::string mode = "exact";

  bool pass() const { return commutators_exact_zero && index_identity; }

  CheckRecord record(const std::string& target) const {
    CheckRecord r{"tower_rokhlin", target, mode};
    r.quantities["M"] = m;
    r.quantities["commutators_exact_zero"] = commutators_exact_zero;
    r.quantities["index_identity"] = index_identity;
    r.quantities["commutator_norm_numeric"] = commutator_numeric;
    r.quantities["defect_norm_numeric"] = defect_norm_numeric;
    r.pass = pass();
    return r;
  }
};

/// F = matrix units of the first M slots, e-hat = 1 (x) ... (x) 1 (x) e (or a replacement e').
template <class T>
TowerRokhlinReport tower_rokhlin_check(const TensorTower<T>& t, int m,
                                       const std::optional<Element<T>>& replacement = std::nullopt) {
  if (m < 1 || m >= t.depth()) throw Error(ErrorKind::InvalidArgument, "tower_rokhlin_check needs 1 <= M < depth");
  const int k = t.depth();
  TowerRokhlinReport rep;
  rep.m = m;
  rep.mode = scalar_traits<T>::exact ? "exact" : "float";
  const auto e_hat = replacement ? t.slot(k, k, *replacement) : t.e_hat(k);
  rep.commutators_exact_zero = true;
  const auto one = Element<T>::unit(t.base_algebra());
  for (const auto& u : mm::matrix_unit_basis(t.level(m))) {
    // u (x) 1 (x) ... (x) 1
    auto x = u;
    for (int s = m; s < k; ++s) {
      Element<T> y(t.level(s + 1));
      for (std::size_t idx = 0; idx < x.coords().size(); ++idx) {
        if (mm::structural_zero(x[idx])) continue;
        auto slots = t.slots_of(s, idx);
        slots.push_back(0);
        for (std::size_t v = 0; v < one.coords().size(); ++v) {
          if (mm::structural_zero(one[v])) continue;
          slots.back() = v;
          y[t.index_of(s + 1, slots)] += x[idx];
        }
      }
      x = std::move(y);
    }
    const auto c = x * e_hat - e_hat * x;
    rep.commutators_exact_zero = rep.commutators_exact_zero && c.is_zero();
    rep.commutator_numeric = std::max(rep.commutator_numeric, mm::operator_norm(c));
  }
  const auto d = Element<T>::unit(t.level(k)) - t.index(k) * t.expect(k, e_hat);
  rep.index_identity = d.is_zero();
  rep.defect_norm_numeric = mm::operator_norm(d);
  return rep;
}

/// Skew-adjoint generators h_k (slots M+1..depth) with ||h_k|| = eps, and W_k = exp(h_k).
struct PerturbationPlan {
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::vector<Eigen::MatrixXd> generators;  // one block-diagonal skew matrix per perturbed slot, block by block
};

struct BudgetReport {
  double eps = 0.0;
  double delta1 = 0.0;          // ||e' - e||
  double delta2 = 0.0;          // ||1 - Index E(e')||
  double index_norm = 0.0;
  double w_defect = 0.0;        // ||W - 1||
  double unitarity_defect = 0.0;
  double sinh_bound = 0.0;      // 2 sinh(eps) per level
  bool level_bound_ok = false;  // ||W_k - 1|| <= 2 sinh(eps)
  bool budget_ok = false;       // delta2 <= Index delta1 + 1e-9
  bool triangle_ok = false;     // delta1 <= 2 ||W - 1|| + 1e-9
  bool large = false;
  std::optional<bool> monotone;

  bool pass() const { return budget_ok && triangle_ok && level_bound_ok; }

  CheckRecord record(const std::string& target) const {
    CheckRecord r{"budget", target, "float"};
    r.quantities["eps"] = eps;
    r.quantities["delta1"] = delta1;
    r.quantities["delta2"] = delta2;
    r.quantities["index_norm"] = index_norm;
    r.quantities["w_minus_one_norm"] = w_defect;
    r.quantities["unitarity_defect"] = unitarity_defect;
    r.quantities["budget_holds"] = budget_ok;
    r.quantities["triangle_holds"] = triangle_ok;
    r.quantities["level_bound_holds"] = level_bound_ok;
    if (monotone) r.quantities["monotone_in_scale"] = *monotone;
    if (large) r.metadata["LargePerturbation"] = true;
    r.pass = pass();
    return r;
  }
};

namespace detail {

/// Real orthogonal exp(h) with a polar correction; returns the corrected matrix.
inline Eigen::MatrixXd unitary_exp(const Eigen::MatrixXd& h) {
  const Eigen::MatrixXd w = h.exp();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

template <class T>
Element<T> from_blocks(const AlgebraPtr<T>& a, const std::vector<Eigen::MatrixXd>& blocks) {
  Element<T> x(a);
  for (int b = 0; b < a->block_count(); ++b)
    for (int r = 0; r < a->block_size(b); ++r)
      for (int c = 0; c < a->block_size(b); ++c) x.at(b, r, c) = blocks[b](r, c);
  return x;
}

}  // namespace detail

/// Seeded plan: random skew-symmetric blocks rescaled to operator norm eps.
inline PerturbationPlan make_plan(const mm::Algebra<double>& b, int levels, double eps, std::uint64_t seed) {
  PerturbationPlan plan{eps, seed, {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int l = 0; l < levels; ++l) {
    for (int blk = 0; blk < b.block_count(); ++blk) {
      const int n = b.block_size(blk);
      Eigen::MatrixXd g(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) g(r, c) = u(rng);
      plan.generators.push_back(g - g.transpose());
    }
  }
  // common rescaling per level so that max block norm = eps
  const int nb = b.block_count();
  for (int l = 0; l < levels; ++l) {
    double norm = 0.0;
    for (int blk = 0; blk < nb; ++blk) {
      const auto& g = plan.generators[l * nb + blk];
      if (g.size()) norm = std::max(norm, Eigen::JacobiSVD<Eigen::MatrixXd>(g).singularValues()(0));
    }
    for (int blk = 0; blk < nb; ++blk) {
      auto& g = plan.generators[l * nb + blk];
      g = norm > 0 ? Eigen::MatrixXd(g * (eps / norm)) : Eigen::MatrixXd(Eigen::MatrixXd::Zero(g.rows(), g.cols()));
    }
  }
  return plan;
}

/// e' = W e-hat W^* with W = W_{M+1} ... W_depth, W_k = exp(h_k) in slot k.
inline BudgetReport perturbed_budget_check(const TensorTower<double>& t, const PerturbationPlan& plan, int m,
                                           bool check_monotone = true) {
  const int k = t.depth();
  if (m < 0 || m >= k) throw Error(ErrorKind::InvalidArgument, "budget check needs 0 <= M < depth");
  const auto& b = t.base_algebra();
  const int nb = b->block_count();
  const int levels = k - m;
  if (static_cast<int>(plan.generators.size()) < levels * nb) {
    throw Error(ErrorKind::InvalidArgument, "plan has fewer levels than depth - M");
  }
  auto evaluate = [&](double scale, BudgetReport& rep) {
    const auto& lk = t.level(k);
    auto w = Element<double>::unit(lk);
    rep.level_bound_ok = true;
    for (int l = 0; l < levels; ++l) {
      std::vector<Eigen::MatrixXd> blocks;
      for (int blk = 0; blk < nb; ++blk) blocks.push_back(detail::unitary_exp(scale * plan.generators[l * nb + blk]));
      const auto wl = detail::from_blocks(b, blocks);
      rep.level_bound_ok = rep.level_bound_ok &&
                           mm::operator_norm(wl - Element<double>::unit(b)) <= 2 * std::sinh(scale * plan.eps) + 1e-12;
      w = w * t.slot(k, m + 1 + l, wl);
    }
    rep.unitarity_defect = mm::operator_norm(w.adjoint() * w - Element<double>::unit(lk));
    const auto e_hat = t.e_hat(k);
    const auto ep = w * e_hat * w.adjoint();
    rep.delta1 = mm::operator_norm(ep - e_hat);
    rep.delta2 = mm::operator_norm(Element<double>::unit(lk) - t.index(k) * t.expect(k, ep));
    rep.index_norm = mm::operator_norm(t.index(k));
    rep.w_defect = mm::operator_norm(w - Element<double>::unit(lk));
  };
  BudgetReport rep;
  rep.eps = plan.eps;
  rep.sinh_bound = 2 * std::sinh(plan.eps);
  evaluate(1.0, rep);
  if (rep.unitarity_defect > 1e-12 * std::max(1, levels)) {
    throw Error(ErrorKind::InvalidArgument, "perturbation unitaries are not unitary to 1e-12");
  }
  rep.budget_ok = rep.delta2 <= rep.index_norm * rep.delta1 + 1e-9;
  rep.triangle_ok = rep.delta1 <= 2 * rep.w_defect + 1e-9;
  rep.large = plan.eps > 0.1;
  if (check_monotone && plan.eps > 0) {
    BudgetReport half;
    evaluate(0.5, half);
    rep.monotone = half.delta2 <= rep.delta2 + 1e-12;
  }
  return rep;
}

}  // namespace watatani::tower
