#pragma once

// Executes a parsed spec: builds every declared object in order, then runs the
// checks and collects one record per check. Domain errors are captured per check.

#include <any>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "watatani/cuntz.hpp"
#include "watatani/dsl.hpp"
#include "watatani/multimatrix.hpp"
#include "watatani/report.hpp"
#include "watatani/rokhlin.hpp"
#include "watatani/temperley_lieb.hpp"
#include "watatani/tower.hpp"

namespace watatani {

struct RunOptions {
  std::uint64_t seed = 0;
  std::optional<int> max_len;     // overrides every max_len
  std::optional<int> depth;       // overrides every tower depth
  std::optional<double> eps;      // overrides budget eps
  std::optional<std::string> only;  // run only checks of this kind
};

/// Sub-seed for the check at position `index` (splitmix64 finalizer).
inline std::uint64_t sub_seed(std::uint64_t seed, std::size_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace runner {

using namespace cuntz;

using MMElement = mm::Element<Scalar>;
using MMAlgebra = mm::AlgebraPtr<Scalar>;

struct JonesObject {
  tl::JonesData data;
  mutable std::optional<tl::JonesAlgebras> algebras;
  const tl::JonesAlgebras& alg() const {
    if (!algebras) algebras = tl::jones_algebra_build(data);
    return *algebras;
  }
};

struct TowerObject {
  dsl::TowerDecl decl;
  std::shared_ptr<tower::TensorTower<Scalar>> exact;
};

struct MMExpectation {
  mm::CondExp<Scalar> ce;
  mm::TraceFunctional<Scalar> tau;
};

/// Declared objects by name; a failed declaration keeps its error.
class Environment {
 public:
  Environment(const dsl::SpecDocument& doc, const RunOptions& opts) : doc_(doc) {
    for (const auto& d : doc.declarations) {
      const std::string& name = dsl::name_of(d);
      try {
        objects_[name] = std::visit([&](const auto& x) { return build(x, opts); }, d);
      } catch (const Error& e) {
        errors_.emplace(name, e);
      }
    }
  }

  template <class T>
  const T& get(const std::string& name) const {
    if (auto it = errors_.find(name); it != errors_.end()) throw it->second;
    return std::any_cast<const T&>(objects_.at(name));
  }

  const dsl::Declaration& decl(const std::string& name) const { return *doc_.find(name); }

 private:
  std::any build(const dsl::FieldDecl& f, const RunOptions&) {
    if (f.rational) return NumberField::rationals();
    return NumberField::make(f.poly, f.lo, f.hi, false, f.var);
  }

  std::any build(const dsl::IzumiDecl& z, const RunOptions&) {
    if (!z.field.empty()) {
      const auto& f = get<FieldPtr>(z.field);
      const auto& golden = fields::golden_quartic();
      const double root = std::sqrt((1 + std::sqrt(5.0)) / 2);
      if (f->minimal_polynomial() != golden->minimal_polynomial() || !(f->root_interval().lo.get_d() < root) ||
          !(root < f->root_interval().hi.get_d())) {
        throw Error(ErrorKind::FieldMismatch, "izumi needs the positive root s > 1 of x^4 - x^2 - 1");
      }
    }
    return std::make_shared<const RhoEndomorphism>();
  }

  std::any build(const dsl::AlgebraDecl& a, const RunOptions&) { return mm::exact_algebra(a.blocks); }

  std::any build(const dsl::SubalgebraDecl& s, const RunOptions&) {
    if (s.shape == "jones_a") return s.of;
    const auto& a = get<MMAlgebra>(s.of);
    if (s.shape == "diagonal") return mm::diagonal_subalgebra(a);
    if (s.shape == "scalars") return mm::scalar_subalgebra(a);
    return mm::whole_algebra(a);
  }

  std::any build(const dsl::TraceDecl& t, const RunOptions&) {
    if (t.shape == "markov") return t.of;
    const auto& a = get<MMAlgebra>(t.of);
    if (t.shape == "uniform") return mm::TraceFunctional<Scalar>::uniform(a);
    std::vector<Scalar> w;
    for (const auto& r : t.weights) w.push_back(a->from_rational(r));
    return mm::TraceFunctional<Scalar>::make(a, std::move(w));
  }

  std::any build(const dsl::ExpectationDecl& e, const RunOptions&) {
    const auto& td = std::get<dsl::TraceDecl>(decl(e.trace));
    if (td.shape == "markov") {
      (void)get<std::string>(e.trace);
      (void)get<std::string>(e.onto);
      return td.of;
    }
    const auto& tau = get<mm::TraceFunctional<Scalar>>(e.trace);
    return MMExpectation{mm::trace_ce_construct(get<mm::Inclusion<Scalar>>(e.onto), tau), tau};
  }

  std::any build(const dsl::ElementDecl& e, const RunOptions&) {
    if (std::holds_alternative<dsl::IzumiDecl>(decl(e.in))) {
      const auto& rho = get<std::shared_ptr<const RhoEndomorphism>>(e.in);
      return cuntz_value(e.expr, *rho, generator_name(e.in));
    }
    return mm_value(e.expr, get<MMAlgebra>(e.in));
  }

  std::any build(const dsl::ExampleDecl& x, const RunOptions&) {
    if (x.shape == "ex24") return mm::direct_sum_example(x.a_dim, x.n);
    mm::CoverMaps maps{x.n, x.size, {}};
    for (int j = 1; j < x.n; ++j) {
      std::vector<int> p(x.size);
      for (int t = 0; t < x.size; ++t) p[t] = (t + j) % x.size;
      maps.sigma[{0, j}] = p;
    }
    return mm::cover_example(mm::exact_algebra({1}), maps);
  }

  std::any build(const dsl::JonesDecl& j, const RunOptions&) {
    return std::make_shared<const JonesObject>(
        JonesObject{j.tau ? tl::JonesData::from_tau(j.n, *j.tau) : tl::JonesData::from_loop_index(j.n, *j.loop), {}});
  }

  std::any build(const dsl::TowerDecl& t, const RunOptions& opts) {
    TowerObject obj{t, nullptr};
    if (opts.depth) obj.decl.depth = *opts.depth;
    const auto ex = mm::direct_sum_example(t.a_dim, t.n);
    obj.exact = std::make_shared<tower::TensorTower<Scalar>>(
        t.e == "twisted" ? tower::twisted_direct_sum_base(ex) : tower::direct_sum_base(ex), obj.decl.depth);
    return obj;
  }

  std::string generator_name(const std::string& izumi) const {
    const auto& z = std::get<dsl::IzumiDecl>(decl(izumi));
    if (z.field.empty()) return "s";
    return std::get<dsl::FieldDecl>(decl(z.field)).var;
  }

  /// Scalar subexpressions (numbers, the field generator) support negative powers.
  std::optional<Scalar> scalar_value(const dsl::Expr& x, const FieldPtr& f, const std::string& gen) const {
    using Op = dsl::Expr::Op;
    switch (x.op) {
      case Op::Num: return Scalar(f, x.num);
      case Op::Sym:
        if (x.sym == gen) return Scalar::generator(f);
        return std::nullopt;
      case Op::Neg: {
        auto v = scalar_value(x.args[0], f, gen);
        return v ? std::optional<Scalar>(-*v) : std::nullopt;
      }
      case Op::Adj: return scalar_value(x.args[0], f, gen);
      case Op::Pow: {
        auto v = scalar_value(x.args[0], f, gen);
        if (!v) return std::nullopt;
        Scalar base = x.power < 0 ? v->inverse() : *v;
        Scalar out = Scalar::one(f);
        for (int i = 0; i < std::abs(x.power); ++i) out = out * base;
        return out;
      }
      case Op::Add:
      case Op::Mul: {
        std::optional<Scalar> acc;
        for (const auto& a : x.args) {
          auto v = scalar_value(a, f, gen);
          if (!v) return std::nullopt;
          acc = !acc ? *v : (x.op == Op::Add ? *acc + *v : *acc * *v);
        }
        return acc;
      }
      default: return std::nullopt;
    }
  }

  CuntzElement cuntz_value(const dsl::Expr& x, const RhoEndomorphism& rho, const std::string& gen) const {
    using Op = dsl::Expr::Op;
    const auto& f = rho.field();
    if (auto s = scalar_value(x, f, gen)) return CuntzElement::scalar(f, *s);
    switch (x.op) {
      case Op::Sym:
        if (x.sym == "S1") return CuntzElement::generator(f, 1);
        if (x.sym == "S2") return CuntzElement::generator(f, 2);
        return get<CuntzElement>(x.sym);
      case Op::Neg: return -cuntz_value(x.args[0], rho, gen);
      case Op::Adj: return cuntz_value(x.args[0], rho, gen).adjoint();
      case Op::Pow: {
        if (x.power < 0) throw Error(ErrorKind::InvalidArgument, "negative power of a non-scalar element");
        const auto base = cuntz_value(x.args[0], rho, gen);
        auto out = CuntzElement::unit(f);
        for (int i = 0; i < x.power; ++i) out = out * base;
        return out;
      }
      case Op::Add:
      case Op::Mul: {
        auto acc = cuntz_value(x.args[0], rho, gen);
        for (std::size_t i = 1; i < x.args.size(); ++i) {
          const auto v = cuntz_value(x.args[i], rho, gen);
          acc = x.op == Op::Add ? acc + v : acc * v;
        }
        return acc;
      }
      default: throw Error(ErrorKind::InvalidArgument, "matrix units are not Cuntz elements");
    }
  }

  MMElement mm_value(const dsl::Expr& x, const MMAlgebra& a) const {
    using Op = dsl::Expr::Op;
    switch (x.op) {
      case Op::Num: return MMElement::scalar(a, a->from_rational(x.num));
      case Op::Sym: {
        const auto& v = get<MMElement>(x.sym);
        if (!v.algebra()->same_shape(*a)) throw Error(ErrorKind::InvalidArgument, x.sym + " lives elsewhere");
        return v;
      }
      case Op::MatrixUnit: {
        const int b = x.idx[0] - 1, r = x.idx[1] - 1, c = x.idx[2] - 1;
        if (b >= a->block_count() || r >= a->block_size(b) || c >= a->block_size(b)) {
          throw Error(ErrorKind::InvalidArgument, "matrix unit " + x.to_string() + " out of range");
        }
        return MMElement::matrix_unit(a, b, r, c);
      }
      case Op::BlockUnit:
        if (x.idx[0] > a->block_count()) throw Error(ErrorKind::InvalidArgument, x.to_string() + " out of range");
        return MMElement::block_unit(a, x.idx[0] - 1);
      case Op::Neg: return -mm_value(x.args[0], a);
      case Op::Adj: return mm_value(x.args[0], a).adjoint();
      case Op::Pow: {
        const auto base = mm_value(x.args[0], a);
        if (x.power < 0) {
          const auto s = base.scalar_value();
          if (!s || s->is_zero()) throw Error(ErrorKind::InvalidArgument, "negative power of a non-scalar element");
          MMElement out = MMElement::unit(a);
          for (int i = 0; i < -x.power; ++i) out = s->inverse() * out;
          return out;
        }
        MMElement out = MMElement::unit(a);
        for (int i = 0; i < x.power; ++i) out = out * base;
        return out;
      }
      case Op::Add:
      case Op::Mul: {
        auto acc = mm_value(x.args[0], a);
        for (std::size_t i = 1; i < x.args.size(); ++i) {
          const auto v = mm_value(x.args[i], a);
          acc = x.op == Op::Add ? acc + v : acc * v;
        }
        return acc;
      }
    }
    throw Error(ErrorKind::InvalidArgument, "bad expression");
  }

  const dsl::SpecDocument& doc_;
  std::map<std::string, std::any> objects_;
  std::map<std::string, Error> errors_;
};

// ---------------------------------------------------------------------------

/// Multimatrix data shared by the expectation and example targets.
struct MMTarget {
  mm::CondExp<Scalar> ce;
  mm::TraceFunctional<Scalar> tau;
  std::vector<MMElement> family;  // empty for plain expectations
};

inline json rational_json(const Scalar& s) { return s.to_string(); }

class CheckRunner {
 public:
  CheckRunner(const dsl::SpecDocument& doc, const RunOptions& opts) : doc_(doc), opts_(opts), env_(doc, opts) {}

  CheckRecord run(const dsl::Check& c, std::size_t index) {
    try {
      CheckRecord r = dispatch(c, index);
      r.name = c.kind;
      r.target = c.target;
      return r;
    } catch (const Error& e) {
      CheckRecord r{c.kind, c.target, "exact"};
      r.pass = false;
      r.metadata["error"] = std::string(to_string(e.kind()));
      r.metadata["message"] = e.what();
      return r;
    }
  }

 private:
  int max_len(const dsl::Check& c, int fallback) const {
    if (opts_.max_len) return *opts_.max_len;
    return int_param(c, "max_len", fallback);
  }
  static int int_param(const dsl::Check& c, const std::string& k, int fallback) {
    const auto* p = c.find(k);
    return p ? std::stoi(p->text) : fallback;
  }
  static double number_param(const dsl::Check& c, const std::string& k, double fallback) {
    const auto* p = c.find(k);
    if (!p) return fallback;
    // mpq get_d truncates; divide the parts so 1e-6 rounds to the nearest double
    const Rational r = parse_rational(p->text);
    return r.get_num().get_d() / r.get_den().get_d();
  }
  static std::optional<Rational> rational_param(const dsl::Check& c, const std::string& k) {
    const auto* p = c.find(k);
    if (!p) return std::nullopt;
    return parse_rational(p->text);
  }
  std::uint64_t seed_param(const dsl::Check& c, std::size_t index) const {
    const auto* p = c.find("seed");
    return p ? std::stoull(p->text) : sub_seed(opts_.seed, index);
  }

  const MMElement& element(const std::string& name) const { return env_.get<MMElement>(name); }
  std::vector<MMElement> elements(const dsl::Check& c, const std::string& k) const {
    std::vector<MMElement> out;
    for (const auto& n : c.find(k)->list) out.push_back(element(n));
    return out;
  }

  MMTarget mm_target(const std::string& name) const {
    const auto& d = env_.decl(name);
    if (const auto* x = std::get_if<dsl::ExampleDecl>(&d)) {
      if (x->shape == "ex24") {
        const auto& ex = env_.get<mm::DirectSumExample<Scalar>>(name);
        return {ex.expectation, ex.tau, ex.family};
      }
      const auto& ex = env_.get<mm::CoverExample<Scalar>>(name);
      return {ex.expectation, ex.tau, ex.family};
    }
    const auto& e = env_.get<MMExpectation>(name);
    return {e.ce, e.tau, {}};
  }

  const JonesObject& jones(const std::string& target) const {
    const auto& d = env_.decl(target);
    const std::string j = std::holds_alternative<dsl::JonesDecl>(d) ? target : env_.get<std::string>(target);
    return *env_.get<std::shared_ptr<const JonesObject>>(j);
  }

  CheckRecord dispatch(const dsl::Check& c, std::size_t index) {
    const std::string& k = c.kind;
    const bool izumi = !c.target.empty() && std::holds_alternative<dsl::IzumiDecl>(env_.decl(c.target));
    if (izumi) return cuntz_check(c);
    if (k == "quasi_basis") return mm_quasi_basis(c);
    if (k == "ce_axioms") return mm_ce_axioms(c);
    if (k == "index") return mm_index(c);
    if (k == "rokhlin") return mm_rokhlin(c);
    if (k == "group_average") return group_average(c);
    if (k == "tracial_rokhlin") return tracial(c);
    if (k == "probabilistic_rokhlin") return probabilistic(c);
    if (k == "elpw") return elpw(c);
    if (k == "theta") return theta(c, index);
    if (k == "tl_relations" || k == "markov" || k == "jones_algebra" || k == "jones_quasi_basis" ||
        k == "jones_rokhlin" || k == "swap_automorphism") {
      return jones_check(c);
    }
    return tower_check(c, index);
  }

  CheckRecord cuntz_check(const dsl::Check& c) const {
    const auto& rho = *env_.get<std::shared_ptr<const RhoEndomorphism>>(c.target);
    const std::string& k = c.kind;
    if (k == "rho_relations") return rho_relation_check(rho).record(c.target);
    if (k == "quasi_basis") return quasi_basis_identity_check(rho, max_len(c, 3)).record(c.target);
    if (k == "ce_axioms") return ce_axiom_check(rho, max_len(c, 2)).record(c.target);
    if (k == "commutant") return commutant_check(rho, max_len(c, 2)).record(c.target);
    if (k == "e_rho_image") return e_rho_image_check(rho, max_len(c, 2)).record(c.target);
    // e_rho x=... [expect=...]
    CheckRecord r{k, c.target, "exact"};
    if (!c.find("x")) throw Error(ErrorKind::InvalidArgument, "e_rho needs x=ELEMENT");
    const auto& x = env_.get<CuntzElement>(c.find("x")->text);
    const auto value = e_rho(rho, x);
    r.quantities["x"] = x.to_string();
    r.quantities["value"] = value.to_string();
    r.pass = true;
    if (const auto* p = c.find("expect")) {
      const auto& want = env_.get<CuntzElement>(p->text);
      r.quantities["expected"] = want.to_string();
      r.pass = value == want;
    }
    return r;
  }

  CheckRecord mm_quasi_basis(const dsl::Check& c) const {
    const auto ce = mm::with_quasi_basis(mm_target(c.target).ce);
    const auto v = mm::verify_quasi_basis(ce, *ce.quasi_basis);
    CheckRecord r{c.kind, c.target, "exact"};
    r.quantities["left_identity"] = v.left;
    r.quantities["right_identity"] = v.right;
    r.quantities["index_central"] = v.central;
    r.quantities["index_self_adjoint"] = v.self_adjoint;
    r.quantities["pairs"] = ce.quasi_basis->pairs.size();
    r.quantities["index_value"] = ce.index().to_string();
    r.pass = v.pass();
    return r;
  }

  CheckRecord mm_ce_axioms(const dsl::Check& c) const {
    const auto v = mm::cond_exp_violations(mm_target(c.target).ce);
    CheckRecord r{c.kind, c.target, "exact"};
    r.quantities["failures"] = v;
    r.pass = v.empty();
    return r;
  }

  CheckRecord mm_index(const dsl::Check& c) const {
    const auto ce = mm::with_quasi_basis(mm_target(c.target).ce);
    const auto& idx = ce.index();
    CheckRecord r{c.kind, c.target, "exact"};
    r.quantities["index_value"] = idx.to_string();
    const auto s = idx.scalar_value();
    r.quantities["index_scalar"] = s.has_value();
    if (s) r.quantities["index_numeric"] = s->to_double();
    r.pass = s.has_value();
    if (auto want = rational_param(c, "expect")) {
      const bool match = idx == MMElement::scalar(ce.big(), ce.big()->from_rational(*want));
      r.quantities["matches_expected"] = match;
      r.pass = match;
    }
    if (auto irr = mm::irreducible_by_index(idx)) r.metadata["irreducible_by_index"] = *irr;
    return r;
  }

  CheckRecord mm_rokhlin(const dsl::Check& c) const {
    const auto t = mm_target(c.target);
    const auto ce = mm::with_quasi_basis(t.ce);
    const auto family = c.find("family") ? elements(c, "family") : t.family;
    if (family.empty()) throw Error(ErrorKind::InvalidArgument, "rokhlin needs family=[...]");
    const auto gens = c.find("gens") ? elements(c, "gens") : mm::matrix_unit_basis(ce.big());
    return mm::rokhlin_periodic_check(ce, family, gens, number_param(c, "eps", 1e-9)).record(c.target);
  }

  CheckRecord group_average(const dsl::Check& c) const {
    const auto& ex = env_.get<mm::DirectSumExample<Scalar>>(c.target);
    const auto* action = c.find("action");
    const std::string kind = action ? action->text : "shift";
    const auto& b = ex.expectation.big();
    if (kind == "shift") return mm::group_average_ce(ex.expectation, mm::cyclic_block_shift(b)).record(c.target);
    if (kind == "identity") return mm::group_average_ce(ex.expectation, mm::identity_action(b, ex.n)).record(c.target);
    throw Error(ErrorKind::InvalidArgument, "action must be shift or identity");
  }

  MMElement rokhlin_projection(const dsl::Check& c, const MMTarget& t) const {
    std::optional<MMElement> e;
    if (c.find("e")) e = element(c.find("e")->text);
    else if (!t.family.empty()) e = t.family.front();
    else throw Error(ErrorKind::InvalidArgument, c.kind + " needs e=ELEMENT");
    if (auto s = rational_param(c, "scale")) e = t.ce.big()->from_rational(*s) * *e;
    return *e;
  }

  CheckRecord tracial(const dsl::Check& c) const {
    const auto t = mm_target(c.target);
    const auto ce = mm::with_quasi_basis(t.ce);
    const auto e = rokhlin_projection(c, t);
    const auto a = c.find("a") ? element(c.find("a")->text) : MMElement::unit(ce.big());
    return mm::tracial_rokhlin_check(ce, e, mm::matrix_unit_basis(ce.big()), a, number_param(c, "eps", 1e-9))
        .record(c.target);
  }

  CheckRecord probabilistic(const dsl::Check& c) const {
    const auto t = mm_target(c.target);
    const auto ce = mm::with_quasi_basis(t.ce);
    const auto e = rokhlin_projection(c, t);
    return mm::probabilistic_rokhlin_check(ce, e, mm::matrix_unit_basis(ce.big()), t.tau, number_param(c, "eps", 1e-9))
        .record(c.target);
  }

  CheckRecord elpw(const dsl::Check& c) const {
    const auto& ex = env_.get<mm::DirectSumExample<Scalar>>(c.target);
    const auto& b = ex.expectation.big();
    const auto family = c.find("family") ? elements(c, "family") : ex.family;
    return mm::elpw_check(mm::cyclic_block_shift(b), family, mm::matrix_unit_basis(b), ex.tau,
                          number_param(c, "eps", 1e-9))
        .record(c.target);
  }

  /// Seeded partial-isometry columns plus one fixed rational instance.
  CheckRecord theta(const dsl::Check& c, std::size_t index) const {
    const int instances = int_param(c, "instances", 20);
    const int k = int_param(c, "k", 3), m = int_param(c, "m", 2);
    std::mt19937_64 rng(seed_param(c, index));
    std::vector<std::string> failures;
    int run = 0;
    for (int i = 0; i < instances; ++i, ++run) {
      const auto x = mm::random_partial_isometry_column(rng, k, m);
      const auto lambda = Scalar(x.front().algebra()->from_rational(Rational(m + 1)));
      if (!mm::theta_lemma_check(x, lambda).pass()) failures.push_back("seeded instance " + std::to_string(i));
    }
    const auto m2 = mm::exact_algebra({2});
    const auto e11 = MMElement::matrix_unit(m2, 0, 0, 0);
    const std::vector<MMElement> fixed = {m2->from_rational(Rational(3, 5)) * e11,
                                          m2->from_rational(Rational(4, 5)) * e11};
    if (!mm::theta_lemma_check(fixed, m2->from_rational(Rational(2))).pass()) failures.push_back("rational instance");
    ++run;
    CheckRecord r{c.kind, "", "exact"};
    r.quantities["instance_count"] = run;
    r.quantities["failures"] = failures;
    r.quantities["k"] = k;
    r.quantities["m"] = m;
    r.pass = failures.empty();
    return r;
  }

  CheckRecord jones_check(const dsl::Check& c) const {
    const auto& j = jones(c.target);
    const auto& data = j.data;
    const std::string& k = c.kind;
    CheckRecord r{k, c.target, "exact"};
    if (k == "tl_relations") {
      const auto v = data.relation_violations();
      r.quantities["n"] = data.n;
      r.quantities["relations_checked"] = data.relation_count();
      r.quantities["failures"] = v;
      r.quantities["tau"] = data.tau.to_string();
      r.quantities["delta"] = data.delta.to_string();
      r.quantities["delta_field"] = data.delta.field()->describe();
      r.pass = v.empty();
      return r;
    }
    if (k == "markov") {
      bool unit = tl::markov_trace(data.unit()) == data.one();
      bool values = true, tracial = true;
      for (int i = 1; i < data.n; ++i) values = values && tl::markov_trace(data.proj(i)) == data.tau;
      for (const auto& x : data.e)
        for (const auto& y : data.e) tracial = tracial && tl::markov_trace(x * y) == tl::markov_trace(y * x);
      r.quantities["unit_trace_one"] = unit;
      r.quantities["trace_of_projections_is_tau"] = values;
      r.quantities["tracial_on_projections"] = tracial;
      r.pass = unit && values && tracial;
      return r;
    }
    const auto& alg = j.alg();
    if (k == "jones_algebra") {
      r.quantities["a_dim"] = alg.a_dim;
      r.quantities["b_dim"] = alg.b_basis.size();
      r.quantities["b_rank"] = alg.b_rank;
      r.quantities["closed_under_products"] = alg.closed;
      r.quantities["direct_sum_certificate"] = alg.b_rank == 2 * alg.a_dim;
      r.metadata["truncation_caveat"] = "finite-strand truncation of the inclusion";
      r.pass = alg.closed && alg.b_rank == 2 * alg.a_dim;
      return r;
    }
    if (k == "jones_quasi_basis") return tl::jones_quasi_basis_verify(data, alg).record(c.target);
    if (k == "jones_rokhlin") return tl::jones_rokhlin_check(data, alg).record(c.target);
    return tl::swap_automorphism_check(data, alg).record(c.target);
  }

  CheckRecord tower_check(const dsl::Check& c, std::size_t index) const {
    const auto& t = env_.get<TowerObject>(c.target);
    if (c.kind == "tower") return tower::verify_tower(*t.exact).record(c.target);
    if (c.kind == "tower_rokhlin") return tower::tower_rokhlin_check(*t.exact, int_param(c, "M", 1)).record(c.target);
    // budget
    const int m = int_param(c, "M", 1);
    const double eps = opts_.eps ? *opts_.eps : number_param(c, "eps", 1e-3);
    const int seeds = int_param(c, "seeds", 1);
    const std::uint64_t seed = seed_param(c, index);
    const auto ex = mm::direct_sum_example(mm::float_algebra({1}), t.decl.a_dim, t.decl.n);
    const tower::TensorTower<double> ft(
        t.decl.e == "twisted" ? tower::twisted_direct_sum_base(ex) : tower::direct_sum_base(ex), t.decl.depth);
    std::vector<tower::BudgetReport> reps;
    for (int s = 0; s < seeds; ++s) {
      const auto plan = tower::make_plan(*ft.base_algebra(), t.decl.depth, eps, seed + s);
      reps.push_back(tower::perturbed_budget_check(ft, plan, m));
    }
    if (seeds == 1) return reps.front().record(c.target);
    CheckRecord r{c.kind, c.target, "float"};
    double d1 = 0, d2 = 0;
    bool budget = true, triangle = true, level = true, large = false;
    for (const auto& b : reps) {
      d1 = std::max(d1, b.delta1);
      d2 = std::max(d2, b.delta2);
      budget = budget && b.budget_ok;
      triangle = triangle && b.triangle_ok;
      level = level && b.level_bound_ok;
      large = large || b.large;
    }
    r.quantities["eps"] = eps;
    r.quantities["seeds"] = seeds;
    r.quantities["max_delta1"] = d1;
    r.quantities["max_delta2"] = d2;
    r.quantities["budget_holds"] = budget;
    r.quantities["triangle_holds"] = triangle;
    r.quantities["level_bound_holds"] = level;
    if (large) r.metadata["LargePerturbation"] = true;
    r.pass = budget && triangle && level;
    return r;
  }

  const dsl::SpecDocument& doc_;
  RunOptions opts_;
  Environment env_;
};

}  // namespace runner

/// Runs every check (or those named by opts.only) in declaration order.
inline Report run_checks(const dsl::SpecDocument& doc, const RunOptions& opts = {}) {
  runner::CheckRunner cr(doc, opts);
  Report rep;
  for (std::size_t i = 0; i < doc.checks.size(); ++i) {
    if (opts.only && doc.checks[i].kind != *opts.only) continue;
    rep.checks.push_back(cr.run(doc.checks[i], i));
  }
  return rep;
}

}  // namespace watatani
