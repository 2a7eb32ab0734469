#pragma once

// Line-oriented spec language (.wtn). One declaration or check per line, `#`
// starts a comment. Every identifier must be declared before use.
//
//   field F = Q[x]/(x^4 - x^2 - 1) root in (1,2)
//   izumi R over F
//   element p = S1 S1* in R
//   algebra B = M2 + M2 + M2
//   subalgebra D = diagonal of B
//   trace tau = uniform of B
//   expectation E = trace_ce(tau) onto D
//   example X = ex24(n=2, a_dim=1)
//   jones J n=6 tau=1/2
//   tower T base=ex24(n=2) depth=5
//   tower P base=ex24(n=2, a_dim=2) depth=4 e=twisted
//   check rokhlin E family=[e1,e2,e3] eps=1e-9

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "watatani/error.hpp"
#include "watatani/number_field.hpp"
#include "watatani/rational.hpp"

namespace watatani::dsl {

class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, int line, int col, std::string expected, const std::string& message)
      : Error(kind, "line " + std::to_string(line) + ", col " + std::to_string(col) + ": " + message +
                        (expected.empty() ? "" : " (expected " + expected + ")")),
        line_(line), col_(col), expected_(std::move(expected)) {}

  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& expected() const { return expected_; }

 private:
  int line_;
  int col_;
  std::string expected_;
};

// ---------------------------------------------------------------------------
// Expressions

/// Sums of juxtaposed products; postfix `*` is the adjoint and `^k` a power.
struct Expr {
  enum class Op { Num, Sym, MatrixUnit, BlockUnit, Add, Neg, Mul, Pow, Adj };
  Op op = Op::Num;
  Rational num;                // Num
  std::string sym;             // Sym
  std::vector<int> idx;        // MatrixUnit (b,r,c) / BlockUnit (b), 1-based
  int power = 0;               // Pow
  std::vector<Expr> args;

  bool operator==(const Expr&) const = default;

  static Expr number(Rational r) {
    Expr e;
    e.num = std::move(r);
    e.num.canonicalize();
    return e;
  }
  static Expr symbol(std::string s) {
    Expr e;
    e.op = Op::Sym;
    e.sym = std::move(s);
    return e;
  }
  static Expr node(Op op, std::vector<Expr> args) {
    Expr e;
    e.op = op;
    e.args = std::move(args);
    return e;
  }

  bool is_atom() const { return op == Op::Num || op == Op::Sym || op == Op::MatrixUnit || op == Op::BlockUnit; }

  std::string to_string() const {
    switch (op) {
      case Op::Num: return num.get_str();
      case Op::Sym: return sym;
      case Op::MatrixUnit:
        return "e(" + std::to_string(idx[0]) + "," + std::to_string(idx[1]) + "," + std::to_string(idx[2]) + ")";
      case Op::BlockUnit: return "block(" + std::to_string(idx[0]) + ")";
      case Op::Add: {
        std::string s;
        for (std::size_t i = 0; i < args.size(); ++i) {
          const bool neg = args[i].op == Op::Neg;
          const Expr& t = neg ? args[i].args[0] : args[i];
          if (i == 0) s += neg ? "-" : "";
          else s += neg ? " - " : " + ";
          s += t.op == Op::Add || t.op == Op::Neg ? "(" + t.to_string() + ")" : t.to_string();
        }
        return s;
      }
      case Op::Neg: return "-" + wrapped(args[0]);
      case Op::Mul: {
        std::string s;
        for (std::size_t i = 0; i < args.size(); ++i) {
          if (i) s += " ";
          s += wrapped(args[i]);
        }
        return s;
      }
      case Op::Pow: return postfix_base(args[0]) + "^" + std::to_string(power);
      case Op::Adj: return postfix_base(args[0]) + "*";
    }
    return "";
  }

 private:
  static std::string wrapped(const Expr& e) {
    return e.op == Op::Add || e.op == Op::Neg || e.op == Op::Mul ? "(" + e.to_string() + ")" : e.to_string();
  }
  static std::string postfix_base(const Expr& e) {
    return e.is_atom() || e.op == Op::Pow || e.op == Op::Adj ? e.to_string() : "(" + e.to_string() + ")";
  }
};

// ---------------------------------------------------------------------------
// Declarations

struct FieldDecl {
  std::string name;
  bool rational = false;  // `field F = Q`
  std::string var = "x";
  Poly poly;
  Rational lo, hi;
  bool operator==(const FieldDecl&) const = default;
};

struct IzumiDecl {
  std::string name;
  std::string field;  // empty: built-in golden quartic
  bool operator==(const IzumiDecl&) const = default;
};

struct AlgebraDecl {
  std::string name;
  std::vector<int> blocks;
  bool operator==(const AlgebraDecl&) const = default;
};

struct SubalgebraDecl {
  std::string name;
  std::string shape;  // diagonal | scalars | whole | jones_a
  std::string of;
  bool operator==(const SubalgebraDecl&) const = default;
};

struct TraceDecl {
  std::string name;
  std::string shape;  // uniform | weights | markov
  std::vector<Rational> weights;
  std::string of;
  bool operator==(const TraceDecl&) const = default;
};

struct ExpectationDecl {
  std::string name;
  std::string trace;
  std::string onto;
  bool operator==(const ExpectationDecl&) const = default;
};

struct ElementDecl {
  std::string name;
  Expr expr;
  std::string in;  // izumi or algebra
  bool operator==(const ElementDecl&) const = default;
};

struct ExampleDecl {
  std::string name;
  std::string shape;  // ex24 | cover
  int n = 2;
  int a_dim = 1;  // ex24
  int size = 1;   // cover: points per sheet
  bool operator==(const ExampleDecl&) const = default;
};

struct JonesDecl {
  std::string name;
  int n = 4;
  std::optional<Rational> tau;
  std::optional<int> loop;  // delta = 2cos(pi/loop)
  bool operator==(const JonesDecl&) const = default;
};

struct TowerDecl {
  std::string name;
  int n = 2;
  int a_dim = 1;
  int depth = 2;
  std::string e = "block";  // block | twisted
  bool operator==(const TowerDecl&) const = default;
};

using Declaration = std::variant<FieldDecl, IzumiDecl, AlgebraDecl, SubalgebraDecl, TraceDecl, ExpectationDecl,
                                 ElementDecl, ExampleDecl, JonesDecl, TowerDecl>;

inline const std::string& name_of(const Declaration& d) {
  return std::visit([](const auto& x) -> const std::string& { return x.name; }, d);
}

struct Param {
  std::string text;               // scalar value as written
  std::vector<std::string> list;  // [a, b, c]
  bool is_list = false;
  bool operator==(const Param&) const = default;

  std::string to_string() const {
    if (!is_list) return text;
    std::string s = "[";
    for (std::size_t i = 0; i < list.size(); ++i) s += (i ? "," : "") + list[i];
    return s + "]";
  }
};

struct Check {
  std::string kind;
  std::string target;  // empty for target-free checks
  std::vector<std::pair<std::string, Param>> params;
  bool operator==(const Check&) const = default;

  const Param* find(const std::string& key) const {
    for (const auto& [k, v] : params)
      if (k == key) return &v;
    return nullptr;
  }
};

struct SpecDocument {
  std::vector<Declaration> declarations;
  std::vector<Check> checks;
  std::vector<int> declaration_lines;
  std::vector<int> check_lines;

  /// Source lines are not part of the document's value.
  bool operator==(const SpecDocument& o) const { return declarations == o.declarations && checks == o.checks; }

  const Declaration* find(const std::string& name) const {
    for (const auto& d : declarations)
      if (name_of(d) == name) return &d;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Check table

enum class ParamType { Int, Number, Element, ElementList, Word };

struct CheckSpec {
  std::vector<std::string> targets;  // declaration kinds, empty = no target
  std::map<std::string, ParamType> params;
};

inline const std::map<std::string, CheckSpec>& check_table() {
  using P = ParamType;
  static const std::vector<std::string> mm_targets = {"expectation", "example:ex24", "example:cover"};
  static const std::vector<std::string> jones_targets = {"jones", "expectation:jones"};
  static const std::map<std::string, CheckSpec> table = {
      {"rho_relations", {{"izumi"}, {}}},
      {"quasi_basis", {{"izumi", "expectation", "example:ex24", "example:cover"}, {{"max_len", P::Int}}}},
      {"ce_axioms", {{"izumi", "expectation", "example:ex24", "example:cover"}, {{"max_len", P::Int}}}},
      {"commutant", {{"izumi"}, {{"max_len", P::Int}}}},
      {"e_rho_image", {{"izumi"}, {{"max_len", P::Int}}}},
      {"e_rho", {{"izumi"}, {{"x", P::Element}, {"expect", P::Element}}}},
      {"index", {mm_targets, {{"expect", P::Number}}}},
      {"rokhlin", {mm_targets, {{"family", P::ElementList}, {"gens", P::ElementList}, {"eps", P::Number}}}},
      {"group_average", {{"example:ex24"}, {{"action", P::Word}}}},
      {"tracial_rokhlin",
       {mm_targets, {{"e", P::Element}, {"a", P::Element}, {"scale", P::Number}, {"eps", P::Number}}}},
      {"probabilistic_rokhlin", {mm_targets, {{"e", P::Element}, {"scale", P::Number}, {"eps", P::Number}}}},
      {"elpw", {{"example:ex24"}, {{"family", P::ElementList}, {"eps", P::Number}}}},
      {"theta", {{}, {{"instances", P::Int}, {"seed", P::Int}, {"k", P::Int}, {"m", P::Int}}}},
      {"tl_relations", {{"jones"}, {}}},
      {"markov", {{"jones"}, {}}},
      {"jones_algebra", {jones_targets, {}}},
      {"jones_quasi_basis", {jones_targets, {}}},
      {"jones_rokhlin", {jones_targets, {}}},
      {"swap_automorphism", {jones_targets, {}}},
      {"tower", {{"tower"}, {}}},
      {"tower_rokhlin", {{"tower"}, {{"M", P::Int}}}},
      {"budget", {{"tower"}, {{"eps", P::Number}, {"seed", P::Int}, {"seeds", P::Int}, {"M", P::Int}}}},
  };
  return table;
}

// ---------------------------------------------------------------------------
// Printing

inline std::string print(const Declaration& d) {
  struct V {
    std::string operator()(const FieldDecl& f) const {
      if (f.rational) return "field " + f.name + " = Q";
      return "field " + f.name + " = Q[" + f.var + "]/(" + poly::to_string(f.poly, f.var) + ") root in (" +
             f.lo.get_str() + "," + f.hi.get_str() + ")";
    }
    std::string operator()(const IzumiDecl& z) const {
      return "izumi " + z.name + (z.field.empty() ? "" : " over " + z.field);
    }
    std::string operator()(const AlgebraDecl& a) const {
      std::string s = "algebra " + a.name + " =";
      for (std::size_t i = 0; i < a.blocks.size(); ++i) s += (i ? " + M" : " M") + std::to_string(a.blocks[i]);
      return s;
    }
    std::string operator()(const SubalgebraDecl& s) const {
      if (s.shape == "jones_a") return "subalgebra " + s.name + " = jones_a(" + s.of + ")";
      return "subalgebra " + s.name + " = " + s.shape + " of " + s.of;
    }
    std::string operator()(const TraceDecl& t) const {
      if (t.shape == "markov") return "trace " + t.name + " = markov(" + t.of + ")";
      std::string s = "trace " + t.name + " = " + t.shape;
      if (t.shape == "weights") {
        s += "(";
        for (std::size_t i = 0; i < t.weights.size(); ++i) s += (i ? ", " : "") + t.weights[i].get_str();
        s += ")";
      }
      return s + " of " + t.of;
    }
    std::string operator()(const ExpectationDecl& e) const {
      return "expectation " + e.name + " = trace_ce(" + e.trace + ") onto " + e.onto;
    }
    std::string operator()(const ElementDecl& e) const {
      return "element " + e.name + " = " + e.expr.to_string() + " in " + e.in;
    }
    std::string operator()(const ExampleDecl& x) const {
      if (x.shape == "cover") {
        return "example " + x.name + " = cover(n=" + std::to_string(x.n) + ", size=" + std::to_string(x.size) + ")";
      }
      return "example " + x.name + " = ex24(n=" + std::to_string(x.n) + ", a_dim=" + std::to_string(x.a_dim) + ")";
    }
    std::string operator()(const JonesDecl& j) const {
      std::string s = "jones " + j.name + " n=" + std::to_string(j.n);
      return j.tau ? s + " tau=" + j.tau->get_str() : s + " loop=" + std::to_string(*j.loop);
    }
    std::string operator()(const TowerDecl& t) const {
      return "tower " + t.name + " base=ex24(n=" + std::to_string(t.n) + ", a_dim=" + std::to_string(t.a_dim) +
             ") depth=" + std::to_string(t.depth) + (t.e == "block" ? "" : " e=" + t.e);
    }
  };
  return std::visit(V{}, d);
}

inline std::string print(const Check& c) {
  std::string s = "check " + c.kind;
  if (!c.target.empty()) s += " " + c.target;
  for (const auto& [k, v] : c.params) s += " " + k + "=" + v.to_string();
  return s;
}

inline std::string print(const SpecDocument& doc) {
  std::string out;
  for (const auto& d : doc.declarations) out += print(d) + "\n";
  for (const auto& c : doc.checks) out += print(c) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int col = 0;
};

inline std::vector<Token> tokenize(const std::string& line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto digit = [&](std::size_t k) { return k < line.size() && std::isdigit(static_cast<unsigned char>(line[k])); };
  while (i < line.size()) {
    const char c = line[i];
    const int col = static_cast<int>(i) + 1;
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < line.size() && (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_')) ++j;
      out.push_back({Tok::Ident, line.substr(i, j - i), col});
      i = j;
    } else if (digit(i) || (c == '.' && digit(i + 1))) {
      std::size_t j = i;
      while (digit(j)) ++j;
      if (j < line.size() && line[j] == '.') {
        ++j;
        while (digit(j)) ++j;
      }
      if (j < line.size() && (line[j] == 'e' || line[j] == 'E') &&
          (digit(j + 1) || ((j + 1 < line.size() && (line[j + 1] == '-' || line[j + 1] == '+')) && digit(j + 2)))) {
        j += 2;
        while (digit(j)) ++j;
      } else if (j < line.size() && line[j] == '/' && digit(j + 1)) {
        ++j;
        while (digit(j)) ++j;
      }
      out.push_back({Tok::Number, line.substr(i, j - i), col});
      i = j;
    } else if (std::string_view("=()[],+-*^/").find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), col});
      ++i;
    } else {
      throw ParseError(ErrorKind::ParseError, line_no, col, "", std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::End, "", static_cast<int>(line.size()) + 1});
  return out;
}

class LineParser {
 public:
  LineParser(std::vector<Token> toks, int line) : toks_(std::move(toks)), line_(line) {}

  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  int line() const { return line_; }

  [[noreturn]] void fail(const std::string& expected, const Token& at) const {
    const std::string got = at.kind == Tok::End ? "end of line" : "'" + at.text + "'";
    throw ParseError(ErrorKind::ParseError, line_, at.col, expected, "unexpected " + got);
  }
  [[noreturn]] void fail(const std::string& expected) const { fail(expected, peek()); }

  bool is_punct(const std::string& p) const { return peek().kind == Tok::Punct && peek().text == p; }
  bool is_word(const std::string& w) const { return peek().kind == Tok::Ident && peek().text == w; }

  Token take() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  void expect_punct(const std::string& p) {
    if (!is_punct(p)) fail("'" + p + "'");
    take();
  }
  void expect_word(const std::string& w) {
    if (!is_word(w)) fail("'" + w + "'");
    take();
  }
  Token ident(const std::string& what = "identifier") {
    if (peek().kind != Tok::Ident) fail(what);
    return take();
  }
  void expect_end() {
    if (!at_end()) fail("end of line");
  }

  int integer(const std::string& what = "integer") {
    bool neg = false;
    if (is_punct("-")) {
      take();
      neg = true;
    }
    const Token t = peek();
    if (t.kind != Tok::Number || t.text.find_first_not_of("0123456789") != std::string::npos || t.text.size() > 9) {
      fail(what);
    }
    take();
    return neg ? -std::stoi(t.text) : std::stoi(t.text);
  }

  Rational rational(const std::string& what = "rational") {
    bool neg = false;
    if (is_punct("-")) {
      take();
      neg = true;
    }
    const Token t = peek();
    if (t.kind != Tok::Number) fail(what);
    take();
    Rational r = parse_rational(t.text);
    return neg ? Rational(-r) : r;
  }

  /// Numeric literal kept as written, with an optional leading minus.
  std::string number_text(const std::string& what = "number") {
    std::string s;
    if (is_punct("-")) {
      take();
      s = "-";
    }
    const Token t = peek();
    if (t.kind != Tok::Number) fail(what);
    take();
    return s + t.text;
  }

  // expr := ['-'] term { ('+'|'-') term }
  Expr expr(const std::set<std::string>& stop_words) {
    std::vector<Expr> terms;
    bool neg = false;
    if (is_punct("-")) {
      take();
      neg = true;
    }
    for (;;) {
      Expr t = term(stop_words);
      terms.push_back(neg ? Expr::node(Expr::Op::Neg, {std::move(t)}) : std::move(t));
      if (is_punct("+")) {
        take();
        neg = false;
      } else if (is_punct("-")) {
        take();
        neg = true;
      } else {
        break;
      }
    }
    if (terms.size() == 1 && terms[0].op != Expr::Op::Neg) return std::move(terms[0]);
    return Expr::node(Expr::Op::Add, std::move(terms));
  }

 private:
  bool starts_factor(const std::set<std::string>& stop_words) const {
    const auto& t = peek();
    if (t.kind == Tok::Number) return true;
    if (t.kind == Tok::Ident) return !stop_words.count(t.text);
    return t.kind == Tok::Punct && t.text == "(";
  }

  Expr term(const std::set<std::string>& stop_words) {
    if (!starts_factor(stop_words)) fail("expression");
    std::vector<Expr> fs;
    while (starts_factor(stop_words)) fs.push_back(factor());
    if (fs.size() == 1) return std::move(fs[0]);
    return Expr::node(Expr::Op::Mul, std::move(fs));
  }

  Expr factor() {
    Expr base = atom();
    for (;;) {
      if (is_punct("^")) {
        take();
        Expr p = Expr::node(Expr::Op::Pow, {std::move(base)});
        p.power = integer("integer exponent");
        base = std::move(p);
      } else if (is_punct("*")) {
        take();
        base = Expr::node(Expr::Op::Adj, {std::move(base)});
      } else {
        return base;
      }
    }
  }

  Expr atom() {
    if (peek().kind == Tok::Number) return Expr::number(parse_rational(take().text));
    if (is_punct("(")) {
      take();
      Expr inner = expr({});
      expect_punct(")");
      return inner;
    }
    const Token t = ident("expression");
    if ((t.text == "e" || t.text == "block") && is_punct("(")) {
      take();
      Expr u;
      u.op = t.text == "e" ? Expr::Op::MatrixUnit : Expr::Op::BlockUnit;
      const int count = t.text == "e" ? 3 : 1;
      for (int i = 0; i < count; ++i) {
        if (i) expect_punct(",");
        u.idx.push_back(integer("positive index"));
        if (u.idx.back() < 1) fail("positive index", toks_[pos_ - 1]);
      }
      expect_punct(")");
      return u;
    }
    return Expr::symbol(t.text);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int line_;
};

/// Declared names with their kinds ("example:ex24", "expectation:jones", ...).
struct Symbols {
  std::map<std::string, std::string> kind;
  std::map<std::string, std::string> owner;  // algebra/jones/izumi an object lives on
  std::vector<std::string> order;

  bool has(const std::string& n) const { return kind.count(n) > 0; }

  std::optional<std::string> latest(const std::vector<std::string>& kinds) const {
    for (auto it = order.rbegin(); it != order.rend(); ++it)
      if (std::find(kinds.begin(), kinds.end(), kind.at(*it)) != kinds.end()) return *it;
    return std::nullopt;
  }
  std::optional<std::string> latest_with_owner(const std::string& k, const std::string& own) const {
    for (auto it = order.rbegin(); it != order.rend(); ++it)
      if (kind.at(*it) == k && owner.at(*it) == own) return *it;
    return std::nullopt;
  }
};

class DocumentParser {
 public:
  SpecDocument run(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto toks = tokenize(line, line_no);
      if (toks.front().kind == Tok::End) continue;
      LineParser p(std::move(toks), line_no);
      parse_line(p);
    }
    return std::move(doc_);
  }

 private:
  void parse_line(LineParser& p) {
    const Token head = p.ident("declaration or check");
    const std::string& w = head.text;
    if (w == "check") return parse_check(p);
    if (!doc_.checks.empty()) {
      throw ParseError(ErrorKind::ParseError, p.line(), head.col, "check", "declarations must precede checks");
    }
    Declaration d;
    if (w == "field") d = field(p);
    else if (w == "izumi") d = izumi(p);
    else if (w == "algebra") d = algebra(p);
    else if (w == "subalgebra") d = subalgebra(p);
    else if (w == "trace") d = trace(p);
    else if (w == "expectation") d = expectation(p);
    else if (w == "element") d = element(p);
    else if (w == "example") d = example(p);
    else if (w == "jones") d = jones(p);
    else if (w == "tower") d = tower(p);
    else p.fail("declaration keyword or 'check'", head);
    p.expect_end();
    doc_.declarations.push_back(std::move(d));
    doc_.declaration_lines.push_back(p.line());
  }

  std::string new_name(LineParser& p, const std::string& kind, const std::string& owner = "") {
    const Token t = p.ident("name");
    declare(p, t, kind, owner);
    return t.text;
  }

  void declare(LineParser& p, const Token& t, const std::string& kind, const std::string& owner) {
    if (syms_.has(t.text)) {
      throw ParseError(ErrorKind::DuplicateIdentifier, p.line(), t.col, "", "'" + t.text + "' is already declared");
    }
    syms_.kind[t.text] = kind;
    syms_.owner[t.text] = owner;
    syms_.order.push_back(t.text);
  }

  /// A previously declared identifier of one of the given kinds.
  std::string reference(LineParser& p, const std::vector<std::string>& kinds, const std::string& what) {
    const Token t = p.ident(what);
    check_reference(p, t, kinds, what);
    return t.text;
  }

  void check_reference(LineParser& p, const Token& t, const std::vector<std::string>& kinds,
                       const std::string& what) {
    if (!syms_.has(t.text)) {
      throw ParseError(ErrorKind::UndeclaredIdentifier, p.line(), t.col, what, "'" + t.text + "' is not declared");
    }
    if (std::find(kinds.begin(), kinds.end(), syms_.kind.at(t.text)) == kinds.end()) {
      throw ParseError(ErrorKind::ParseError, p.line(), t.col, what,
                       "'" + t.text + "' is a " + syms_.kind.at(t.text));
    }
  }

  std::string implicit(LineParser& p, const std::vector<std::string>& kinds, const std::string& what) {
    auto n = syms_.latest(kinds);
    if (!n) throw ParseError(ErrorKind::UndeclaredIdentifier, p.line(), p.peek().col, what, "no " + what + " declared");
    return *n;
  }

  Declaration field(LineParser& p) {
    FieldDecl f;
    const Token name = p.ident("name");
    p.expect_punct("=");
    p.expect_word("Q");
    if (p.at_end()) {
      f.rational = true;
    } else {
      p.expect_punct("[");
      f.var = p.ident("variable").text;
      p.expect_punct("]");
      p.expect_punct("/");
      p.expect_punct("(");
      f.poly = polynomial(p, f.var);
      p.expect_punct(")");
      p.expect_word("root");
      p.expect_word("in");
      p.expect_punct("(");
      f.lo = p.rational("lower root bound");
      p.expect_punct(",");
      f.hi = p.rational("upper root bound");
      p.expect_punct(")");
      if (f.poly.size() < 2 || f.poly.back() != 1) {
        throw ParseError(ErrorKind::ParseError, p.line(), name.col, "monic polynomial of degree >= 1",
                         "field polynomial must be monic");
      }
    }
    declare(p, name, "field", "");
    f.name = name.text;
    return f;
  }

  /// Sum of terms c, c*x^k, c x^k, x^k with rational c.
  static Poly polynomial(LineParser& p, const std::string& var) {
    Poly out;
    bool neg = false;
    if (p.is_punct("-")) {
      p.take();
      neg = true;
    }
    for (;;) {
      Rational coef(1);
      int power = 0;
      bool have_coef = false;
      if (p.peek().kind == Tok::Number) {
        coef = parse_rational(p.take().text);
        have_coef = true;
        if (p.is_punct("*")) p.take();
      }
      if (p.is_word(var)) {
        p.take();
        power = 1;
        if (p.is_punct("^")) {
          p.take();
          power = p.integer("exponent");
          if (power < 0) p.fail("nonnegative exponent");
        }
      } else if (!have_coef) {
        p.fail("polynomial term in " + var);
      }
      if (static_cast<int>(out.size()) <= power) out.resize(power + 1, Rational(0));
      out[power] += neg ? Rational(-coef) : coef;
      if (p.is_punct("+")) {
        p.take();
        neg = false;
      } else if (p.is_punct("-")) {
        p.take();
        neg = true;
      } else {
        break;
      }
    }
    poly::trim(out);
    return out;
  }

  Declaration izumi(LineParser& p) {
    IzumiDecl z;
    z.name = new_name(p, "izumi");
    if (p.is_word("over")) {
      p.take();
      z.field = reference(p, {"field"}, "field");
    }
    return z;
  }

  Declaration algebra(LineParser& p) {
    AlgebraDecl a;
    const Token name = p.ident("name");
    p.expect_punct("=");
    for (;;) {
      const Token t = p.ident("block such as M2");
      if (t.text.size() < 2 || t.text[0] != 'M' || t.text.find_first_not_of("0123456789", 1) != std::string::npos ||
          t.text.size() > 4 || std::stoi(t.text.substr(1)) < 1) {
        p.fail("block such as M2", t);
      }
      a.blocks.push_back(std::stoi(t.text.substr(1)));
      if (!p.is_punct("+")) break;
      p.take();
    }
    declare(p, name, "algebra", name.text);
    a.name = name.text;
    return a;
  }

  Declaration subalgebra(LineParser& p) {
    SubalgebraDecl s;
    const Token name = p.ident("name");
    p.expect_punct("=");
    const Token shape = p.ident("diagonal, scalars, whole or jones_a(...)");
    s.shape = shape.text;
    if (s.shape == "jones_a") {
      p.expect_punct("(");
      s.of = reference(p, {"jones"}, "jones declaration");
      p.expect_punct(")");
      declare(p, name, "subalgebra:jones", s.of);
    } else {
      if (s.shape != "diagonal" && s.shape != "scalars" && s.shape != "whole") {
        p.fail("diagonal, scalars, whole or jones_a(...)", shape);
      }
      s.of = of_clause(p, "of", {"algebra"}, "algebra");
      declare(p, name, "subalgebra", s.of);
    }
    s.name = name.text;
    return s;
  }

  std::string of_clause(LineParser& p, const std::string& word, const std::vector<std::string>& kinds,
                        const std::string& what) {
    if (p.is_word(word)) {
      p.take();
      return reference(p, kinds, what);
    }
    return implicit(p, kinds, what);
  }

  Declaration trace(LineParser& p) {
    TraceDecl t;
    const Token name = p.ident("name");
    p.expect_punct("=");
    const Token shape = p.ident("uniform, weights(...) or markov(...)");
    t.shape = shape.text;
    if (t.shape == "markov") {
      p.expect_punct("(");
      t.of = reference(p, {"jones"}, "jones declaration");
      p.expect_punct(")");
      declare(p, name, "trace:jones", t.of);
    } else {
      if (t.shape == "weights") {
        p.expect_punct("(");
        for (;;) {
          t.weights.push_back(p.rational("weight"));
          if (!p.is_punct(",")) break;
          p.take();
        }
        p.expect_punct(")");
      } else if (t.shape != "uniform") {
        p.fail("uniform, weights(...) or markov(...)", shape);
      }
      t.of = of_clause(p, "of", {"algebra"}, "algebra");
      declare(p, name, "trace", t.of);
    }
    t.name = name.text;
    return t;
  }

  Declaration expectation(LineParser& p) {
    ExpectationDecl e;
    const Token name = p.ident("name");
    p.expect_punct("=");
    p.expect_word("trace_ce");
    p.expect_punct("(");
    e.trace = reference(p, {"trace", "trace:jones"}, "trace");
    p.expect_punct(")");
    const bool jones = syms_.kind.at(e.trace) == "trace:jones";
    const std::string sub_kind = jones ? "subalgebra:jones" : "subalgebra";
    const std::string& owner = syms_.owner.at(e.trace);
    if (p.is_word("onto")) {
      p.take();
      const Token s = p.ident("subalgebra");
      check_reference(p, s, {sub_kind}, "subalgebra");
      if (syms_.owner.at(s.text) != owner) {
        throw ParseError(ErrorKind::ParseError, p.line(), s.col, "subalgebra of " + owner,
                         "'" + s.text + "' lives on " + syms_.owner.at(s.text));
      }
      e.onto = s.text;
    } else {
      auto s = syms_.latest_with_owner(sub_kind, owner);
      if (!s) {
        throw ParseError(ErrorKind::UndeclaredIdentifier, p.line(), p.peek().col, "subalgebra",
                         "no subalgebra of " + owner + " declared");
      }
      e.onto = *s;
    }
    declare(p, name, jones ? "expectation:jones" : "expectation", owner);
    e.name = name.text;
    return e;
  }

  Declaration element(LineParser& p) {
    ElementDecl e;
    const Token name = p.ident("name");
    p.expect_punct("=");
    e.expr = p.expr({"in"});
    e.in = of_clause(p, "in", {"izumi", "algebra"}, "algebra or izumi declaration");
    check_symbols(p, e.expr, name.col, e.in);
    declare(p, name, "element", e.in);
    e.name = name.text;
    return e;
  }

  /// Symbols must be generators of the context or earlier elements on it.
  void check_symbols(LineParser& p, const Expr& x, int col, const std::string& context) {
    if (x.op == Expr::Op::Sym) {
      const bool izumi = syms_.kind.at(context) == "izumi";
      if (izumi && (x.sym == "S1" || x.sym == "S2" || x.sym == field_generator(context))) return;
      if (!syms_.has(x.sym)) {
        throw ParseError(ErrorKind::UndeclaredIdentifier, p.line(), col, "", "'" + x.sym + "' is not declared");
      }
      if (syms_.kind.at(x.sym) != "element" || syms_.owner.at(x.sym) != context) {
        throw ParseError(ErrorKind::ParseError, p.line(), col, "element of " + context,
                         "'" + x.sym + "' is not an element of " + context);
      }
    }
    for (const auto& a : x.args) check_symbols(p, a, col, context);
  }

  std::string field_generator(const std::string& izumi) const {
    for (const auto& d : doc_.declarations)
      if (const auto* z = std::get_if<IzumiDecl>(&d); z && z->name == izumi && !z->field.empty())
        for (const auto& d2 : doc_.declarations)
          if (const auto* f = std::get_if<FieldDecl>(&d2); f && f->name == z->field) return f->var;
    return "s";
  }

  /// key=value pairs inside a call such as ex24(n=2, a_dim=1).
  std::map<std::string, int> int_args(LineParser& p, const std::set<std::string>& allowed) {
    std::map<std::string, int> out;
    p.expect_punct("(");
    for (;;) {
      const Token k = p.ident("argument name");
      if (!allowed.count(k.text) || out.count(k.text)) p.fail("one of the arguments of this call", k);
      p.expect_punct("=");
      out[k.text] = p.integer();
      if (!p.is_punct(",")) break;
      p.take();
    }
    p.expect_punct(")");
    return out;
  }

  Declaration example(LineParser& p) {
    ExampleDecl x;
    const Token name = p.ident("name");
    p.expect_punct("=");
    const Token shape = p.ident("ex24(...) or cover(...)");
    x.shape = shape.text;
    if (x.shape == "ex24") {
      auto args = int_args(p, {"n", "a_dim"});
      if (args.count("n")) x.n = args["n"];
      if (args.count("a_dim")) x.a_dim = args["a_dim"];
    } else if (x.shape == "cover") {
      auto args = int_args(p, {"n", "size"});
      if (args.count("n")) x.n = args["n"];
      if (args.count("size")) x.size = args["size"];
    } else {
      p.fail("ex24(...) or cover(...)", shape);
    }
    if (x.n < 1 || x.a_dim < 1 || x.size < 1) p.fail("positive parameters", shape);
    declare(p, name, "example:" + x.shape, name.text);
    x.name = name.text;
    return x;
  }

  /// Optional name followed by key=value settings.
  Token optional_name(LineParser& p, const std::string& fallback) {
    if (p.peek().kind == Tok::Ident && !(p.peek(1).kind == Tok::Punct && p.peek(1).text == "=")) return p.take();
    return Token{Tok::Ident, fallback, p.peek().col};
  }

  Declaration jones(LineParser& p) {
    JonesDecl j;
    const Token name = optional_name(p, "J");
    std::set<std::string> seen;
    while (!p.at_end()) {
      const Token k = p.ident("n, tau or loop");
      if (seen.count(k.text)) p.fail("each setting once", k);
      seen.insert(k.text);
      p.expect_punct("=");
      if (k.text == "n") j.n = p.integer();
      else if (k.text == "tau") j.tau = p.rational("tau");
      else if (k.text == "loop") j.loop = p.integer();
      else p.fail("n, tau or loop", k);
    }
    if (j.tau.has_value() == j.loop.has_value()) p.fail("exactly one of tau and loop");
    if (j.n < 2) p.fail("n >= 2");
    declare(p, name, "jones", name.text);
    j.name = name.text;
    return j;
  }

  Declaration tower(LineParser& p) {
    TowerDecl t;
    const Token name = optional_name(p, "T");
    std::set<std::string> seen;
    while (!p.at_end()) {
      const Token k = p.ident("base, depth or e");
      if (seen.count(k.text)) p.fail("each setting once", k);
      seen.insert(k.text);
      p.expect_punct("=");
      if (k.text == "base") {
        p.expect_word("ex24");
        auto args = int_args(p, {"n", "a_dim"});
        if (args.count("n")) t.n = args["n"];
        if (args.count("a_dim")) t.a_dim = args["a_dim"];
      } else if (k.text == "depth") {
        t.depth = p.integer();
      } else if (k.text == "e") {
        const Token v = p.ident("block or twisted");
        if (v.text != "block" && v.text != "twisted") p.fail("block or twisted", v);
        t.e = v.text;
      } else {
        p.fail("base, depth or e", k);
      }
    }
    if (!seen.count("base") || !seen.count("depth")) p.fail("base=ex24(...) and depth=D");
    if (t.n < 1 || t.a_dim < 1 || t.depth < 1) p.fail("positive parameters");
    declare(p, name, "tower", name.text);
    t.name = name.text;
    return t;
  }

  void parse_check(LineParser& p) {
    Check c;
    const Token kind = p.ident("check name");
    const auto it = check_table().find(kind.text);
    if (it == check_table().end()) p.fail("known check name", kind);
    c.kind = kind.text;
    const CheckSpec& spec = it->second;
    if (!spec.targets.empty()) {
      if (p.peek().kind == Tok::Ident && !(p.peek(1).kind == Tok::Punct && p.peek(1).text == "=")) {
        const Token t = p.take();
        check_reference(p, t, spec.targets, "target of " + c.kind);
        c.target = t.text;
      } else {
        c.target = implicit(p, spec.targets, "target of " + c.kind);
      }
    }
    while (!p.at_end()) {
      const Token k = p.ident("parameter");
      const auto pt = spec.params.find(k.text);
      if (pt == spec.params.end() || c.find(k.text)) p.fail("parameter of " + c.kind, k);
      p.expect_punct("=");
      c.params.emplace_back(k.text, param(p, pt->second));
    }
    p.expect_end();
    doc_.checks.push_back(std::move(c));
    doc_.check_lines.push_back(p.line());
  }

  Param param(LineParser& p, ParamType type) {
    Param v;
    switch (type) {
      case ParamType::Int: v.text = std::to_string(p.integer()); break;
      case ParamType::Number: {
        const Token at = p.peek();
        v.text = p.number_text();
        try {
          (void)parse_rational(v.text);
        } catch (const Error&) {
          p.fail("number", at);
        }
        break;
      }
      case ParamType::Word: v.text = p.ident("word").text; break;
      case ParamType::Element: v.text = reference(p, {"element"}, "element"); break;
      case ParamType::ElementList:
        v.is_list = true;
        p.expect_punct("[");
        if (!p.is_punct("]")) {
          for (;;) {
            v.list.push_back(reference(p, {"element"}, "element"));
            if (!p.is_punct(",")) break;
            p.take();
          }
        }
        p.expect_punct("]");
        break;
    }
    return v;
  }

  SpecDocument doc_;
  Symbols syms_;
};

}  // namespace detail

/// Parses a whole spec; the first error is reported with its line and column.
inline SpecDocument parse_spec(const std::string& text) { return detail::DocumentParser().run(text); }

}  // namespace watatani::dsl
