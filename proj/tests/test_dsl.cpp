#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "watatani/runner.hpp"

using namespace watatani;
using namespace watatani::dsl;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::filesystem::path> fixture_specs() {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(WATATANI_FIXTURE_DIR))
    if (entry.path().extension() == ".wtn" && entry.path().stem() != "corrupted") out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

template <class Fn>
ParseError parse_error_of(Fn&& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no ParseError thrown";
  return ParseError(ErrorKind::ParseError, 0, 0, "", "");
}

Expr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 7 : 2);
  switch (pick(rng)) {
    case 0: return Expr::number(Rational(static_cast<long>(rng() % 7), static_cast<long>(rng() % 3 + 1)));
    case 1: return Expr::symbol(rng() % 2 ? "S1" : "S2");
    case 2: {
      Expr u;
      u.op = Expr::Op::MatrixUnit;
      u.idx = {1 + static_cast<int>(rng() % 3), 1, 2};
      return u;
    }
    case 3:
    case 4: {
      std::vector<Expr> args;
      const int k = 2 + static_cast<int>(rng() % 2);
      for (int i = 0; i < k; ++i) {
        Expr a = random_expr(rng, depth - 1);
        if (rng() % 3 == 0) a = Expr::node(Expr::Op::Neg, {a});
        args.push_back(std::move(a));
      }
      return Expr::node(Expr::Op::Add, std::move(args));
    }
    case 5: return Expr::node(Expr::Op::Mul, {random_expr(rng, depth - 1), random_expr(rng, depth - 1)});
    case 6: {
      Expr p = Expr::node(Expr::Op::Pow, {random_expr(rng, depth - 1)});
      p.power = static_cast<int>(rng() % 5) - 2;
      return p;
    }
    default: return Expr::node(Expr::Op::Adj, {random_expr(rng, depth - 1)});
  }
}

}  // namespace

TEST(DslParse, FieldDeclaration) {
  const auto doc = parse_spec("field F = Q[x]/(x^4 - x^2 - 1) root in (1,2)\n");
  ASSERT_EQ(doc.declarations.size(), 1u);
  EXPECT_TRUE(doc.checks.empty());
  const auto& f = std::get<FieldDecl>(doc.declarations[0]);
  EXPECT_EQ(f.name, "F");
  EXPECT_EQ(f.poly, (Poly{Rational(-1), Rational(0), Rational(-1), Rational(0), Rational(1)}));
  EXPECT_EQ(f.lo, Rational(1));
  EXPECT_EQ(f.hi, Rational(2));
}

TEST(DslParse, CommentsAndBlankLines) {
  const auto doc = parse_spec("# header\n\n  algebra B = M2 + M1   # trailing\n\ncheck theta\n");
  EXPECT_EQ(doc.declarations.size(), 1u);
  EXPECT_EQ(std::get<AlgebraDecl>(doc.declarations[0]).blocks, (std::vector<int>{2, 1}));
  ASSERT_EQ(doc.checks.size(), 1u);
  EXPECT_EQ(doc.check_lines[0], 5);
}

TEST(DslParse, ImplicitReferences) {
  const auto doc = parse_spec(
      "algebra B = M2 + M2 + M2\n"
      "subalgebra D = diagonal\n"
      "trace tau = uniform\n"
      "expectation E = trace_ce(tau)\n"
      "element e1 = block(1)\n"
      "element e2 = block(2)\n"
      "element e3 = block(3)\n"
      "check quasi_basis E\n"
      "check rokhlin E family=[e1,e2,e3] eps=1e-9\n");
  EXPECT_EQ(std::get<SubalgebraDecl>(doc.declarations[1]).of, "B");
  EXPECT_EQ(std::get<ExpectationDecl>(doc.declarations[3]).onto, "D");
  EXPECT_EQ(std::get<ElementDecl>(doc.declarations[4]).in, "B");
  EXPECT_EQ(doc.checks[1].find("family")->list, (std::vector<std::string>{"e1", "e2", "e3"}));
  EXPECT_EQ(doc.checks[1].find("eps")->text, "1e-9");
}

TEST(DslParse, TlFourInclusionFixture) {
  const auto doc = parse_spec(slurp(std::filesystem::path(WATATANI_FIXTURE_DIR) / "tl4_inclusion.wtn"));
  EXPECT_EQ(doc.declarations.size(), 4u);
  EXPECT_EQ(doc.checks.size(), 3u);
  for (const auto& c : doc.checks) EXPECT_EQ(c.target, "E");
}

TEST(DslParse, UnnamedJonesAndTower) {
  const auto doc = parse_spec("jones n=6 tau=1/2\ntower base=ex24(n=2) depth=5\ncheck tower_rokhlin M=2\n");
  EXPECT_EQ(std::get<JonesDecl>(doc.declarations[0]).name, "J");
  EXPECT_EQ(std::get<TowerDecl>(doc.declarations[1]).depth, 5);
  EXPECT_EQ(doc.checks[0].target, "T");
}

TEST(DslErrors, UseBeforeDeclaration) {
  const auto e = parse_error_of([] {
    (void)parse_spec("algebra B = M2\nsubalgebra D = scalars of B\ntrace t = uniform of B\n"
                     "check quasi_basis E\nexpectation E = trace_ce(t)\n");
  });
  EXPECT_EQ(e.kind(), ErrorKind::UndeclaredIdentifier);
  EXPECT_EQ(e.line(), 4);
  EXPECT_EQ(e.col(), 19);
}

TEST(DslErrors, Duplicate) {
  const auto e = parse_error_of([] { (void)parse_spec("algebra B = M2\nalgebra B = M3\n"); });
  EXPECT_EQ(e.kind(), ErrorKind::DuplicateIdentifier);
  EXPECT_EQ(e.line(), 2);
  EXPECT_EQ(e.col(), 9);
}

TEST(DslErrors, WrongKindAndUnknownParameter) {
  auto e = parse_error_of([] { (void)parse_spec("algebra B = M2\ncheck tower B\n"); });
  EXPECT_EQ(e.kind(), ErrorKind::ParseError);
  EXPECT_EQ(e.col(), 13);
  e = parse_error_of([] { (void)parse_spec("tower T base=ex24(n=2) depth=3\ncheck tower_rokhlin T N=1\n"); });
  EXPECT_EQ(e.col(), 23);
  e = parse_error_of([] { (void)parse_spec("check frobnicate\n"); });
  EXPECT_EQ(e.col(), 7);
}

TEST(DslErrors, CorruptedFixture) {
  const auto e = parse_error_of(
      [] { (void)parse_spec(slurp(std::filesystem::path(WATATANI_FIXTURE_DIR) / "corrupted.wtn")); });
  EXPECT_EQ(e.line(), 5);
  EXPECT_EQ(e.col(), 29);
  EXPECT_EQ(e.expected(), "integer");
}

TEST(DslErrors, LexicalAndStructural) {
  EXPECT_EQ(parse_error_of([] { (void)parse_spec("algebra B = M2 $\n"); }).col(), 16);
  EXPECT_EQ(parse_error_of([] { (void)parse_spec("jones J n=4\n"); }).line(), 1);
  EXPECT_EQ(parse_error_of([] { (void)parse_spec("check theta\nalgebra B = M2\n"); }).line(), 2);
  EXPECT_THROW((void)parse_spec("element x = S1 in R\n"), ParseError);
}

TEST(DslRoundTrip, Fixtures) {
  const auto specs = fixture_specs();
  ASSERT_GE(specs.size(), 9u);
  for (const auto& p : specs) {
    const auto once = parse_spec(slurp(p));
    const auto printed = print(once);
    const auto twice = parse_spec(printed);
    EXPECT_EQ(once, twice) << p;
    EXPECT_EQ(print(twice), printed) << p;
  }
}

TEST(DslRoundTrip, RandomExpressions) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const Expr x = random_expr(rng, 3);
    const std::string spec = "izumi R\nelement v = " + x.to_string() + " in R\n";
    const auto doc = parse_spec(spec);
    const auto& parsed = std::get<ElementDecl>(doc.declarations[1]).expr;
    // parsing normalizes nothing but redundant grouping; printing is a fixed point
    EXPECT_EQ(parsed.to_string(), x.to_string()) << spec;
    EXPECT_EQ(parse_spec(print(doc)), doc);
  }
}

TEST(Report, EmptyReport) {
  const auto doc = parse_spec("algebra B = M2\n");
  const auto r = run_checks(doc);
  EXPECT_EQ(emit_report(r, ReportFormat::json),
            R"({"checks":[],"summary":{"failed":0,"passed":0,"total":0,"wall_time":null}})");
  Report timed;
  timed.wall_time = 1.5;
  EXPECT_EQ(emit_report(timed, ReportFormat::json, true),
            R"({"checks":[],"summary":{"failed":0,"passed":0,"total":0,"wall_time":null}})");
  EXPECT_NE(emit_report(timed, ReportFormat::json, false).find("\"wall_time\":1.5"), std::string::npos);
}

TEST(Report, DeterministicSerialization) {
  const auto doc = parse_spec(slurp(std::filesystem::path(WATATANI_FIXTURE_DIR) / "c5_multimatrix.wtn"));
  const auto a = emit_report(run_checks(doc), ReportFormat::json);
  const auto b = emit_report(run_checks(doc), ReportFormat::json);
  EXPECT_EQ(a, b);
  EXPECT_NE(emit_report(run_checks(doc), ReportFormat::text).find("total 18, passed 18"), std::string::npos);
}

TEST(Report, FloatFormatting) {
  EXPECT_EQ(dump_json(json{{"a", 0.1 + 0.2}, {"b", 2.0}, {"c", 1e-20}, {"d", 0.0}}),
            R"({"a":0.3,"b":2.0,"c":1e-20,"d":0})");
}

TEST(RunChecks, FailingCheckAndCapturedErrors) {
  const auto doc = parse_spec(
      "example X = ex24(n=2, a_dim=1)\n"
      "algebra B = M1 + M1\n"
      "subalgebra D = scalars of B\n"
      "trace t = weights(1, 0) of B\n"
      "expectation E = trace_ce(t) onto D\n"
      "element one = 1 in B\n"
      "check rokhlin X family=[one]\n"
      "check index E\n"
      "check index X expect=2\n");
  const auto r = run_checks(doc);
  ASSERT_EQ(r.checks.size(), 3u);
  EXPECT_FALSE(r.checks[0].pass);
  EXPECT_FALSE(r.checks[1].pass);
  EXPECT_EQ(r.checks[1].metadata["error"], "DegenerateTrace");
  EXPECT_TRUE(r.checks[2].pass);
  EXPECT_FALSE(r.all_pass());
}

TEST(RunChecks, FilterAndSeeds) {
  const auto doc = parse_spec("example X = ex24(n=3, a_dim=1)\ncheck index X expect=3\ncheck theta instances=3\n");
  RunOptions only;
  only.only = "theta";
  const auto r = run_checks(doc, only);
  ASSERT_EQ(r.checks.size(), 1u);
  EXPECT_EQ(r.checks[0].quantities["instance_count"], 4);
  EXPECT_NE(sub_seed(0, 0), sub_seed(0, 1));
  EXPECT_NE(sub_seed(0, 0), sub_seed(1, 0));
}

TEST(RunChecks, CuntzElements) {
  const auto doc = parse_spec(
      "field F = Q[s]/(s^4 - s^2 - 1) root in (1,2)\n"
      "izumi R over F\n"
      "element p = S1 S1* in R\n"
      "element q = s^-4 in R\n"
      "element w = S1* S1 - 1 in R\n"
      "check e_rho R x=p expect=q\n"
      "check e_rho R x=w expect=w\n"
      "check e_rho R x=p expect=p\n");
  const auto r = run_checks(doc);
  EXPECT_TRUE(r.checks[0].pass);
  EXPECT_TRUE(r.checks[1].pass);  // w = 0
  EXPECT_FALSE(r.checks[2].pass);
}

TEST(RunChecks, IzumiFieldMismatch) {
  const auto doc = parse_spec("field F = Q[x]/(x^2 - 2) root in (1,2)\nizumi R over F\ncheck rho_relations R\n");
  const auto r = run_checks(doc);
  EXPECT_FALSE(r.checks[0].pass);
  EXPECT_EQ(r.checks[0].metadata["error"], "FieldMismatch");
}
