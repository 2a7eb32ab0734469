// Acceptance suite: one PASS/FAIL line per criterion, exit 0 iff all pass.
//
// usage: watatani_acceptance <fixture-dir> <cli> <test-bin-dir>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "watatani/watatani.hpp"

namespace fs = std::filesystem;
using watatani::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Context {
  fs::path fixtures;
  std::string cli;
  fs::path test_bins;
};

/// Collects failed conditions for one criterion.
class Verdict {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  bool ok() const { return failures_.empty(); }
  std::string summary() const {
    std::string s;
    for (const auto& f : failures_) s += (s.empty() ? "" : "; ") + f;
    return s;
  }

 private:
  std::vector<std::string> failures_;
};

struct Run {
  watatani::Report report;
  double seconds = 0;
};

Run run_fixture(const Context& ctx, const std::string& name) {
  const auto doc = watatani::dsl::parse_spec(slurp(ctx.fixtures / (name + ".wtn")));
  const auto t0 = Clock::now();
  Run r{watatani::run_checks(doc), 0};
  r.seconds = seconds_since(t0);
  return r;
}

std::vector<const watatani::CheckRecord*> records(const watatani::Report& r, const std::string& name,
                                                  const std::string& target = "") {
  std::vector<const watatani::CheckRecord*> out;
  for (const auto& c : r.checks)
    if (c.name == name && (target.empty() || c.target == target)) out.push_back(&c);
  return out;
}

void require_all_pass(Verdict& v, const Run& r, const std::string& label) {
  for (const auto& c : r.report.checks)
    v.require(c.pass, label + ": " + c.name + " " + c.target + " failed " + c.metadata.dump());
}

void require_budget(Verdict& v, const Run& r, double limit, const std::string& label) {
  v.require(r.seconds < limit, fmt::format("{} took {:.2f}s (limit {}s)", label, r.seconds, limit));
}

bool truthy(const json& q, const char* key) { return q.contains(key) && q[key].is_boolean() && q[key].get<bool>(); }

struct Process {
  int code = -1;
  std::string out;
  std::string err;
  double seconds = 0;
};

Process spawn(const std::string& cmd) {
  const auto dir = fs::temp_directory_path();
  const auto tag = std::to_string(::getpid());
  const auto out = dir / ("wtn_acc_out_" + tag), err = dir / ("wtn_acc_err_" + tag);
  const auto t0 = Clock::now();
  const int status = std::system((cmd + " >" + out.string() + " 2>" + err.string()).c_str());
  Process p{WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err), seconds_since(t0)};
  fs::remove(out);
  fs::remove(err);
  return p;
}

// 1: Izumi endomorphism relations.
Verdict criterion1(const Context& ctx) {
  Verdict v;
  const auto r = run_fixture(ctx, "c1_izumi");
  require_all_pass(v, r, "c1");
  const auto recs = records(r.report, "rho_relations");
  v.require(recs.size() == 1, "expected one rho_relations record");
  if (!recs.empty()) {
    const auto& iso = recs[0]->quantities["isometry_relations"];
    v.require(iso.size() == 4, "expected 4 isometry identities");
    for (auto it = iso.begin(); it != iso.end(); ++it) v.require(it.value() == true, it.key() + " fails");
    v.require(truthy(recs[0]->quantities, "unit_relation"), "unit relation fails");
  }
  require_budget(v, r, 1, "c1");
  return v;
}

// 2: quasi-basis sweep and index.
Verdict criterion2(const Context& ctx) {
  Verdict v;
  const auto r = run_fixture(ctx, "c2_quasi_basis");
  require_all_pass(v, r, "c2");
  const auto recs = records(r.report, "quasi_basis");
  v.require(recs.size() == 1, "expected one quasi_basis record");
  if (!recs.empty()) {
    const auto& q = recs[0]->quantities;
    v.require(q["instance_count"] == 225, "expected 225 monomials");
    v.require(q["failures"].empty(), "quasi-basis identity failures");
    v.require(truthy(q, "index_is_d_squared"), "Index != d^2");
    const double gap = std::abs(q["index_numeric"].get<double>() - 4 * std::pow(std::cos(std::numbers::pi / 5), 2));
    v.require(gap < 1e-12, fmt::format("|Index - 4cos^2(pi/5)| = {}", gap));
    v.require(recs[0]->metadata["irreducible_by_index"] == true, "irreducible_by_index not set");
  }
  require_budget(v, r, 30, "c2");
  return v;
}

// 3: conditional-expectation axioms and commutant.
Verdict criterion3(const Context& ctx) {
  Verdict v;
  const auto r = run_fixture(ctx, "c3_ce_axioms");
  require_all_pass(v, r, "c3");
  const auto ce = records(r.report, "ce_axioms");
  v.require(ce.size() == 1 && ce[0]->quantities["failures"].empty(), "ce_axioms failures");
  std::map<int, int> dims;
  for (const auto* c : records(r.report, "commutant")) dims[c->quantities["max_len"]] = c->quantities["dimension"];
  v.require(dims.count(2) && dims[2] == 1, "commutant(max_len=2) dimension != 1");
  v.require(dims.count(3) && dims[3] == 1, "commutant(max_len=3) dimension != 1");
  require_budget(v, r, 60, "c3");
  return v;
}

// 4: Temperley-Lieb relations, Jones quasi-basis, Rokhlin conditions, swap automorphism.
Verdict criterion4(const Context& ctx) {
  Verdict v;
  const auto r = run_fixture(ctx, "c4_temperley_lieb");
  const auto ex = run_fixture(ctx, "tl4_inclusion");
  require_all_pass(v, r, "c4");
  require_all_pass(v, ex, "tl4_inclusion");
  v.require(records(r.report, "tl_relations").size() == 3, "expected three tau values");
  for (const auto* c : records(r.report, "tl_relations")) v.require(c->quantities["n"] == 8, "tl_relations n != 8");
  for (const auto* c : records(r.report, "markov"))
    v.require(truthy(c->quantities, "trace_of_projections_is_tau"), "tr(e_i) != tau on " + c->target);
  for (const auto& t : {"J4", "J5", "J6"}) {
    const auto c = records(r.report, "jones_algebra", t);
    v.require(c.size() == 1 && truthy(c[0]->quantities, "direct_sum_certificate"), std::string("no certificate for ") + t);
  }
  const auto half = records(r.report, "jones_quasi_basis", "J4");
  v.require(half.size() == 1 && truthy(half[0]->quantities, "index_scalar") &&
                half[0]->quantities["index_values"] == json::array({"2", "2"}),
            "Index at tau=1/2 is not 2*1");
  const auto third = records(r.report, "jones_quasi_basis", "K5");
  v.require(third.size() == 1 && !truthy(third[0]->quantities, "index_scalar") &&
                third[0]->quantities["index_values"] == json::array({"3", "3/2"}),
            "Index at tau=1/3 is not {3, 3/2}");
  for (const auto* c : records(ex.report, "jones_rokhlin"))
    v.require(truthy(c->quantities, "index_identity_e1") && truthy(c->quantities, "commutators_exact_zero"),
              "Rokhlin conditions fail at tau=1/2");
  for (const auto* c : records(ex.report, "swap_automorphism"))
    v.require(truthy(c->quantities, "E_equals_E_alpha"), "E != E_alpha");
  require_budget(v, Run{{}, r.seconds + ex.seconds}, 30, "c4");
  return v;
}

// 5: multimatrix examples.
Verdict criterion5(const Context& ctx) {
  Verdict v;
  const auto r = run_fixture(ctx, "c5_multimatrix");
  require_all_pass(v, r, "c5");
  for (const auto* c : records(r.report, "index")) v.require(truthy(c->quantities, "matches_expected"), "index " + c->target);
  v.require(records(r.report, "index").size() == 9, "expected 9 index checks");
  for (const auto* c : records(r.report, "rokhlin")) {
    v.require(truthy(c->quantities, "commutators_exact_zero") && truthy(c->quantities, "index_defect_exact_zero"),
              "rokhlin quantities nonzero on " + c->target);
    v.require(c->quantities["norm_gap_numeric"].get<double>() <= 1e-9, "norm surrogate gap on " + c->target);
  }
  for (const auto* c : records(r.report, "group_average"))
    v.require(truthy(c->quantities, "fixed_equals_subalgebra") && truthy(c->quantities, "average_equals_expectation"),
              "group average on " + c->target);

  const auto t0 = Clock::now();
  bool cocycle = false;
  try {
    watatani::mm::CoverMaps bad{2, 3, {{{0, 1}, {1, 2, 0}}, {{1, 0}, {1, 2, 0}}}};
    (void)watatani::mm::cover_example(watatani::mm::exact_algebra({1}), bad);
  } catch (const watatani::Error& e) {
    cocycle = e.kind() == watatani::ErrorKind::CocycleViolation;
  }
  v.require(cocycle, "corrupted sigma not rejected with CocycleViolation");
  require_budget(v, Run{{}, r.seconds + seconds_since(t0)}, 30, "c5");
  return v;
}

// 6: tracial, 2-norm, ELPW and theta suites, with their negative controls.
Verdict criterion6(const Context& ctx) {
  Verdict v;
  const auto r = run_fixture(ctx, "c6_tracial");
  const auto neg = run_fixture(ctx, "negative_controls");
  require_all_pass(v, r, "c6");
  for (const auto* c : records(r.report, "probabilistic_rokhlin"))
    v.require(c->quantities["defect_two_norm_square"] == "0" && c->quantities["commutator_two_norm_square"] == "0",
              "2-norm quantities nonzero on " + c->target);
  const auto theta = records(r.report, "theta");
  v.require(theta.size() == 1 && theta[0]->quantities["instance_count"] == 21, "theta: expected 20 seeded + 1 rational");
  const auto scaled = records(neg.report, "tracial_rokhlin");
  v.require(scaled.size() == 1 && !scaled[0]->pass && !truthy(scaled[0]->quantities, "idempotent"),
            "scaled control does not fail condition (1)");
  const auto elpw = records(neg.report, "elpw");
  v.require(elpw.size() == 1 && !elpw[0]->pass && !truthy(elpw[0]->quantities, "partition_of_unity"),
            "non-summing family not rejected");
  require_budget(v, Run{{}, r.seconds + neg.seconds}, 30, "c6");
  return v;
}

// 7: tower and perturbation budget.
Verdict criterion7(const Context& ctx) {
  Verdict v;
  const auto r = run_fixture(ctx, "c7_tower");
  require_all_pass(v, r, "c7");
  const auto tower = records(r.report, "tower");
  v.require(tower.size() == 1 && tower[0]->quantities["depth"] == 6 &&
                truthy(tower[0]->quantities, "intertwining_defect_zero"),
            "depth-6 tower defect not zero");
  std::set<int> ms;
  for (const auto* c : records(r.report, "tower_rokhlin"))
    if (c->pass) ms.insert(c->quantities["M"].get<int>());
  v.require(ms == std::set<int>{1, 2, 3, 4, 5}, "tower_rokhlin not exact for every M in 1..5");
  std::set<double> eps;
  for (const auto* c : records(r.report, "budget")) {
    const auto& q = c->quantities;
    eps.insert(q["eps"].get<double>());
    v.require(q["seeds"] == 10, "budget not over 10 seeds");
    // Index E = 2 for the perturbed base
    v.require(q["max_delta2"].get<double>() <= 2 * q["max_delta1"].get<double>() + 1e-9,
              fmt::format("budget violated at eps={}", q["eps"].get<double>()));
  }
  for (double want : {1e-6, 1e-3, 0.5}) {
    bool seen = false;
    for (double e : eps) seen = seen || std::abs(e - want) <= 1e-12 * want;
    v.require(seen, fmt::format("budget not run at eps={}", want));
  }
  require_budget(v, r, 60, "c7");
  return v;
}

// 8: CLI golden files, exit codes, overhead.
Verdict criterion8(const Context& ctx) {
  Verdict v;
  double overhead = 0;
  for (const auto& name : {"c1_izumi", "c2_quasi_basis", "c3_ce_axioms", "c4_temperley_lieb", "c5_multimatrix",
                           "c6_tracial", "c7_tower", "tl4_inclusion"}) {
    const auto p = spawn(ctx.cli + " run " + (ctx.fixtures / (std::string(name) + ".wtn")).string());
    v.require(p.code == 0, fmt::format("{}: exit {}", name, p.code));
    try {
      auto j = json::parse(p.out);
      overhead += p.seconds - j["summary"]["wall_time"].get<double>();
      j["summary"]["wall_time"] = nullptr;
      v.require(watatani::dump_json(j) + "\n" == slurp(ctx.fixtures / "golden" / (std::string(name) + ".json")),
                std::string(name) + ": report differs from golden");
    } catch (const std::exception& e) {
      v.require(false, std::string(name) + ": " + e.what());
    }
  }
  const auto det = spawn(ctx.cli + " run " + (ctx.fixtures / "tl4_inclusion.wtn").string() + " --deterministic");
  overhead += det.seconds;
  v.require(det.out == slurp(ctx.fixtures / "golden" / "tl4_inclusion.json"), "--deterministic output differs from golden");

  const auto bad = spawn(ctx.cli + " run " + (ctx.fixtures / "corrupted.wtn").string());
  overhead += bad.seconds;
  v.require(bad.code == 2, fmt::format("corrupted spec exit {}", bad.code));
  v.require(bad.err.find("corrupted.wtn:5:29:") != std::string::npos, "corrupted spec diagnostic lacks line/col");

  const auto fail = spawn(ctx.cli + " run " + (ctx.fixtures / "negative_controls.wtn").string() + " --deterministic");
  v.require(fail.code == 1, fmt::format("failing check exit {}", fail.code));
  v.require(fail.out == slurp(ctx.fixtures / "golden" / "negative_controls.json"), "negative controls differ from golden");
  v.require(overhead < 10, fmt::format("CLI overhead {:.2f}s", overhead));
  return v;
}

// 9: seeded property suites.
Verdict criterion9(const Context& ctx) {
  Verdict v;
  const std::vector<std::pair<std::string, std::string>> suites = {
      {"test_scalar", "FieldLaws.*"},
      {"test_cuntz", "CuntzAlgebra.AssociativityAndAdjoint:CuntzNormalize.*"},
      {"test_temperley_lieb", "TlMultiply.Associativity:MarkovTrace.MarkovProperty"},
      {"test_multimatrix", "Mvn.OrderLaws"},
  };
  for (const auto& [bin, filter] : suites) {
    const auto p = spawn((ctx.test_bins / bin).string() + " --gtest_filter='" + filter + "' --gtest_brief=1");
    v.require(p.code == 0, bin + " [" + filter + "] failed");
    v.require(p.out.find("PASSED") != std::string::npos, bin + " [" + filter + "] ran nothing");
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::cerr << "usage: " << argv[0] << " <fixture-dir> <cli> <test-bin-dir>\n";
    return 2;
  }
  const Context ctx{argv[1], argv[2], argv[3]};
  const std::vector<std::pair<std::string, std::function<Verdict(const Context&)>>> criteria = {
      {"Izumi endomorphism integrity", criterion1},
      {"quasi-basis sweep and index", criterion2},
      {"conditional-expectation axioms and commutant", criterion3},
      {"Temperley-Lieb and Jones projections", criterion4},
      {"multimatrix examples", criterion5},
      {"tracial and 2-norm suites", criterion6},
      {"tower and perturbation budget", criterion7},
      {"CLI golden reports and exit codes", criterion8},
      {"seeded property suites", criterion9},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    failed += v.ok() ? 0 : 1;
    std::cout << fmt::format("criterion {}: {} {} ({:.2f}s){}\n", i + 1, v.ok() ? "PASS" : "FAIL", criteria[i].first,
                             secs, v.ok() ? "" : " -- " + v.summary());
    std::cout.flush();
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
