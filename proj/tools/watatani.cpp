// watatani run <spec.wtn> [--check NAME] [--seed N] [--format json|text] [--deterministic]
//                         [--max-len K] [--depth D] [--eps E]
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 parse/validation error, 3 internal error.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "watatani/watatani.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kParse = 2;
constexpr int kInternal = 3;

int run(const std::string& path, const watatani::RunOptions& opts, watatani::ReportFormat format,
        bool deterministic) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << path << ": cannot read spec file\n";
    return kParse;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  watatani::dsl::SpecDocument doc;
  try {
    doc = watatani::dsl::parse_spec(buf.str());
  } catch (const watatani::dsl::ParseError& e) {
    std::cerr << path << ":" << e.line() << ":" << e.col() << ": " << e.what() << "\n";
    return kParse;
  }

  const auto start = std::chrono::steady_clock::now();
  auto report = watatani::run_checks(doc, opts);
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << watatani::emit_report(report, format, deterministic);
  if (format == watatani::ReportFormat::json) std::cout << "\n";
  return report.all_pass() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact verification of finite-index inclusions"};
  app.require_subcommand(1);
  auto* cmd = app.add_subcommand("run", "run the checks of a .wtn spec");

  std::string path, check, format = "json";
  std::uint64_t seed = 0;
  bool deterministic = false;
  std::optional<int> max_len, depth;
  std::optional<double> eps;
  cmd->add_option("spec", path, "spec file (.wtn)")->required();
  cmd->add_option("--check", check, "run only checks of this kind");
  cmd->add_option("--seed", seed, "base seed for randomized checks");
  cmd->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "text"}));
  cmd->add_flag("--deterministic", deterministic, "suppress wall time for byte-stable output");
  cmd->add_option("--max-len", max_len, "word length cap for Cuntz sweeps")->check(CLI::NonNegativeNumber);
  cmd->add_option("--depth", depth, "tower depth override")->check(CLI::PositiveNumber);
  cmd->add_option("--eps", eps, "perturbation scale for budget checks")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kParse;
  }

  watatani::RunOptions opts;
  opts.seed = seed;
  opts.max_len = max_len;
  opts.depth = depth;
  opts.eps = eps;
  if (!check.empty()) opts.only = check;
  try {
    return run(path, opts, format == "text" ? watatani::ReportFormat::text : watatani::ReportFormat::json,
               deterministic);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
