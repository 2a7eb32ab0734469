#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome run_cli(const std::string& args) {
  const auto dir = fs::temp_directory_path();
  const auto tag = std::to_string(::getpid()) + "_" + std::to_string(std::rand());
  const auto out = dir / ("wtn_out_" + tag), err = dir / ("wtn_err_" + tag);
  const std::string cmd = std::string(WATATANI_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Outcome o{WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  fs::remove(out);
  fs::remove(err);
  return o;
}

fs::path fixture(const std::string& name) { return fs::path(WATATANI_FIXTURE_DIR) / name; }

/// Every float in an exact-mode record sits under a key ending in _numeric.
void expect_floats_labeled(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (j.is_number_float()) {
    EXPECT_TRUE(key.size() >= 8 && key.substr(key.size() - 8) == "_numeric") << where << ": " << key;
  } else if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) expect_floats_labeled(it.value(), it.key(), where);
  } else if (j.is_array()) {
    for (const auto& e : j) expect_floats_labeled(e, key, where);
  }
}

class GoldenFixture : public ::testing::TestWithParam<std::string> {};

}  // namespace

TEST_P(GoldenFixture, MatchesGoldenJson) {
  const std::string name = GetParam();
  const auto o = run_cli("run " + fixture(name + ".wtn").string() + " --deterministic");
  const std::string golden = slurp(fixture("golden/" + name + ".json"));
  EXPECT_EQ(o.out, golden);
  const auto report = nlohmann::json::parse(o.out);
  const bool all_pass = report["summary"]["failed"] == 0;
  EXPECT_EQ(o.code, all_pass ? 0 : 1);
  for (const auto& c : report["checks"])
    if (c["mode"] == "exact") expect_floats_labeled(c["quantities"], "", name + "/" + c["name"].get<std::string>());
}

INSTANTIATE_TEST_SUITE_P(Fixtures, GoldenFixture,
                         ::testing::Values("c1_izumi", "c2_quasi_basis", "c3_ce_axioms", "c4_temperley_lieb",
                                           "c5_multimatrix", "c6_tracial", "c7_tower", "tl4_inclusion",
                                           "negative_controls"));

TEST(Cli, CorruptedSpecExitsTwoWithPosition) {
  const auto o = run_cli("run " + fixture("corrupted.wtn").string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("corrupted.wtn:5:29:"), std::string::npos) << o.err;
  EXPECT_TRUE(o.out.empty());
}

TEST(Cli, FailingCheckExitsOne) {
  const auto o = run_cli("run " + fixture("negative_controls.wtn").string() + " --deterministic");
  EXPECT_EQ(o.code, 1);
  EXPECT_EQ(nlohmann::json::parse(o.out)["summary"]["passed"], 0);
}

TEST(Cli, MissingFileAndBadFlags) {
  EXPECT_EQ(run_cli("run /nonexistent/spec.wtn").code, 2);
  EXPECT_EQ(run_cli("run " + fixture("c1_izumi.wtn").string() + " --format yaml").code, 2);
  EXPECT_EQ(run_cli("").code, 2);
}

TEST(Cli, CheckFilterAndTextFormat) {
  const auto o = run_cli("run " + fixture("c5_multimatrix.wtn").string() + " --check rokhlin --format text");
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("total 3, passed 3, failed 0"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("wall time"), std::string::npos);
}

TEST(Cli, WallTimeOnlyWithoutDeterministic) {
  const auto timed = run_cli("run " + fixture("tl4_inclusion.wtn").string());
  EXPECT_TRUE(nlohmann::json::parse(timed.out)["summary"]["wall_time"].is_number());
  const auto det = run_cli("run " + fixture("tl4_inclusion.wtn").string() + " --deterministic");
  EXPECT_TRUE(nlohmann::json::parse(det.out)["summary"]["wall_time"].is_null());
}

TEST(Cli, Overrides) {
  const auto o = run_cli("run " + fixture("c3_ce_axioms.wtn").string() + " --check commutant --max-len 1");
  EXPECT_EQ(o.code, 0);
  const auto r = nlohmann::json::parse(o.out);
  for (const auto& c : r["checks"]) EXPECT_EQ(c["quantities"]["max_len"], 1);
  const auto d = run_cli("run " + fixture("c7_tower.wtn").string() + " --check tower --depth 3");
  EXPECT_EQ(nlohmann::json::parse(d.out)["checks"][0]["quantities"]["depth"], 3);
  const auto e = run_cli("run " + fixture("c7_tower.wtn").string() + " --check budget --eps 0.25");
  for (const auto& c : nlohmann::json::parse(e.out)["checks"]) EXPECT_EQ(c["quantities"]["eps"], 0.25);
}
