#include <catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace {

struct Run {
  int code;
  std::string out;
};

std::string env(const char* k) {
  const char* v = std::getenv(k);
  return v ? v : "";
}

/// Runs the CLI with `args`; stdout is captured, stderr discarded.
Run flm(const std::string& args) {
  const std::string cmd = env("FLM_BIN") + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int st = pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string cfg(const char* name) { return env("FLM_EXAMPLES") + "/" + name; }

std::string tmp(const char* name) { return (std::filesystem::temp_directory_path() / name).string(); }

}  // namespace

TEST_CASE("environment is set", "[cli]") {
  REQUIRE_FALSE(env("FLM_BIN").empty());
  REQUIRE_FALSE(env("FLM_EXAMPLES").empty());
}

TEST_CASE("check", "[cli]") {
  auto r = flm("check --config " + cfg("delta_pm1.json"));
  CHECK(r.code == 0);
  CHECK(r.out.find("exists: yes, regime: Regular") != std::string::npos);
  r = flm("check --config " + cfg("example42.json"));
  CHECK(r.code == 0);
  CHECK(r.out.find("regime: ExtremelyHeavy, 𝔪∉𝓛d suspected") != std::string::npos);
  r = flm("check --config " + cfg("long_memory.json"));
  CHECK(r.out.find("LongMemory") != std::string::npos);
  CHECK(flm("check --config " + cfg("empty.json")).code == 2);
  CHECK(flm("check --config /nonexistent.json").code == 2);
  CHECK(flm("check").code == 2);
  CHECK(flm("--help").code == 0);
}

TEST_CASE("divergent measure exits 3", "[cli]") {
  const auto path = tmp("flm_cli_divergent.json");
  std::ofstream(path) << R"({"measure": {"pieces": [{"lo": 1, "hi": "inf", "family": "power", "alpha": 0.5}]},
                             "H": 0.25})";
  const auto r = flm("check --config " + path);
  CHECK(r.code == 3);
  CHECK(r.out.find("exists: no") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("density output", "[cli]") {
  auto r = flm("density --config " + cfg("delta_pm1.json"));
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("x,p,err\n", 0) == 0);
  const auto path = tmp("flm_cli_density.json");
  r = flm("density --config " + cfg("delta_pm1.json") + " --format json --out " + path);
  REQUIRE(r.code == 0);
  std::ifstream is(path);
  const auto j = nlohmann::json::parse(is);
  CHECK(j["x"].size() == 201);
  CHECK(j["p"][100].get<double>() > 0.29);
  std::filesystem::remove(path);
  CHECK(flm("density --config " + cfg("delta_pm1.json") + " --format xml").code == 2);
}

TEST_CASE("asymptote", "[cli]") {
  auto r = flm("asymptote --config " + cfg("power_tail.json"));
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("t,x,exact,asymptote,ratio,err\n", 0) == 0);
  // the two-atom measure is not power tailed
  const auto path = tmp("flm_cli_mismatch.json");
  std::ofstream(path) << R"({"measure": {"atoms": [{"location": 1, "mass": 1}, {"location": -1, "mass": 1}]},
                             "H": 0.25, "asymptote": {"regime": "Thm22_i", "points": [{"t": 1, "x": 50}]}})";
  CHECK(flm("asymptote --config " + path).code == 5);
  std::filesystem::remove(path);
}

TEST_CASE("simulate", "[cli]") {
  const auto path = tmp("flm_cli_samples.json");
  const auto samples = tmp("flm_cli_samples.bin");
  std::ofstream(path) << R"({"measure": {"atoms": [{"location": 1, "mass": 1}, {"location": -1, "mass": 1}]},
                             "H": 0.25, "simulate": {"n_samples": 20000}, "output": ")" + samples + R"("})";
  const auto a = flm("simulate --config " + path);
  REQUIRE(a.code == 0);
  CHECK(std::filesystem::file_size(samples) == 8 * 20000);
  CHECK(flm("simulate --config " + path).out == a.out);
  CHECK(flm("simulate --config " + path + " --seed 2").out != a.out);
  std::filesystem::remove(path);
  std::filesystem::remove(samples);
}

TEST_CASE("verify", "[cli]") {
  auto r = flm("verify --only lemma32 --only 2 --format json");
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.size() == 2);
  CHECK(j[0]["pass"] == true);
  CHECK(flm("verify --only nonsense").code == 2);
}
