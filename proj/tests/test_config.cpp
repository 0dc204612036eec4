#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "flm/config.hpp"
#include "flm/io.hpp"

using namespace flm;

namespace {

json base() {
  return json::parse(R"({"measure": {"atoms": [{"location": -1.0, "mass": 1.0}]}, "H": 0.25})");
}

}  // namespace

TEST_CASE("minimal config takes defaults", "[config]") {
  const auto c = config_from_json(base());
  CHECK(c.H == 0.25);
  CHECK_FALSE(c.lambda);
  CHECK(c.t == std::vector<double>{1.0});
  CHECK(c.density.n == 201);
  CHECK(c.format == "csv");
  CHECK(c.seed == 1);
  CHECK(c.model().lambda() > 0.0);
}

TEST_CASE("config round trip", "[config]") {
  auto j = base();
  j["measure"]["pieces"] = json::parse(R"([{"lo": 1.0, "hi": "inf", "family": "power", "scale": 2.0, "alpha": 1.5}])");
  j["measure"]["dyadic"] = {{"h", 0.25}, {"k_max", 30}, {"scale", 1.0}};
  j["lambda"] = 2.0;
  j["t"] = {1.0, 2.0};
  j["asymptote"] = json::parse(R"({"regime": "Ex41", "points": [{"t": 1, "x": 50}],
                                   "power_tail": {"alpha": 1.5, "C_minus": 0, "C_plus": 2}})");
  j["simulate"] = {{"n_samples", 1000}, {"mode", "gaussian_substitute"}, {"grid", {0.0, 1.0}}};
  j["seed"] = 9;
  const auto c = config_from_json(j);
  REQUIRE(c.measure.pieces.size() == 1);
  CHECK(std::isinf(c.measure.pieces[0].hi));
  CHECK(c.measure.dyadic->k_max == 30);
  const auto back = config_to_json(c);
  CHECK(back["measure"]["pieces"][0]["hi"] == "inf");
  const auto c2 = config_from_json(back);
  CHECK(config_to_json(c2) == back);
  CHECK(c2.asymptote.power_tail->C_plus == 2.0);
  const auto s = sim_config(c2);
  CHECK(s.n_samples == 1000);
  CHECK(s.seed == 9);
  CHECK(s.mode == SmallJumpMode::gaussian_substitute);
}

TEST_CASE("unknown keys are rejected at every level", "[config]") {
  const char* paths[] = {"/bogus", "/measure/bogus", "/measure/atoms/0/bogus", "/density/bogus",
                         "/asymptote/bogus", "/simulate/bogus", "/verify/bogus"};
  for (const char* p : paths) {
    auto j = base();
    j["density"] = json::object();
    j["asymptote"] = json::object();
    j["simulate"] = json::object();
    j["verify"] = json::object();
    j[json::json_pointer(p)] = 1;
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
  }
}

TEST_CASE("invalid values are config errors", "[config]") {
  auto bad = [](const char* key, json v) {
    auto j = base();
    j[json::json_pointer(key)] = v;
    return j;
  };
  CHECK_THROWS_AS(config_from_json(bad("/format", "xml")), ConfigError);
  CHECK_THROWS_AS(config_from_json(bad("/density/kind", "half")), ConfigError);
  CHECK_THROWS_AS(config_from_json(bad("/asymptote/regime", "Thm99")), ConfigError);
  CHECK_THROWS_AS(config_from_json(bad("/simulate/mode", "exact")), ConfigError);
  CHECK_THROWS_AS(config_from_json(bad("/H", "half")), ConfigError);
  CHECK_THROWS_AS(config_from_json(bad("/seed", "one")), ConfigError);
  CHECK_THROWS_AS(config_from_json(bad("/measure", json::object())), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"H": 0.25})")), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/flm.json"), ConfigError);
}

TEST_CASE("output formats", "[config]") {
  CHECK(format_from_string("json") == Format::json);
  CHECK_THROWS_AS(format_from_string("tsv"), ConfigError);
  CHECK(fmt17(0.1) == "0.10000000000000001");
  DensityGrid g;
  g.x_values = {0.0, 1.0};
  g.p_values = {0.5, 0.25};
  g.err_values = {0.0, 0.0};
  std::ostringstream csv, js;
  write_density(csv, g, Format::csv);
  CHECK(csv.str().rfind("x,p,err\n", 0) == 0);
  write_density(js, g, Format::json);
  const auto j = json::parse(js.str());
  CHECK(j["p"][1] == 0.25);
}
