#pragma once

// Run configuration (JSON). Every object rejects keys it does not know.
// Infinite piece bounds are written as the strings "inf" / "-inf".

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flm/asymptotics.hpp"
#include "flm/charfn.hpp"
#include "flm/density.hpp"
#include "flm/error.hpp"
#include "flm/levy_measure.hpp"
#include "flm/simulate.hpp"

namespace flm {

using json = nlohmann::json;

struct DensitySection {
  double x_min = -10.0;
  double x_max = 10.0;
  std::size_t n = 201;
  std::string kind = "full";  // full | truncated
};

struct AsymptoteSection {
  std::string regime = "auto";
  std::vector<TimePoint> points;
  std::optional<PowerTail> power_tail;
};

struct SimulateSection {
  double t = 1.0;
  std::size_t n_samples = 100000;
  double eps = 1e-3;
  double s_min = 0.0;
  double far_share = 1e-3;
  std::string mode = "drop_compensated";
  std::string sample_format = "binary";  // binary | csv
  double bandwidth = 0.05;
  std::vector<double> grid;
};

struct VerifySection {
  std::vector<std::string> only;
  double tolerance_scale = 1.0;
};

struct RunConfig {
  LevyMeasure measure;
  double H = 0.25;
  std::optional<double> lambda;
  std::vector<double> t{1.0};
  DensitySection density;
  AsymptoteSection asymptote;
  SimulateSection simulate;
  VerifySection verify;
  std::string output;
  std::string format = "csv";
  std::uint64_t seed = 1;

  Model model() const { return Model(measure, H, lambda); }
};

namespace detail {

inline void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

inline double num(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ConfigError(where + ": expected a number");
}

inline json num_out(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

template <typename T>
T get(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

inline PieceFamily family_from(const std::string& s) {
  if (s == "power") return PieceFamily::power;
  if (s == "exp_tilted_power") return PieceFamily::exp_tilted_power;
  if (s == "gaussian_tail") return PieceFamily::gaussian_tail;
  throw ConfigError("unknown piece family '" + s + "'");
}

inline const char* family_name(PieceFamily f) {
  switch (f) {
    case PieceFamily::power:
      return "power";
    case PieceFamily::exp_tilted_power:
      return "exp_tilted_power";
    case PieceFamily::gaussian_tail:
      return "gaussian_tail";
  }
  return "?";
}

}  // namespace detail

inline LevyMeasure measure_from_json(const json& j) {
  detail::only_keys(j, {"atoms", "pieces", "dyadic"}, "measure");
  LevyMeasure mu;
  if (j.contains("atoms")) {
    for (const auto& a : j.at("atoms")) {
      detail::only_keys(a, {"location", "mass"}, "measure.atoms[]");
      if (!a.contains("location") || !a.contains("mass")) throw ConfigError("atom needs location and mass");
      mu.atoms.push_back({detail::num(a.at("location"), "location"), detail::num(a.at("mass"), "mass")});
    }
  }
  if (j.contains("pieces")) {
    for (const auto& p : j.at("pieces")) {
      detail::only_keys(p, {"lo", "hi", "family", "scale", "alpha", "theta"}, "measure.pieces[]");
      if (!p.contains("lo") || !p.contains("hi") || !p.contains("family"))
        throw ConfigError("piece needs lo, hi and family");
      DensityPiece d{detail::num(p.at("lo"), "lo"), detail::num(p.at("hi"), "hi"),
                     detail::family_from(p.at("family").get<std::string>())};
      if (p.contains("scale")) d.scale = detail::num(p.at("scale"), "scale");
      if (p.contains("alpha")) d.alpha = detail::num(p.at("alpha"), "alpha");
      if (p.contains("theta")) d.theta = detail::num(p.at("theta"), "theta");
      mu.pieces.push_back(d);
    }
  }
  if (j.contains("dyadic")) {
    const auto& d = j.at("dyadic");
    detail::only_keys(d, {"h", "k_max", "scale"}, "measure.dyadic");
    DyadicSeries s;
    s.h = detail::get(d, "h", s.h, "dyadic");
    s.k_max = detail::get(d, "k_max", s.k_max, "dyadic");
    s.scale = detail::get(d, "scale", s.scale, "dyadic");
    mu.dyadic = s;
  }
  return mu;
}

inline json measure_to_json(const LevyMeasure& mu) {
  json j = json::object();
  if (!mu.atoms.empty()) {
    j["atoms"] = json::array();
    for (const auto& a : mu.atoms) j["atoms"].push_back({{"location", a.location}, {"mass", a.mass}});
  }
  if (!mu.pieces.empty()) {
    j["pieces"] = json::array();
    for (const auto& p : mu.pieces)
      j["pieces"].push_back({{"lo", detail::num_out(p.lo)},
                             {"hi", detail::num_out(p.hi)},
                             {"family", detail::family_name(p.family)},
                             {"scale", p.scale},
                             {"alpha", p.alpha},
                             {"theta", p.theta}});
  }
  if (mu.dyadic) j["dyadic"] = {{"h", mu.dyadic->h}, {"k_max", mu.dyadic->k_max}, {"scale", mu.dyadic->scale}};
  return j;
}

inline RunConfig config_from_json(const json& j) {
  detail::only_keys(j, {"measure", "H", "lambda", "t", "density", "asymptote", "simulate", "verify", "output",
                        "format", "seed"},
                    "config");
  RunConfig c;
  if (!j.contains("measure")) throw ConfigError("config: 'measure' is required");
  c.measure = measure_from_json(j.at("measure"));
  if (c.measure.empty()) throw ConfigError("config: the measure is empty");
  if (!j.contains("H")) throw ConfigError("config: 'H' is required");
  c.H = detail::num(j.at("H"), "H");
  if (j.contains("lambda") && !j.at("lambda").is_null()) c.lambda = detail::num(j.at("lambda"), "lambda");
  c.t = detail::get(j, "t", c.t, "config");
  c.output = detail::get(j, "output", c.output, "config");
  c.format = detail::get(j, "format", c.format, "config");
  c.seed = detail::get(j, "seed", c.seed, "config");
  if (c.format != "csv" && c.format != "json") throw ConfigError("config.format must be csv or json");
  if (j.contains("density")) {
    const auto& d = j.at("density");
    detail::only_keys(d, {"x_min", "x_max", "n", "kind"}, "density");
    c.density.x_min = detail::get(d, "x_min", c.density.x_min, "density");
    c.density.x_max = detail::get(d, "x_max", c.density.x_max, "density");
    c.density.n = detail::get(d, "n", c.density.n, "density");
    c.density.kind = detail::get(d, "kind", c.density.kind, "density");
    if (c.density.kind != "full" && c.density.kind != "truncated")
      throw ConfigError("density.kind must be full or truncated");
  }
  if (j.contains("asymptote")) {
    const auto& a = j.at("asymptote");
    detail::only_keys(a, {"regime", "points", "power_tail"}, "asymptote");
    c.asymptote.regime = detail::get(a, "regime", c.asymptote.regime, "asymptote");
    if (c.asymptote.regime != "auto") regime_from_string(c.asymptote.regime);
    if (a.contains("points"))
      for (const auto& p : a.at("points")) {
        detail::only_keys(p, {"t", "x"}, "asymptote.points[]");
        c.asymptote.points.push_back({detail::num(p.at("t"), "t"), detail::num(p.at("x"), "x")});
      }
    if (a.contains("power_tail")) {
      const auto& p = a.at("power_tail");
      detail::only_keys(p, {"alpha", "C_minus", "C_plus"}, "asymptote.power_tail");
      c.asymptote.power_tail = PowerTail{detail::num(p.at("alpha"), "alpha"), detail::num(p.at("C_minus"), "C_minus"),
                                         detail::num(p.at("C_plus"), "C_plus")};
    }
  }
  if (j.contains("simulate")) {
    const auto& s = j.at("simulate");
    detail::only_keys(s, {"t", "n_samples", "eps", "s_min", "far_share", "mode", "sample_format", "bandwidth", "grid"},
                      "simulate");
    auto& S = c.simulate;
    S.t = detail::get(s, "t", S.t, "simulate");
    S.n_samples = detail::get(s, "n_samples", S.n_samples, "simulate");
    S.eps = detail::get(s, "eps", S.eps, "simulate");
    S.s_min = detail::get(s, "s_min", S.s_min, "simulate");
    S.far_share = detail::get(s, "far_share", S.far_share, "simulate");
    S.mode = detail::get(s, "mode", S.mode, "simulate");
    S.sample_format = detail::get(s, "sample_format", S.sample_format, "simulate");
    S.bandwidth = detail::get(s, "bandwidth", S.bandwidth, "simulate");
    S.grid = detail::get(s, "grid", S.grid, "simulate");
    if (S.mode != "drop_compensated" && S.mode != "gaussian_substitute")
      throw ConfigError("simulate.mode must be drop_compensated or gaussian_substitute");
    if (S.sample_format != "binary" && S.sample_format != "csv")
      throw ConfigError("simulate.sample_format must be binary or csv");
  }
  if (j.contains("verify")) {
    const auto& v = j.at("verify");
    detail::only_keys(v, {"only", "tolerance_scale"}, "verify");
    c.verify.only = detail::get(v, "only", c.verify.only, "verify");
    c.verify.tolerance_scale = detail::get(v, "tolerance_scale", c.verify.tolerance_scale, "verify");
  }
  return c;
}

inline json config_to_json(const RunConfig& c) {
  json j;
  j["measure"] = measure_to_json(c.measure);
  j["H"] = c.H;
  j["lambda"] = c.lambda ? json(*c.lambda) : json(nullptr);
  j["t"] = c.t;
  j["density"] = {{"x_min", c.density.x_min}, {"x_max", c.density.x_max}, {"n", c.density.n}, {"kind", c.density.kind}};
  json pts = json::array();
  for (const auto& p : c.asymptote.points) pts.push_back({{"t", p.t}, {"x", p.x}});
  j["asymptote"] = {{"regime", c.asymptote.regime}, {"points", pts}};
  if (c.asymptote.power_tail) {
    const auto& p = *c.asymptote.power_tail;
    j["asymptote"]["power_tail"] = {{"alpha", p.alpha}, {"C_minus", p.C_minus}, {"C_plus", p.C_plus}};
  }
  const auto& S = c.simulate;
  j["simulate"] = {{"t", S.t},         {"n_samples", S.n_samples},         {"eps", S.eps},
                   {"s_min", S.s_min}, {"far_share", S.far_share},         {"mode", S.mode},
                   {"sample_format", S.sample_format}, {"bandwidth", S.bandwidth}, {"grid", S.grid}};
  j["verify"] = {{"only", c.verify.only}, {"tolerance_scale", c.verify.tolerance_scale}};
  j["output"] = c.output;
  j["format"] = c.format;
  j["seed"] = c.seed;
  return j;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

inline SimConfig sim_config(const RunConfig& c) {
  SimConfig s;
  s.n_samples = c.simulate.n_samples;
  s.eps = c.simulate.eps;
  s.s_min = c.simulate.s_min;
  s.far_share = c.simulate.far_share;
  s.seed = c.seed;
  s.mode = c.simulate.mode == "gaussian_substitute" ? SmallJumpMode::gaussian_substitute
                                                    : SmallJumpMode::drop_compensated;
  return s;
}

}  // namespace flm
