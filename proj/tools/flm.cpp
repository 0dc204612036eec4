// flm: command-line front end.
//
//   flm check     --config C
//   flm density   --config C [--out P] [--format csv|json]
//   flm asymptote --config C [--out P] [--format csv|json]
//   flm simulate  --config C [--out P] [--seed N]
//   flm verify    [--config C] [--only NAME]... [--tolerance-scale F] [--seed N] [--out P] [--format csv|json]
//
// Flags override the matching config keys; config keys override defaults.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flm/acceptance.hpp"
#include "flm/asymptotics.hpp"
#include "flm/config.hpp"
#include "flm/density.hpp"
#include "flm/io.hpp"
#include "flm/levy_measure.hpp"
#include "flm/simulate.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
  std::vector<std::string> only;
  std::optional<double> tolerance_scale;
};

flm::RunConfig resolve(const Flags& f, bool required) {
  flm::RunConfig c;
  if (!f.config.empty()) {
    c = flm::load_config(f.config);
  } else if (required) {
    throw flm::ConfigError("--config is required");
  }
  if (f.out) c.output = *f.out;
  if (f.seed) c.seed = *f.seed;
  if (f.format) c.format = *f.format;
  if (!f.only.empty()) c.verify.only = f.only;
  if (f.tolerance_scale) c.verify.tolerance_scale = *f.tolerance_scale;
  flm::format_from_string(c.format);
  return c;
}

/// The output stream: the configured file, or stdout when none is set.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw flm::ConfigError("cannot open " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

/// Shift test of the profile m at r = 2^n / Gamma(H+1/2), shift 1 / Gamma(H+1/2).
bool profile_in_Ld(const flm::Model& m) {
  const double c = 1.0 / m.kernel().gamma_const();
  std::vector<double> xs;
  for (int n = 10; n <= 20; ++n) xs.push_back(std::exp2(n) * c);
  return flm::shift_ratio_test([&](double r) { return flm::mathfrak_m(m, r); }, xs, c).passes;
}

int cmd_check(const flm::RunConfig& c) {
  const auto& mu = c.measure;
  if (!flm::check_existence(mu, c.H)) {
    std::printf("exists: no\n");
    return static_cast<int>(flm::ExitCode::divergence);
  }
  std::string verdict = "exists: yes, regime: ";
  if (c.H > 0.5) {
    verdict += "LongMemory";
  } else {
    const auto r = flm::classify_tail_regime(mu, c.H);
    verdict += flm::to_string(r);
    if (r == flm::TailRegime::ExtremelyHeavy)
      verdict += profile_in_Ld(c.model()) ? ", 𝔪∈𝓛d plausible" : ", 𝔪∉𝓛d suspected";
  }
  std::printf("%s\n", verdict.c_str());
  const auto ic = flm::check_integral_conditions(mu, c.H);
  auto term = [](const char* name, const flm::ConditionTerm& t) {
    if (t.finite)
      std::printf("  %s: finite (%.6g)\n", name, t.value);
    else
      std::printf("  %s: infinite\n", name);
  };
  term("I1", ic.I1);
  term("I2", ic.I2);
  if (c.H > 0.5) {
    // exponential moments and the M_4 / M_2 growth trends (gamma = 3/4)
    const std::vector<double> xi{4.0, 8.0, 16.0, 32.0};
    if (!flm::check_exponential_moments(mu, xi.back())) {
      std::printf("  exponential moments: infinite\n");
    } else {
      const auto g = flm::growth_conditions(mu, 0.75, xi);
      std::printf("  M4 << M2(gamma xi)^2: %s; ln(M4/M2) + ln ln M2 << xi: %s (trend on xi = 4..32)\n",
                  g.cond3_decreasing ? "decreasing" : "not decreasing",
                  g.cond4_decreasing ? "decreasing" : "not decreasing");
    }
  }
  return 0;
}

int cmd_density(const flm::RunConfig& c) {
  const auto m = c.model();
  const auto kind = c.density.kind == "truncated" ? flm::Exponent::truncated : flm::Exponent::full;
  const auto fmt = flm::format_from_string(c.format);
  Output out(c.output);
  for (double t : c.t) {
    const auto g = flm::density_grid(m, kind, t, c.density.x_min, c.density.x_max, c.density.n);
    if (c.t.size() > 1 && fmt == flm::Format::csv) out.stream() << "# t=" << flm::fmt17(t) << '\n';
    flm::write_density(out.stream(), g, fmt);
  }
  return 0;
}

int cmd_asymptote(const flm::RunConfig& c) {
  const auto m = c.model();
  flm::Regime regime;
  if (c.asymptote.regime == "auto") {
    regime = flm::classify(m);
    if (regime == flm::Regime::Thm22_i && c.asymptote.power_tail) regime = flm::Regime::Ex41;
  } else {
    regime = flm::regime_from_string(c.asymptote.regime);
  }
  if (c.asymptote.points.empty()) throw flm::ConfigError("asymptote.points is empty");
  auto rep = flm::compare(m, regime, c.asymptote.points, c.asymptote.power_tail);
  Output out(c.output);
  flm::write_tail_report(out.stream(), rep, flm::format_from_string(c.format));
  return 0;
}

int cmd_simulate(const flm::RunConfig& c) {
  const auto m = c.model();
  const auto cfg = flm::sim_config(c);
  const auto xs = flm::sample(m, c.simulate.t, cfg);
  if (!c.output.empty()) {
    if (c.simulate.sample_format == "binary") {
      flm::write_binary_le(c.output, xs);
    } else {
      Output out(c.output);
      flm::write_samples_csv(out.stream(), xs);
    }
  }
  double mean = 0.0, var = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  std::printf("n=%zu t=%s seed=%llu mean=%s var=%s\n", xs.size(), flm::fmt17(c.simulate.t).c_str(),
              static_cast<unsigned long long>(cfg.seed), flm::fmt17(mean).c_str(), flm::fmt17(var).c_str());
  if (!c.simulate.grid.empty()) flm::write_empirical(std::cout, flm::empirical_density(xs, c.simulate.bandwidth, c.simulate.grid),
                                                     flm::Format::csv);
  return 0;
}

int cmd_verify(const flm::RunConfig& c) {
  flm::BatteryOptions opt;
  opt.tolerance_scale = c.verify.tolerance_scale;
  opt.seed = c.seed;
  const auto results = flm::run_battery(c.verify.only, opt, [](const flm::CriterionResult& r) {
    std::fprintf(stderr, "%s\n", flm::format_line(r).c_str());
  });
  Output out(c.output);
  bool all = true;
  if (flm::format_from_string(c.format) == flm::Format::json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : results)
      arr.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"seconds", r.seconds}, {"detail", r.detail}});
    out.stream() << arr.dump(2) << '\n';
  } else {
    out.stream() << "id,name,status,seconds,detail\n";
    for (const auto& r : results) {
      std::string d = r.detail;
      for (auto& ch : d)
        if (ch == '"') ch = '\'';
      out.stream() << r.id << ',' << r.name << ',' << (r.pass ? "PASS" : "FAIL") << ',' << flm::fmt17(r.seconds)
                   << ",\"" << d << "\"\n";
    }
  }
  for (const auto& r : results) all = all && r.pass;
  return all ? 0 : static_cast<int>(flm::ExitCode::tolerance_failure);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fractional Levy motion densities, tail asymptotes and simulation"};
  app.require_subcommand(1);
  Flags f;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--out", f.out, "output path (stdout when absent)");
    sub->add_option("--seed", f.seed, "master seed");
    sub->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--only", f.only, "run only this test (repeatable)");
    sub->add_option("--tolerance-scale", f.tolerance_scale, "multiply every acceptance tolerance");
  };
  auto* check = app.add_subcommand("check", "existence and tail-regime verdict");
  auto* density = app.add_subcommand("density", "density grid by Fourier inversion");
  auto* asymptote = app.add_subcommand("asymptote", "exact density against the tail asymptote");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo samples of Z_t");
  auto* verify = app.add_subcommand("verify", "acceptance battery");
  for (auto* s : {check, density, asymptote, simulate, verify}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(flm::ExitCode::config_error);
  }

  try {
    if (*verify) return cmd_verify(resolve(f, false));
    const auto c = resolve(f, true);
    if (*check) return cmd_check(c);
    if (*density) return cmd_density(c);
    if (*asymptote) return cmd_asymptote(c);
    return cmd_simulate(c);
  } catch (const flm::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(flm::ExitCode::config_error);
  }
}
