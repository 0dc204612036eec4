#pragma once

// Acceptance battery: criteria 1..14, each reported as one pass/fail line.
// Every tolerance is multiplied by `tolerance_scale`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "flm/asymptotics.hpp"
#include "flm/charfn.hpp"
#include "flm/density.hpp"
#include "flm/error.hpp"
#include "flm/kernel.hpp"
#include "flm/levy_measure.hpp"
#include "flm/quadrature.hpp"
#include "flm/saddle.hpp"
#include "flm/simulate.hpp"

namespace flm {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct BatteryOptions {
  double tolerance_scale = 1.0;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

namespace battery {

inline std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

inline LevyMeasure atoms(std::initializer_list<Atom> a) {
  LevyMeasure mu;
  mu.atoms = a;
  return mu;
}

inline Model symmetric_model() { return Model(atoms({{1.0, 1.0}, {-1.0, 1.0}}), 0.25, 1.0); }
inline Model negative_model() { return Model(atoms({{-1.0, 1.0}}), 0.25, 1.0); }
inline Model long_memory_model() { return Model(atoms({{1.0, 1.0}}), 0.75); }
inline PowerTail power_tail() { return {1.5, 1.0, 1.0}; }
inline Model power_model() { return Model(power_tail_measure(power_tail()), 0.25); }

inline LevyMeasure dyadic_measure(double H) {
  LevyMeasure mu = atoms({{-1.0, 1.0}});
  mu.dyadic = DyadicSeries{H, 60, 1.0};
  return mu;
}
inline Model dyadic_model() { return Model(dyadic_measure(0.25), 0.25); }

/// The last entry is at least as close to 1 as the first (up to slack).
inline bool trends_to_one(const std::vector<double>& r, double slack = 1e-3) {
  if (r.size() < 2) return true;
  return std::abs(r.back() - 1.0) <= std::abs(r.front() - 1.0) + slack;
}

// ---------------------------------------------------------------------------

inline CriterionResult kernel_scaling(const BatteryOptions& o) {
  CriterionResult c{1, "kernel_scaling", false, {}, 0.0};
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> uH(0.02, 0.98), ut(-3.0, 3.0), us(-1.0, 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double H = uH(rng);
    while (std::abs(H - 0.5) < 2e-3) H = uH(rng);
    const double t = std::exp(ut(rng));
    // s/t uniform on (-1, 1) or log-uniform on (-100, -1)
    const double r = us(rng);
    double s = t * (r > 0.0 ? us(rng) : -std::exp(2.3 * (r + 1.0) * 2.0));
    if (s == 0.0) s = 0.5 * t;
    const Kernel k(H);
    const double lhs = k.f(t, s);
    const double rhs = std::pow(t, H - 0.5) * k.f(1.0, s / t);
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double tol = 1e-12 * o.tolerance_scale;
  c.pass = worst <= tol && secs < 1.0;
  c.detail = strf("max |f(t,s)-t^(H-1/2)f(1,s/t)|/(1+|f|) = %.2e (tol %.1e), %.3f s", worst, tol, secs);
  return c;
}

inline CriterionResult ell_closed_form(const BatteryOptions& o) {
  CriterionResult c{2, "ell", false, {}, 0.0};
  double worst_fd = 0.0, worst_as = 0.0;
  for (double H : {0.1, 0.25, 0.4}) {
    const Kernel k(H);
    const double G = std::tgamma(H + 0.5), beta = H - 0.5;
    // f^{-1}(y) = 1 - w(y), w(y) = (G y)^{1/beta}; ell = -w'(y)
    auto w = [&](double y) { return std::pow(G * y, 1.0 / beta); };
    for (int i = 0; i < 100; ++i) {
      const double y = (1.01 / G) * std::pow(1e3, i / 99.0);
      const double h = 1e-3 * y;
      const double d = (-w(y + 2 * h) + 8 * w(y + h) - 8 * w(y - h) + w(y - 2 * h)) / (12.0 * h);
      worst_fd = std::max(worst_fd, std::abs(k.ell(y) / -d - 1.0));
    }
    const double p = (3.0 - 2.0 * H) / (1.0 - 2.0 * H), q = (5.0 - 2.0 * H) / (3.0 - 2.0 * H);
    const double cH = (2.0 / (1.0 - 2.0 * H)) * std::pow(G, -2.0 / (1.0 - 2.0 * H));
    const double chat = (2.0 / (3.0 - 2.0 * H)) * std::pow((1.0 - 2.0 * H) / (2.0 * G), 2.0 / (3.0 - 2.0 * H));
    worst_as = std::max(worst_as, std::abs(k.ell(-1e6) / (-cH * std::pow(1e6, -p)) - 1.0));
    worst_as = std::max(worst_as, std::abs(k.ell(-1e-6) / (-chat * std::pow(1e-6, -q)) - 1.0));
  }
  const double tol_fd = 1e-6 * o.tolerance_scale, tol_as = 0.02 * o.tolerance_scale;
  c.pass = worst_fd <= tol_fd && worst_as <= tol_as;
  c.detail = strf("closed form vs finite difference %.2e (tol %.0e); negative-branch asymptotes %.2e (tol %.2g)",
                  worst_fd, tol_fd, worst_as, tol_as);
  return c;
}

inline CriterionResult lemma32(const BatteryOptions& o) {
  CriterionResult c{3, "lemma32", false, {}, 0.0};
  const Model m = symmetric_model();
  const std::vector<std::function<double(double)>> tests{
      [](double x) { return std::exp(-x); },
      [](double x) { return std::cos(3.0 * x); },
      [](double x) { return (x > 1.5 && x < 4.0) ? 1.0 : 0.0; },
      [](double x) { return x * x * std::exp(-x); },
      [](double x) { return 1.0 / (1.0 + x * x); },
  };
  double worst = 0.0, worst_mass = 0.0;
  for (double t : {1.0, 2.0}) {
    for (const auto& g : tests) {
      const double a = integrate_m_t(m, t, g), b = pushforward_oracle(m, t, g);
      worst = std::max(worst, std::abs(a - b) / std::abs(b));
    }
    const double mass = integrate_m_t(m, t, [](double) { return 1.0; });
    worst_mass = std::max(worst_mass, std::abs(mass / (t * m.Lambda()) - 1.0));
  }
  const double tol = 1e-6 * o.tolerance_scale, tol_mass = 1e-8 * o.tolerance_scale;
  c.pass = worst <= tol && worst_mass <= tol_mass;
  c.detail = strf("pushforward vs int g m_t %.2e (tol %.0e); int m_t / (t Lambda) - 1 = %.2e (tol %.0e)", worst, tol,
                  worst_mass, tol_mass);
  return c;
}

inline CriterionResult lemma33(const BatteryOptions& o) {
  CriterionResult c{4, "lemma33", false, {}, 0.0};
  const Model m = symmetric_model();
  const double v = std::pow(1e3, 5) * mathfrak_m(m, 1e3);
  const double target = 2.0 * m.kernel().c_H();
  const double tol = 0.10 * o.tolerance_scale;
  const double dev = std::abs(v / target - 1.0);
  // the quoted value 3.547772 agrees with 2c_H to about 2e-6
  c.pass = dev <= tol && std::abs(target / 3.547772 - 1.0) < 1e-5;
  c.detail = strf("r^5 m(r) at r=1e3 = %.6f vs 2c_H = %.7f (rel %.3f, tol %.2f)", v, target, dev, tol);
  return c;
}

inline CriterionResult thm22_regular(const BatteryOptions& o) {
  CriterionResult c{5, "thm22_regular", false, {}, 0.0};
  const Model m = symmetric_model();
  const double two_cH = 2.0 * m.kernel().c_H();
  const std::vector<double> xs{50, 75, 100, 125, 150, 175, 200};
  std::vector<double> r1, r2;
  for (double t : {1.0, 2.0}) {
    const ExponentTable tab(m, Exponent::full, t);
    for (double x : xs) (t == 1.0 ? r1 : r2).push_back(invert_at(tab, t, x).value * std::pow(x, 5) / two_cH);
  }
  const double band = 0.15 * o.tolerance_scale, tol_t = 0.10 * o.tolerance_scale;
  bool in_band = true, t_ok = true;
  double worst_t = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    in_band = in_band && std::abs(r1[i] - 1.0) <= band;
    worst_t = std::max(worst_t, std::abs(r2[i] / r1[i] - 1.0));
  }
  t_ok = worst_t <= tol_t;
  const bool trend = trends_to_one(r1);
  c.pass = in_band && t_ok && trend;
  c.detail = strf("t=1 ratio %.4f (x=50) .. %.4f (x=200), band 1+-%.2f, trend %s; t=2 vs t=1 max %.2e (tol %.2f)",
                  r1.front(), r1.back(), band, trend ? "yes" : "no", worst_t, tol_t);
  return c;
}

inline CriterionResult decomposition(const BatteryOptions& o) {
  CriterionResult c{6, "decomposition", false, {}, 0.0};
  const Model m = symmetric_model();
  const std::vector<double> xs{-3, -1, -0.5, 0, 0.5, 1, 2, 4, 8, 15};
  const auto comp = compose_density(m, 1.0, xs);
  const ExponentTable tab(m, Exponent::full, 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    worst = std::max(worst, std::abs(comp[i].total() / invert_at(tab, 1.0, xs[i]).value - 1.0));
  const double tol = 1e-3 * o.tolerance_scale;
  c.pass = worst <= tol;
  c.detail = strf("compose vs Fourier at 10 points, max rel %.2e (tol %.0e)", worst, tol);
  return c;
}

inline CriterionResult sandwich(const BatteryOptions& o) {
  CriterionResult c{7, "sandwich", false, {}, 0.0};
  const Model m = symmetric_model();
  const double eps = 0.5;
  bool ok = true;
  std::string rows;
  for (double y : {50.0, 100.0, 150.0, 200.0}) {
    const auto L = log_density_tilted(m, Exponent::truncated, 1.0, y);
    const double ylog = y * std::log(y) / m.lambda();
    // the band is widened by the scale factor around its centre
    const double centre = -ylog, half = eps * ylog * o.tolerance_scale;
    const bool in = L.log_value >= centre - half && L.log_value <= centre + half;
    ok = ok && in;
    rows += strf(" y=%g:%.4f", y, L.log_value / -ylog);
  }
  c.pass = ok;
  c.detail = "ln p~ / (-y ln y / lambda) in [0.5, 1.5]:" + rows;
  return c;
}

inline CriterionResult thm21(const BatteryOptions& o) {
  CriterionResult c{8, "thm21", false, {}, 0.0};
  const Model m = long_memory_model();
  const double t = 5.0;
  std::vector<double> r;
  for (double y : {10.0, 15.0, 20.0}) {
    const double x = y * std::pow(t, m.H() + 0.5);
    const auto L = log_density_tilted(m, Exponent::full, t, x);
    r.push_back(std::exp(thm21_log_asymptote(m, t, x) - L.log_value));
  }
  const double lo = 1.0 - 0.25 * o.tolerance_scale, hi = 1.0 + 0.33 * o.tolerance_scale;
  const bool trend = std::abs(r[2] - 1.0) <= std::abs(r[1] - 1.0) && std::abs(r[1] - 1.0) <= std::abs(r[0] - 1.0);
  c.pass = r[0] >= lo && r[0] <= hi && trend;
  c.detail = strf("asymptote/exact at y=10,15,20: %.5f %.5f %.5f (band [%.2f, %.2f], trend %s)", r[0], r[1], r[2], lo, hi,
                  trend ? "yes" : "no");
  return c;
}

/// M_1(t, xi) for mu = delta_{-1}, H < 1/2, by quadrature over s with
/// f(t, s) evaluated directly (no time scaling). The truncation level at
/// time t is lambda t^{H-1/2}.
inline double m1_delta_minus(const Model& m, double t, double xi) {
  const Kernel& k = m.kernel();
  const double lam = m.lambda() * m.chi(t);
  auto term = [&](double s) {
    const double y = -k.f(t, s);  // u f with u = -1
    return y <= lam ? y * std::expm1(xi * y) : 0.0;
  };
  // boundary s* < 0 where -f(t, s*) = lambda; included region is s < s*
  double a = -1.0, b = 0.0;
  while (-k.f(t, a) > lam) a *= 2.0;
  for (int i = 0; i < 200 && b - a > 1e-15 * std::abs(a); ++i) {
    const double mid = 0.5 * (a + b);
    (-k.f(t, mid) > lam ? b : a) = mid;
  }
  const QuadOptions q{1e-300, 1e-13, 8000};
  auto left = [&](double v) {
    const double s = -std::exp(v);
    return term(s) * std::exp(v);
  };
  const double v0 = std::log(-a);
  const double far = integrate(left, v0, v0 + 80.0, q).value;
  // (0, t) in w = log(t - s), where f(t, s) = e^{beta w} / Gamma
  auto right = [&](double w) {
    const double y = -std::exp(k.beta() * w) * k.inv_gamma();
    return (y <= lam ? y * std::expm1(xi * y) : 0.0) * std::exp(w);
  };
  const double near = integrate(right, std::log(t) - 80.0, std::log(t), q).value;
  return far + near;
}

inline CriterionResult saddle(const BatteryOptions& o) {
  CriterionResult c{9, "saddle", false, {}, 0.0};
  const Model m = negative_model();
  double worst_res = 0.0;
  for (double x : {10.0, 1e2, 1e3, 1e4, 1e5, 1e6}) {
    const auto s = solve_saddle(m, 1.0, x);
    worst_res = std::max(worst_res, s.residual / std::max(1.0, std::abs(x)));
  }
  double worst_scale = 0.0;
  for (double t : {0.5, 2.0})
    for (double x : {5.0, 50.0}) {
      const auto s = solve_saddle(m, t, x);
      worst_scale = std::max(worst_scale, std::abs(m1_delta_minus(m, t, s.xi) / x - 1.0));
    }
  const auto s6 = solve_saddle(m, 1.0, 1e6);
  const double zr = s6.zeta * m.lambda() / std::log(1e6);
  const double tol_res = 1e-10 * o.tolerance_scale, tol_scale = 1e-8 * o.tolerance_scale,
               tol_z = 0.20 * o.tolerance_scale;
  const bool p1 = worst_res <= tol_res, p2 = worst_scale <= tol_scale, p3 = std::abs(zr - 1.0) <= tol_z;
  c.pass = p1 && p2 && p3;
  c.detail = strf("residual %.1e (tol %.0e) %s; t-scaling %.1e (tol %.0e) %s; zeta lambda/ln x at 1e6 = %.4f (tol %.2f) %s",
                  worst_res, tol_res, p1 ? "ok" : "FAIL", worst_scale, tol_scale, p2 ? "ok" : "FAIL", zr, tol_z,
                  p3 ? "ok" : "FAIL");
  return c;
}

inline CriterionResult ex41(const BatteryOptions& o) {
  CriterionResult c{10, "ex41", false, {}, 0.0};
  const Model m = power_model();
  const auto pt = power_tail();
  const double r = 1e3;
  const double prof = mathfrak_m(m, r) / power_tail_profile_asymptote(m.kernel(), pt, r);
  const double h1 = thm22_heavy_asymptote(m, 1.0, r), h2 = thm22_heavy_asymptote(m, 2.0, r);
  const double e1 = ex41_asymptote(m, 1.0, r, pt), e2 = ex41_asymptote(m, 2.0, r, pt);
  const double factor = std::pow(2.0, 0.625);
  const double tol = 0.15 * o.tolerance_scale;
  const double d_prof = std::abs(prof - 1.0), d1 = std::abs(h1 / e1 - 1.0), d2 = std::abs(h2 / e2 - 1.0);
  const double d_fac = std::abs((h2 / h1) / factor - 1.0), d_fac_e = std::abs((e2 / e1) / factor - 1.0);
  c.pass = d_prof <= tol && d1 <= tol && d2 <= tol && d_fac <= tol && d_fac_e <= 1e-12;
  c.detail = strf("r m(r)/asymptote-1 %.2e; heavy/ex41-1 t=1 %.2e t=2 %.2e; t-factor %.6f vs 2^0.625 = %.6f (tol %.2f)",
                  d_prof, d1, d2, h2 / h1, factor, tol);
  return c;
}

inline CriterionResult ex42(const BatteryOptions& o) {
  CriterionResult c{11, "ex42", false, {}, 0.0};
  const Model m = dyadic_model();
  const double cc = 1.0 / m.kernel().gamma_const();
  double worst = 0.0;
  std::vector<double> xs;
  for (int n = 10; n <= 20; ++n) {
    const double a = mathfrak_m(m, (std::exp2(n) - 1.0) * cc), b = mathfrak_m(m, std::exp2(n) * cc);
    worst = std::max(worst, std::abs(a / b / 0.5 - 1.0));
    xs.push_back(std::exp2(n) * cc);
  }
  const auto shift = shift_ratio_test([&](double r) { return mathfrak_m(m, r); }, xs, cc);
  const bool exists = check_existence(m.mu(), m.H());
  const bool m2r_fails = classify_tail_regime(m.mu(), m.H()) == TailRegime::ExtremelyHeavy;
  const double tol = 0.05 * o.tolerance_scale;
  c.pass = worst <= tol && !shift.passes && exists && m2r_fails;
  c.detail = strf("max |2 ratio - 1| %.2e (tol %.2f); shift test %s (last ratio %.4f); existence %s; m2r %s", worst, tol,
                  shift.passes ? "passes" : "fails", shift.ratios.back(), exists ? "holds" : "fails",
                  m2r_fails ? "fails" : "holds");
  return c;
}

inline CriterionResult subexp(const BatteryOptions& o) {
  CriterionResult c{12, "subexp", false, {}, 0.0};
  auto grid = [](double x_hi, double dx, auto g) {
    std::vector<double> v;
    for (std::size_t i = 0; dx * static_cast<double>(i) <= x_hi + 1e-12; ++i) v.push_back(g(dx * static_cast<double>(i)));
    return v;
  };
  const double alpha = 1.5;
  const auto pareto = grid(2000.0, 0.02, [&](double x) { return alpha * std::pow(1.0 + x, -alpha - 1.0); });
  const auto rp = subexp_test(0.0, 0.02, pareto, 2000.0);
  const auto expo = grid(200.0, 0.01, [](double x) { return std::exp(-x); });
  const auto re = subexp_test(0.0, 0.01, expo, 200.0);
  const double band = 0.2 * o.tolerance_scale;
  const double last_p = rp.back().conv_ratio, last_e = re.back().conv_ratio;
  bool growing = true;
  for (std::size_t i = 1; i < re.size(); ++i) growing = growing && re[i].conv_ratio > re[i - 1].conv_ratio;
  c.pass = std::abs(last_p - 2.0) <= band && growing && last_e > 2.0 + band;
  c.detail = strf("Pareto (g*g)/g at x=%.0f: %.4f (band 2+-%.1f); exponential at x=%.0f: %.1f, increasing %s",
                  rp.back().x, last_p, band, re.back().x, last_e, growing ? "yes" : "no");
  return c;
}

inline CriterionResult monte_carlo(const BatteryOptions& o) {
  CriterionResult c{13, "monte_carlo", false, {}, 0.0};
  const Model m = symmetric_model();
  SimConfig cfg;
  cfg.n_samples = 1000000;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  const auto xs = sample(m, 1.0, cfg);
  const std::vector<double> g{-2.0, -1.0, 0.0, 1.0, 2.0};
  const auto ed = empirical_density(xs, 0.05, g);
  const ExponentTable tab(m, Exponent::full, 1.0);
  const double k = 3.0 * o.tolerance_scale;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    worst_z = std::max(worst_z, std::abs(ed.p[i] - invert_at(tab, 1.0, g[i]).value) / ed.se[i]);
  // point where the asymptotic tail integral predicts 100 exceedances
  const double n = static_cast<double>(cfg.n_samples);
  const double p = m.kernel().tail_exponent();
  const double x100 = std::pow(thm22_regular_asymptote(m, 1.0) / (p - 1.0) / (100.0 / n), 1.0 / (p - 1.0));
  const double expected = n * thm22_regular_tail(m, x100);
  const double count = static_cast<double>(exceedances(xs, x100));
  const double se = std::sqrt(expected * (1.0 - expected / n));
  const double z_tail = (count - expected) / se;
  // exact tail from the inverted density, for reference
  const double x_end = 60.0;
  const double exact_tail = density_grid(tab, 1.0, x100, x_end, 5001).mass() + thm22_regular_tail(m, x_end);
  SimConfig cfg2 = cfg;
  cfg2.threads = cfg.threads == 1 ? 3 : 1;
  const bool det = sample(m, 1.0, cfg2) == xs;
  const bool bulk_ok = worst_z <= k, tail_ok = std::abs(z_tail) <= k;
  c.pass = bulk_ok && tail_ok && det;
  c.detail = strf("bulk max |z| %.2f %s; tail x=%.4f count %.0f vs asymptote %.1f, z=%.2f %s (exact-density tail %.1f);"
                  " deterministic %s",
                  worst_z, bulk_ok ? "ok" : "FAIL", x100, count, expected, z_tail, tail_ok ? "ok" : "FAIL",
                  n * exact_tail, det ? "yes" : "no");
  return c;
}

inline CriterionResult normalization(const BatteryOptions& o) {
  CriterionResult c{14, "normalization", false, {}, 0.0};
  struct Case {
    const char* name;
    Model m;
    double t, x_max;
    std::size_t n;
  };
  const std::vector<Case> cases{
      {"delta+-1 t=1", symmetric_model(), 1.0, 40.0, 4001},
      {"delta+-1 t=2", symmetric_model(), 2.0, 40.0, 4001},
      {"delta-1", negative_model(), 1.0, 40.0, 4001},
      {"H=3/4 delta1 t=5", long_memory_model(), 5.0, 60.0, 4001},
      {"power tail", power_model(), 1.0, 400.0, 8001},
      {"dyadic", dyadic_model(), 1.0, 400.0, 8001},
  };
  const double tol = 1e-3 * o.tolerance_scale;
  double worst = 0.0;
  std::string rows;
  for (const auto& cs : cases) {
    const ExponentTable tab(cs.m, Exponent::full, cs.t);
    const auto r = total_mass(tab, cs.t, cs.x_max, cs.n);
    worst = std::max(worst, std::abs(r.value - 1.0));
    rows += strf("; %s %.6f", cs.name, r.value);
  }
  c.pass = worst <= tol;
  c.detail = strf("max |mass - 1| %.2e (tol %.0e)", worst, tol) + rows;
  return c;
}

}  // namespace battery

struct CriterionEntry {
  int id;
  const char* name;
  CriterionResult (*run)(const BatteryOptions&);
};

inline const std::vector<CriterionEntry>& criteria() {
  static const std::vector<CriterionEntry> list{
      {1, "kernel_scaling", battery::kernel_scaling}, {2, "ell", battery::ell_closed_form},
      {3, "lemma32", battery::lemma32},               {4, "lemma33", battery::lemma33},
      {5, "thm22_regular", battery::thm22_regular},   {6, "decomposition", battery::decomposition},
      {7, "sandwich", battery::sandwich},             {8, "thm21", battery::thm21},
      {9, "saddle", battery::saddle},                 {10, "ex41", battery::ex41},
      {11, "ex42", battery::ex42},                    {12, "subexp", battery::subexp},
      {13, "monte_carlo", battery::monte_carlo},      {14, "normalization", battery::normalization},
  };
  return list;
}

/// Runs the named criteria (all when `only` is empty). Unknown names are a
/// config error. A criterion that throws is reported as a failure.
inline std::vector<CriterionResult> run_battery(const std::vector<std::string>& only, const BatteryOptions& opt,
                                                const std::function<void(const CriterionResult&)>& on_result = {}) {
  for (const auto& name : only) {
    const bool known = std::any_of(criteria().begin(), criteria().end(), [&](const auto& e) {
      return name == e.name || name == std::to_string(e.id);
    });
    if (!known) throw ConfigError("unknown test '" + name + "'");
  }
  std::vector<CriterionResult> out;
  for (const auto& e : criteria()) {
    if (!only.empty() && std::none_of(only.begin(), only.end(), [&](const std::string& n) {
          return n == e.name || n == std::to_string(e.id);
        }))
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = e.run(opt);
    } catch (const std::exception& ex) {
      r = CriterionResult{e.id, e.name, false, std::string("error: ") + ex.what(), 0.0};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(r);
    out.push_back(r);
  }
  return out;
}

inline std::string format_line(const CriterionResult& r) {
  return battery::strf("%-4s %2d %-15s %7.1fs  ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds) + r.detail;
}

}  // namespace flm
