#pragma once

// Closed-form tail asymptotes and exact-vs-asymptote reports.

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flm/charfn.hpp"
#include "flm/density.hpp"
#include "flm/error.hpp"
#include "flm/levy_measure.hpp"
#include "flm/quadrature.hpp"
#include "flm/saddle.hpp"

namespace flm {

/// Label attached to results obtained outside the proven limit regime.
inline constexpr const char* kJointLimitLabel = "joint limit t, x -> inf: conjectured, unproven";

enum class Regime { Thm21, Thm22_i, Thm22_ii, Ex41 };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Thm21:
      return "Thm21";
    case Regime::Thm22_i:
      return "Thm22_i";
    case Regime::Thm22_ii:
      return "Thm22_ii";
    case Regime::Ex41:
      return "Ex41";
  }
  return "?";
}

inline Regime regime_from_string(const std::string& s) {
  for (Regime r : {Regime::Thm21, Regime::Thm22_i, Regime::Thm22_ii, Regime::Ex41})
    if (s == to_string(r)) return r;
  throw ConfigError("unknown regime '" + s + "'");
}

/// Regime of a model: Thm21 for H > 1/2, otherwise by the tail class of mu.
inline Regime classify(const Model& m) {
  if (!m.kernel().short_memory()) return Regime::Thm21;
  return classify_tail_regime(m.mu(), m.H()) == TailRegime::Regular ? Regime::Thm22_ii : Regime::Thm22_i;
}

/// The same model with mu(du) replaced by mu(-du); its right tail is the
/// left tail of the original.
inline Model reflected(const Model& m) { return Model(m.mu().reflected(), m.H(), m.lambda()); }

// ---------------------------------------------------------------------------
// H > 1/2

/// log of (2 pi K)^{-1/2} exp(D) at the saddle point.
inline double thm21_log_asymptote(const Model& m, double t, double x) {
  if (m.kernel().short_memory()) throw RegimeError("thm21 asymptote requires H > 1/2");
  const auto s = solve_saddle(m, t, x);
  return s.D - 0.5 * std::log(2.0 * std::numbers::pi * s.K);
}

inline double thm21_asymptote(const Model& m, double t, double x) { return std::exp(thm21_log_asymptote(m, t, x)); }

// ---------------------------------------------------------------------------
// H < 1/2

/// t^{3/2-H} m(t^{1/2-H} x).
inline double thm22_heavy_asymptote(const Model& m, double t, double x) {
  detail::require_short(m, "thm22 heavy asymptote");
  if (classify_tail_regime(m.mu(), m.H()) != TailRegime::ExtremelyHeavy)
    throw RegimeError("thm22 heavy asymptote requires an extremely heavy-tailed measure");
  if (!(t > 0.0) || !(x > 0.0)) throw DomainError("thm22 heavy asymptote requires t > 0 and x > 0");
  return std::pow(t, 1.5 - m.H()) * mathfrak_m(m, x / m.chi(t));
}

/// c_H (int |u|^{2/(1-2H)} mu(du)) x^{-(3-2H)/(1-2H)}; independent of t.
inline double thm22_regular_asymptote(const Model& m, double x) {
  detail::require_short(m, "thm22 regular asymptote");
  if (classify_tail_regime(m.mu(), m.H()) != TailRegime::Regular)
    throw RegimeError("thm22 regular asymptote requires int |u|^{2/(1-2H)} mu(du) < inf");
  if (!m.mu().has_mass(-1)) throw RegimeError("thm22 regular asymptote requires mu(R-) > 0");
  if (!(x > 0.0)) throw DomainError("thm22 regular asymptote requires x > 0");
  const auto& k = m.kernel();
  const double moment = moment_integral(m.mu(), 2.0 / (1.0 - 2.0 * m.H()), Region::all).value;
  return k.c_H() * moment * std::pow(x, -k.tail_exponent());
}

/// int_x^inf of the regular asymptote.
inline double thm22_regular_tail(const Model& m, double x) {
  const double p = m.kernel().tail_exponent();
  return thm22_regular_asymptote(m, x) * x / (p - 1.0);
}

// ---------------------------------------------------------------------------
// Power tails

struct PowerTail {
  double alpha;
  double C_minus;
  double C_plus;
};

inline void require_power_range(double H, double alpha) {
  if (!(H > 0.0 && H < 0.5)) throw RegimeError("power-tail asymptotes require H < 1/2");
  const double lo = 2.0 / (3.0 - 2.0 * H), hi = 2.0 / (1.0 - 2.0 * H);
  if (!(alpha > lo && alpha < hi))
    throw DomainError("alpha must lie in (" + std::to_string(lo) + ", " + std::to_string(hi) + ")");
}

/// mu(du) = alpha |u|^{-alpha-1} (C_- 1{u <= -1} + C_+ 1{u >= 1}) du.
inline LevyMeasure power_tail_measure(const PowerTail& p) {
  const double inf = detail::kInf;
  LevyMeasure mu;
  if (p.C_minus > 0.0) mu.pieces.push_back({-inf, -1.0, PieceFamily::power, p.C_minus, p.alpha, 0.0});
  if (p.C_plus > 0.0) mu.pieces.push_back({1.0, inf, PieceFamily::power, p.C_plus, p.alpha, 0.0});
  return mu;
}

/// Phi(z) = (1/z) ell(1/z).
inline double Phi(const Kernel& k, double z) { return k.ell(1.0 / z) / z; }

/// int_0^inf Phi(z) alpha z^{-alpha-1} dz by quadrature in log z.
inline double phi_integral_plus(const Kernel& k, double alpha) {
  require_power_range(k.H(), alpha);
  // Phi vanishes for z > Gamma(H+1/2); integrand ~ z^{p-1-alpha} in dz/z at 0
  const double a0 = k.tail_exponent() - 1.0 - alpha;
  const double vhi = std::log(k.gamma_const()), vlo = vhi - 45.0 / a0;
  auto g = [&](double v) {
    const double z = std::exp(v);
    return Phi(k, z) * alpha * std::pow(z, -alpha);
  };
  return integrate(g, vlo, vhi, QuadOptions{1e-15, 1e-13, 4000}).value;
}

/// int_{-inf}^0 Phi(z) alpha |z|^{-alpha-1} dz by quadrature in log|z|.
inline double phi_integral_minus(const Kernel& k, double alpha) {
  require_power_range(k.H(), alpha);
  const double a0 = k.tail_exponent() - 1.0 - alpha;   // decay rate as |z| -> 0
  const double a1 = alpha - k.origin_exponent() + 1.0;  // decay rate as |z| -> inf
  std::vector<double> br;
  for (double v = -45.0 / a0; v < 45.0 / a1; v += 1.0) br.push_back(v);
  br.push_back(45.0 / a1);
  auto g = [&](double v) {
    const double z = -std::exp(v);
    return Phi(k, z) * alpha * std::exp(-alpha * v);
  };
  return integrate(g, std::span<const double>(br), QuadOptions{1e-15, 1e-13, 4000}).value;
}

/// Asymptote of m(r): (1/r)(mu_-(r) int Phi p_- + mu_+(r) int Phi p_+).
inline double power_tail_profile_asymptote(const Kernel& k, const PowerTail& p, double r) {
  const double tail = std::pow(r, -p.alpha);
  return (p.C_minus * tail * phi_integral_minus(k, p.alpha) + p.C_plus * tail * phi_integral_plus(k, p.alpha)) / r;
}

/// t^{1-alpha(1/2-H)} x^{-alpha-1} int Phi d mu_{alpha,C_-,C_+}.
inline double ex41_asymptote(const Kernel& k, double t, double x, const PowerTail& p) {
  require_power_range(k.H(), p.alpha);
  if (!(t > 0.0) || !(x > 0.0)) throw DomainError("ex41 asymptote requires t > 0 and x > 0");
  const double I = p.C_minus * phi_integral_minus(k, p.alpha) + p.C_plus * phi_integral_plus(k, p.alpha);
  return std::pow(t, 1.0 - p.alpha * (0.5 - k.H())) * std::pow(x, -p.alpha - 1.0) * I;
}

inline double ex41_asymptote(const Model& m, double t, double x, const PowerTail& p) {
  return ex41_asymptote(m.kernel(), t, x, p);
}

// ---------------------------------------------------------------------------
// Reports

struct TailRow {
  double t, x, exact, asymptote, ratio, err;
};

struct TailReport {
  Regime regime = Regime::Thm22_ii;
  std::vector<TailRow> rows;
  std::string note;  // e.g. the joint-limit label
};

struct TimePoint {
  double t, x;
};

/// Exact density and asymptote at each (t, x). The exact value comes from
/// tilted inversion for Thm21 and from plain inversion otherwise.
inline TailReport compare(const Model& m, Regime regime, std::span<const TimePoint> grid,
                          std::optional<PowerTail> power = {}, const InversionOptions& opt = {}) {
  const Regime actual = classify(m);
  const bool ok = regime == actual || (regime == Regime::Ex41 && actual == Regime::Thm22_i);
  if (!ok)
    throw RegimeError(std::string("requested regime ") + to_string(regime) + " but the model is " + to_string(actual));
  if (regime == Regime::Ex41 && !power) throw ConfigError("Ex41 comparison needs the power-tail parameters");
  TailReport rep;
  rep.regime = regime;
  std::map<double, ExponentTable> tables;
  for (const auto& [t, x] : grid) {
    TailRow row{t, x, 0.0, 0.0, 0.0, 0.0};
    if (regime == Regime::Thm21) {
      const auto L = log_density_tilted(m, Exponent::full, t, x, opt);
      const double la = thm21_log_asymptote(m, t, x);
      row.exact = std::exp(L.log_value);
      row.asymptote = std::exp(la);
      row.ratio = std::exp(L.log_value - la);
      row.err = L.rel_err * row.exact;
    } else {
      auto it = tables.find(t);
      if (it == tables.end()) it = tables.emplace(t, ExponentTable(m, Exponent::full, t, 0.0, opt)).first;
      const auto v = invert_at(it->second, t, x, opt);
      row.exact = v.value;
      row.err = v.err;
      switch (regime) {
        case Regime::Thm22_i:
          row.asymptote = thm22_heavy_asymptote(m, t, x);
          break;
        case Regime::Thm22_ii:
          row.asymptote = thm22_regular_asymptote(m, x);
          break;
        default:
          row.asymptote = ex41_asymptote(m, t, x, *power);
          break;
      }
      row.ratio = row.asymptote > 0.0 ? row.exact / row.asymptote : std::nan("");
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace flm
