#pragma once

// Levy measure mu: point masses, densities from a few named families, and
// the dyadic series
//   sum_{k>=0} 2^{k - 2k/(1-2h)} delta_{2^k}.
// Every unbounded density piece carries its tail index through its family,
// and divergence of moment-type integrals is decided from that index; the
// numerical doubling test is a fallback for integrals that have no metadata.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flm/branch.hpp"
#include "flm/error.hpp"
#include "flm/kernel.hpp"
#include "flm/quadrature.hpp"

namespace flm {

struct Atom {
  double location;
  double mass;
};

enum class PieceFamily {
  power,             // scale * alpha * |u|^{-alpha-1}
  exp_tilted_power,  // scale * |u|^{-alpha-1} * exp(-theta |u|)
  gaussian_tail,     // scale * exp(-u^2)
};

struct TailMeta {
  double index;  // +inf for tails lighter than every power
  bool slowly_varying = false;
};

struct DensityPiece {
  double lo;
  double hi;
  PieceFamily family;
  double scale = 1.0;
  double alpha = 0.0;
  double theta = 0.0;

  int side() const { return lo >= 0.0 ? 1 : -1; }
  bool unbounded() const { return std::isinf(lo) || std::isinf(hi); }
  bool touches_zero() const { return lo == 0.0 || hi == 0.0; }

  double density(double u) const {
    if (!(u >= lo && u <= hi) || u == 0.0) return 0.0;
    const double a = std::abs(u);
    switch (family) {
      case PieceFamily::power:
        return scale * alpha * std::pow(a, -alpha - 1.0);
      case PieceFamily::exp_tilted_power:
        return scale * std::pow(a, -alpha - 1.0) * std::exp(-theta * a);
      case PieceFamily::gaussian_tail:
        return scale * std::exp(-u * u);
    }
    return 0.0;
  }

  /// Tail metadata at the infinite end (only meaningful if unbounded()).
  TailMeta tail() const {
    if (family == PieceFamily::power) return {alpha, false};
    return {std::numeric_limits<double>::infinity(), false};
  }

  /// Exponent e with density ~ |u|^{e} as u -> 0 (only if touches_zero()).
  double zero_exponent() const {
    if (family == PieceFamily::gaussian_tail) return 0.0;
    return -alpha - 1.0;
  }
};

/// Atoms 2^k (k = 0..k_max) with masses scale * 2^{k - 2k/(1-2h)}.
struct DyadicSeries {
  double h = 0.25;
  int k_max = 60;
  double scale = 1.0;

  double mass(int k) const { return scale * std::exp2(k * (1.0 - 2.0 / (1.0 - 2.0 * h))); }
  /// The q-th moment over u >= 1 is finite iff q < this value.
  double moment_threshold() const { return 2.0 / (1.0 - 2.0 * h) - 1.0; }
};

class LevyMeasure {
 public:
  std::vector<Atom> atoms;
  std::vector<DensityPiece> pieces;
  std::optional<DyadicSeries> dyadic;

  LevyMeasure() = default;
  LevyMeasure(std::vector<Atom> a, std::vector<DensityPiece> p = {}, std::optional<DyadicSeries> d = {})
      : atoms(std::move(a)), pieces(std::move(p)), dyadic(d) {
    validate();
  }

  bool empty() const { return atoms.empty() && pieces.empty() && !dyadic; }

  void validate() const {
    for (const auto& a : atoms) {
      if (a.location == 0.0 || !std::isfinite(a.location)) throw DomainError("atom location must be finite and non-zero");
      if (!(a.mass > 0.0) || !std::isfinite(a.mass)) throw DomainError("atom mass must be positive and finite");
    }
    for (const auto& p : pieces) {
      if (!(p.hi > p.lo)) throw DomainError("density piece needs lo < hi");
      if (p.lo < 0.0 && p.hi > 0.0) throw DomainError("density piece must not straddle u = 0");
      if (!(p.scale > 0.0)) throw DomainError("density piece scale must be positive");
      if (p.family == PieceFamily::exp_tilted_power && !(p.theta > 0.0))
        throw DomainError("exp-tilted power piece needs theta > 0");
      if (p.family == PieceFamily::power && !(p.alpha > 0.0)) throw DomainError("power piece needs alpha > 0");
      if (p.touches_zero() && p.family != PieceFamily::gaussian_tail && !(p.alpha < 2.0))
        throw DomainError("density piece violates int (1 ^ u^2) mu(du) < inf near 0 (need alpha < 2)");
      if (p.unbounded() && p.family == PieceFamily::power && !(p.alpha > 0.0))
        throw DomainError("power tail needs alpha > 0");
    }
    if (dyadic) {
      if (!(dyadic->h > 0.0 && dyadic->h < 0.5)) throw DomainError("dyadic series parameter h must lie in (0, 1/2)");
      if (dyadic->k_max < 0 || dyadic->k_max > 900) throw DomainError("dyadic series k_max out of range");
    }
  }

  /// Atoms plus the expanded dyadic series.
  std::vector<Atom> all_atoms() const {
    std::vector<Atom> out = atoms;
    if (dyadic)
      for (int k = 0; k <= dyadic->k_max; ++k) out.push_back({std::exp2(k), dyadic->mass(k)});
    return out;
  }

  bool has_mass(int side) const {
    for (const auto& a : all_atoms())
      if ((a.location > 0.0) == (side > 0)) return true;
    for (const auto& p : pieces)
      if (p.side() == side) return true;
    return false;
  }

  /// The image of mu under u -> -u.
  LevyMeasure reflected() const {
    LevyMeasure r;
    for (auto a : atoms) r.atoms.push_back({-a.location, a.mass});
    for (auto p : pieces) {
      DensityPiece q = p;
      q.lo = -p.hi;
      q.hi = -p.lo;
      r.pieces.push_back(q);
    }
    if (dyadic) {
      // no reflected dyadic family; expand into atoms
      for (int k = 0; k <= dyadic->k_max; ++k) r.atoms.push_back({-std::exp2(k), dyadic->mass(k)});
    }
    return r;
  }
};

// ---------------------------------------------------------------------------
// Integration against mu

/// Envelope of an integrand g: |g(u)| <= C |u|^{at_inf} e^{exp_rate u} for
/// large |u| and <= C |u|^{at_zero} near 0.
struct Growth {
  double at_inf = 0.0;
  double at_zero = 0.0;
  double exp_rate = 0.0;
};

struct MeasureTolerance {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
};

namespace detail {

inline bool in_region(double u, double lo, double hi) { return u >= lo && u <= hi; }

/// Range of v = ln|u| over which the envelope of g * density * |u| is not
/// negligible relative to its peak.
inline std::pair<double, double> piece_log_range(const DensityPiece& p, double a, double b, const Growth& gr) {
  auto env = [&](double v) {
    const double u = std::exp(v);
    const double grow = std::pow(u, u >= 1.0 ? gr.at_inf : gr.at_zero);
    return grow * std::exp(gr.exp_rate * p.side() * u) * p.density(p.side() * u) * u;
  };
  double va = a > 0.0 ? std::log(a) : -kInf;
  double vb = std::isinf(b) ? kInf : std::log(b);
  if (std::isinf(va) || std::isinf(vb)) {
    // anchor at a finite interior point and walk outwards until the envelope
    // has dropped by 1e-18 below the running maximum
    double anchor = std::isinf(va) ? (std::isinf(vb) ? 0.0 : vb - 1.0) : va + 1.0;
    double peak = env(anchor);
    for (double v = anchor; std::isinf(vb) && v < anchor + 2000.0; v += 0.5) {
      const double e = env(v);
      if (std::isfinite(e)) peak = std::max(peak, e);
      if (e < 1e-18 * peak && v > anchor + 2.0) {
        vb = v;
        break;
      }
    }
    for (double v = anchor; std::isinf(va) && v > anchor - 2000.0; v -= 0.5) {
      const double e = env(v);
      if (std::isfinite(e)) peak = std::max(peak, e);
      if (e < 1e-18 * peak && v < anchor - 2.0) {
        va = v;
        break;
      }
    }
    if (std::isinf(va) || std::isinf(vb)) throw DivergenceError("integrand does not decay against the density piece");
  }
  return {va, vb};
}

}  // namespace detail

/// int_{[lo,hi]} g(u) mu(du), numerically. Divergence must be excluded by
/// the caller (see moment_integral for the metadata-based decisions).
template <typename G>
auto integrate_measure(const LevyMeasure& mu, G&& g, double lo, double hi, const Growth& gr = {},
                       const MeasureTolerance& tol = {}) {
  using T = std::decay_t<decltype(g(1.0))>;
  QuadResult<T> out;
  out.value = T{};
  for (const auto& a : mu.all_atoms())
    if (detail::in_region(a.location, lo, hi)) out.value += a.mass * g(a.location);
  for (const auto& p : mu.pieces) {
    const double plo = std::max(p.lo, lo), phi = std::min(p.hi, hi);
    if (!(phi > plo)) continue;
    const int sd = p.side();
    const double a = sd > 0 ? plo : -phi;
    const double b = sd > 0 ? phi : -plo;
    const auto [va, vb] = detail::piece_log_range(p, a, b, gr);
    if (!(vb > va)) continue;
    auto f = [&](double v) -> T {
      const double u = sd * std::exp(v);
      return g(u) * (p.density(u) * std::abs(u));
    };
    const auto pts = detail::tau_breaks(va, vb, 1.0);
    const auto r = integrate(f, std::span<const double>(pts), QuadOptions{tol.abs_tol * 1e-2, tol.rel_tol * 1e-2, 4000});
    out.value += r.value;
    out.abs_error += r.abs_error;
    out.converged = out.converged && r.converged;
    out.evaluations += r.evaluations;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Moments

enum class Region { inner, outer, all, custom };

struct MomentResult {
  double value = 0.0;  // +inf when divergent
  double abs_error_estimate = 0.0;
  bool infinite() const { return std::isinf(value); }
};

/// The three-successive-doublings test: partial(R) for R = R0, 2R0, 4R0, ...
/// Returns true when three successive doublings each grow the value by
/// more than 1% (relative).
inline bool doubling_diverges(const std::function<double(double)>& partial, double R0, int max_doublings = 40,
                              double settle = 1e-10) {
  double prev = partial(R0);
  int growing = 0;
  double R = R0;
  for (int j = 0; j < max_doublings; ++j) {
    R *= 2.0;
    const double cur = partial(R);
    const double rel = std::abs(cur - prev) / std::max(std::abs(prev), 1e-300);
    if (rel > 0.01) {
      if (++growing >= 3) return true;
    } else {
      growing = 0;
      if (rel < settle) return false;
    }
    prev = cur;
  }
  return false;
}

inline MomentResult moment_integral(const LevyMeasure& mu, double p, Region region, double lo = 0.0, double hi = 0.0,
                                    const MeasureTolerance& tol = {}) {
  if (!(p >= 0.0)) throw DomainError("moment_integral requires p >= 0");
  const double inf = detail::kInf;
  // region as a list of intervals
  std::vector<std::pair<double, double>> parts;
  switch (region) {
    case Region::inner: parts = {{-1.0, 1.0}}; break;
    case Region::outer: parts = {{-inf, -1.0}, {1.0, inf}}; break;
    case Region::all: parts = {{-inf, inf}}; break;
    case Region::custom:
      if (!(hi > lo)) throw DomainError("custom moment region needs lo < hi");
      parts = {{lo, hi}};
      break;
  }
  MomentResult res;
  for (const auto& [a, b] : parts) {
    // metadata decisions
    for (const auto& pc : mu.pieces) {
      const double plo = std::max(pc.lo, a), phi = std::min(pc.hi, b);
      if (!(phi > plo)) continue;
      if (std::isinf(plo) || std::isinf(phi)) {
        if (p >= pc.tail().index) {
          res.value = inf;
          return res;
        }
      }
      if (pc.touches_zero() && (plo == 0.0 || phi == 0.0)) {
        const double e = pc.zero_exponent();
        if (p + e <= -1.0) {
          if (p == 0.0) throw DomainError("moment_integral: region touches 0 where mu has infinite mass");
          res.value = inf;
          return res;
        }
      }
    }
    if (mu.dyadic && b >= 1.0 && std::isinf(b) && p >= mu.dyadic->moment_threshold()) {
      res.value = inf;
      return res;
    }
    Growth gr{p, p, 0.0};
    const auto r = integrate_measure(mu, [p](double u) { return std::pow(std::abs(u), p); }, a, b, gr, tol);
    res.value += r.value;
    res.abs_error_estimate += r.abs_error;
  }
  return res;
}

/// int_{|u|>=1} |u|^{2/(3-2H)} mu(du) < inf.
inline bool check_existence(const LevyMeasure& mu, double H) {
  if (!(H > 0.0 && H < 1.0) || H == 0.5) throw DomainError("check_existence: H must lie in (0,1) minus {1/2}");
  return !moment_integral(mu, 2.0 / (3.0 - 2.0 * H), Region::outer).infinite();
}

enum class TailRegime { Regular, ExtremelyHeavy };

inline const char* to_string(TailRegime r) { return r == TailRegime::Regular ? "Regular" : "ExtremelyHeavy"; }

inline TailRegime classify_tail_regime(const LevyMeasure& mu, double H) {
  if (!(H > 0.0 && H < 0.5)) throw DomainError("classify_tail_regime requires H in (0, 1/2)");
  if (!check_existence(mu, H)) throw DivergenceError("classify_tail_regime: the existence condition fails");
  return moment_integral(mu, 2.0 / (1.0 - 2.0 * H), Region::outer).infinite() ? TailRegime::ExtremelyHeavy
                                                                                : TailRegime::Regular;
}

/// int_{|y|>=1} e^{Cy} mu(dy) < inf.
inline bool check_exponential_moments(const LevyMeasure& mu, double C) {
  if (mu.dyadic && C > 0.0) return false;
  for (const auto& p : mu.pieces) {
    if (!p.unbounded()) continue;
    const double rate = C * p.side();  // growth rate of e^{Cy} along the tail
    switch (p.family) {
      case PieceFamily::power:
        if (rate > 0.0) return false;
        break;
      case PieceFamily::exp_tilted_power:
        if (rate > p.theta || (rate == p.theta && p.alpha <= 0.0)) return false;
        break;
      case PieceFamily::gaussian_tail:
        break;
    }
  }
  return true;
}

/// M_k(xi) = int u^k e^{xi u} mu(du).
inline double exp_moment_Mk(const LevyMeasure& mu, int k, double xi, const MeasureTolerance& tol = {}) {
  if (k < 2) throw DomainError("exp_moment_Mk requires k >= 2");
  if (!check_exponential_moments(mu, xi)) throw DivergenceError("exp_moment_Mk: exponential moment is infinite");
  const double inf = detail::kInf;
  Growth gr{static_cast<double>(k), static_cast<double>(k), xi};
  auto g = [k, xi](double u) { return std::pow(u, k) * std::exp(xi * u); };
  return integrate_measure(mu, g, -inf, inf, gr, tol).value;
}

struct GrowthRow {
  double xi;
  double ratio3;  // M_4(xi) / M_2(gamma xi)^2
  double ratio4;  // (ln(M_4/M_2 v 1) + ln ln M_2) / xi
};

struct GrowthTrend {
  std::vector<GrowthRow> rows;
  bool cond3_decreasing = false;
  bool cond4_decreasing = false;
};

/// The long-memory growth conditions M_4(xi) << M_2(gamma xi)^2 and
/// ln(M_4/M_2 v 1) + ln ln M_2 << xi along an increasing xi grid. Only the
/// trend is reported: a finite grid cannot certify either limit.
inline GrowthTrend growth_conditions(const LevyMeasure& mu, double gamma, std::span<const double> xi_grid) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("growth_conditions requires gamma in (0, 1)");
  GrowthTrend out;
  for (double xi : xi_grid) {
    const double m2 = exp_moment_Mk(mu, 2, xi), m4 = exp_moment_Mk(mu, 4, xi);
    const double m2g = exp_moment_Mk(mu, 2, gamma * xi);
    const double lnln = m2 > std::exp(1.0) ? std::log(std::log(m2)) : 0.0;
    out.rows.push_back({xi, m4 / (m2g * m2g), (std::log(std::max(m4 / m2, 1.0)) + lnln) / xi});
  }
  out.cond3_decreasing = out.cond4_decreasing = out.rows.size() >= 2;
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    out.cond3_decreasing = out.cond3_decreasing && out.rows[i].ratio3 < out.rows[i - 1].ratio3;
    out.cond4_decreasing = out.cond4_decreasing && out.rows[i].ratio4 < out.rows[i - 1].ratio4;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Existence integrals I1, I2 of the stochastic integral

struct ConditionTerm {
  double value = 0.0;
  bool finite = true;
};

struct IntegralConditionsReport {
  // I1 split by s <= -1 / s > -1 and |u f| <= 1 / > 1
  ConditionTerm I11, I12, I13, I14, I1;
  ConditionTerm I2;
  double growth_exponent = 0.0;  // numerical d ln(I13-integrand)/d ln|x| at large |x|
};

namespace detail {

/// Kernel pieces of I1 for a single jump size x:
/// [0] s<=-1,|xf|<=1  [1] s>-1,|xf|<=1  [2] s<=-1,|xf|>1  [3] s>-1,|xf|>1.
inline std::array<double, 4> i1_pieces(const Kernel& k, double x) {
  std::array<double, 4> out{};
  const double ax = std::abs(x);
  const double c = 1.0 / ax;  // |f| threshold
  const QuadOptions opt{1e-14, 1e-10, 2000};
  auto sq = [ax](double y) { return std::min(1.0, y * y * ax * ax); };
  // negative branch, u = -s: u in (0,1) is s in (-1,0); u >= 1 is s <= -1.
  const double F1 = k.neg_f(1.0);
  const double inf = kInf;
  // y-ranges for u >= 1 and u < 1
  double far_lo, far_hi, near_lo, near_hi;
  if (k.short_memory()) {
    far_lo = F1, far_hi = 0.0, near_lo = -inf, near_hi = F1;
  } else {
    far_lo = 0.0, far_hi = F1, near_lo = F1, near_hi = k.inv_gamma();
  }
  auto split = [&](Branch b, double lo, double hi, double& small, double& big) {
    // |y| <= c versus |y| > c, restricted to [lo, hi]
    const double slo = std::max(lo, -c), shi = std::min(hi, c);
    if (shi > slo) small += branch_quad(k, b, slo, shi, sq, opt, BranchGrowth{0.0, 2.0}).value;
    if (lo < -c) big += branch_quad(k, b, lo, std::min(hi, -c), sq, opt, BranchGrowth{0.0, 2.0}).value;
    if (hi > c) big += branch_quad(k, b, std::max(lo, c), hi, sq, opt, BranchGrowth{0.0, 2.0}).value;
  };
  split(Branch::negative, far_lo, far_hi, out[0], out[2]);
  split(Branch::negative, near_lo, near_hi, out[1], out[3]);
  const auto [plo, phi] = branch_range(k, Branch::positive);
  split(Branch::positive, plo, phi, out[1], out[3]);
  return out;
}

inline double tau_trunc(double x) { return std::abs(x) <= 1.0 ? x : (x > 0.0 ? 1.0 : -1.0); }

}  // namespace detail

inline IntegralConditionsReport check_integral_conditions(const LevyMeasure& mu, double H) {
  if (mu.empty()) throw DomainError("check_integral_conditions: mu = 0 violates mu(R) > 0");
  const Kernel k(H);
  IntegralConditionsReport rep;
  const double inf = detail::kInf;

  // growth of the far piece of the x-kernel, estimated numerically
  {
    const double x1 = 1e6, x2 = 4e6;
    const double g1v = detail::i1_pieces(k, x1)[2] + detail::i1_pieces(k, x1)[0];
    const double g2v = detail::i1_pieces(k, x2)[2] + detail::i1_pieces(k, x2)[0];
    rep.growth_exponent = std::log(g2v / g1v) / std::log(x2 / x1);
  }
  const double e = rep.growth_exponent;
  bool finite = true;
  for (const auto& p : mu.pieces)
    if (p.unbounded() && p.tail().index <= e + 1e-3) finite = false;
  if (mu.dyadic) {
    // ratio test on the terms m_k * kernel(2^k)
    const int k1 = 40;
    auto term = [&](int kk) {
      const auto v = detail::i1_pieces(k, std::exp2(kk));
      return mu.dyadic->mass(kk) * (v[0] + v[1] + v[2] + v[3]);
    };
    if (!(term(k1 + 1) / term(k1) < 1.0 - 1e-3)) finite = false;
  }

  if (finite) {
    std::array<double, 4> acc{};
    for (int j = 0; j < 4; ++j) {
      auto g = [&](double x) { return detail::i1_pieces(k, x)[static_cast<std::size_t>(j)]; };
      acc[static_cast<std::size_t>(j)] =
          integrate_measure(mu, g, -inf, inf, Growth{e, 2.0, 0.0}, MeasureTolerance{1e-9, 1e-6}).value;
    }
    rep.I11 = {acc[0], true};
    rep.I12 = {acc[1], true};
    rep.I13 = {acc[2], true};
    rep.I14 = {acc[3], true};
    rep.I1 = {acc[0] + acc[1] + acc[2] + acc[3], true};
  } else {
    // the far pieces carry the divergence (s -> -infinity with |x f| > 1)
    rep.I11 = {inf, false};
    rep.I13 = {inf, false};
    rep.I12 = {0.0, true};
    rep.I14 = {0.0, true};
    rep.I1 = {inf, false};
  }

  // I2 = int ds | int (tau(f x) - f tau(x)) mu(dx) |, truncated to s >= -R
  // and tested for growth under doubling of R.
  const auto atoms = mu.all_atoms();
  auto A = [&](double y) {
    double acc = 0.0;
    for (const auto& a : atoms) acc += a.mass * (detail::tau_trunc(y * a.location) - y * detail::tau_trunc(a.location));
    if (!mu.pieces.empty()) {
      auto g = [y](double x) { return detail::tau_trunc(y * x) - y * detail::tau_trunc(x); };
      LevyMeasure pm;
      pm.pieces = mu.pieces;
      acc += integrate_measure(pm, g, -inf, inf, Growth{0.0, 2.0, 0.0}, MeasureTolerance{1e-10, 1e-7}).value;
    }
    return std::abs(acc);
  };
  const QuadOptions opt{1e-12, 1e-8, 3000};
  const auto [plo, phi] = branch_range(k, Branch::positive);
  const double pos = branch_quad(k, Branch::positive, plo, phi, A, opt, BranchGrowth{1.0, 1.0}).value;
  auto partial = [&](double R) {
    // negative branch restricted to u <= R
    const double yR = k.neg_f(R);
    const double lo = k.short_memory() ? -inf : yR;
    const double hi = k.short_memory() ? yR : k.inv_gamma();
    return pos + branch_quad(k, Branch::negative, lo, hi, A, opt, BranchGrowth{1.0, 1.0}).value;
  };
  // doubling of R: divergent after three successive >1% increases
  double R = 16.0, prev = partial(R);
  int growing = 0;
  rep.I2 = {prev, true};
  for (int j = 0; j < 60; ++j) {
    R *= 2.0;
    const double cur = partial(R);
    const double rel = std::abs(cur - prev) / std::max(std::abs(prev), 1e-300);
    rep.I2.value = cur;
    prev = cur;
    if (rel > 0.01) {
      if (++growing >= 3) {
        rep.I2 = {inf, false};
        break;
      }
    } else {
      growing = 0;
      if (rel < 1e-9) break;
    }
  }
  return rep;
}

}  // namespace flm
