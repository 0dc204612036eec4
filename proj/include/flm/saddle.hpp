#pragma once

// Saddle point on the imaginary axis.
//
// kappa(zeta) = Psi(1, i zeta), the log moment generating function of the
// part governed by the saddle point: the full Z_1 for H > 1/2, the part
// truncated to {u f <= lambda} for H < 1/2. Its derivatives
//   M_k(zeta) = kappa^{(k)}(zeta)
// scale as M_k(t, xi) = chi^k t M_k(chi xi), chi = t^{H-1/2}. The critical
// point solves M_1(t, xi) = x, i.e. xi(t,x) = zeta(x t^{-H-1/2}) / chi.
//
// Two routes evaluate M_k: direct double integrals over the kernel branches,
// and one-dimensional integrals against the image measure N of mu under
// u -> f(s) u (H < 1/2), whose density on r > 0 is the profile m(r).

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "flm/branch.hpp"
#include "flm/charfn.hpp"
#include "flm/error.hpp"
#include "flm/levy_measure.hpp"
#include "flm/quadrature.hpp"

namespace flm {

enum class MkRoute { automatic, direct, image };

namespace detail {

/// e^x - 1 - x without cancellation.
inline double expm1mx(double x) {
  if (std::abs(x) < 0.1) {
    double term = x * x / 2.0, sum = term;
    for (int n = 3; n < 20; ++n) {
      term *= x / n;
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::expm1(x) - x;
}

/// The k-th zeta-derivative integrand of e^{zeta r} - 1 - zeta r c.
inline double axis_integrand(int k, double zeta, double r, double c) {
  if (k == 0) return expm1mx(zeta * r) + zeta * r * (1.0 - c);
  if (k == 1) return r * (std::expm1(zeta * r) + (1.0 - c));
  return std::pow(r, k) * std::exp(zeta * r);
}

inline void require_saddle_regime(const Model& m) {
  if (m.kernel().short_memory()) return;
  if (!check_exponential_moments(m.mu(), 1.0))
    throw DivergenceError("the saddle point for H > 1/2 needs exponential moments of mu");
}

}  // namespace detail

/// x_C = int int_{C} u f(s) 1{|u|>1} mu(du) ds at t = 1; -infinity when the
/// first moment of mu beyond |u| > 1 diverges.
inline double x_lower_bound(const Model& m) {
  if (!m.kernel().short_memory()) return 0.0;  // fully compensated
  const auto mr = moment_integral(m.mu(), 1.0, Region::outer);
  if (mr.infinite()) return -std::numeric_limits<double>::infinity();
  // int over C equals minus the complement integral since int f ds = 0
  return m.over_mu([&](double u) { return std::abs(u) > 1.0 ? -u * m.complement_integral_f(u) : 0.0; },
                   Growth{1.0, 0.0, 0.0});
}

/// M_k(zeta) at t = 1 by direct integration over the kernel branches
/// (k = 0 gives kappa itself).
inline double mk_direct(const Model& m, int k, double zeta) {
  if (k < 0) throw DomainError("m_k requires k >= 0");
  detail::require_saddle_regime(m);
  const auto& kn = m.kernel();
  const QuadOptions opt{1e-300, 1e-12, 8000};
  const double inf = detail::kInf;
  const double pm1 = kn.short_memory() ? 2.0 / (1.0 - 2.0 * m.H()) : inf;
  const BranchGrowth gr{std::min(static_cast<double>(std::max(k, 1)), pm1 - 0.5), static_cast<double>(std::max(k, 2))};
  auto per_u = [&](double u) {
    const double c = detail::compensator(m, u);
    auto h = [&](double y) { return detail::axis_integrand(k, zeta, y * u, c); };
    if (kn.short_memory()) {
      const auto r = m.truncated_ranges(u);
      return branch_quad(kn, Branch::positive, r.p_lo, r.p_hi, h, opt, gr).value +
             branch_quad(kn, Branch::negative, r.n_lo, r.n_hi, h, opt, gr).value;
    }
    return branch_quad(kn, Branch::positive, -inf, inf, h, opt, gr).value +
           branch_quad(kn, Branch::negative, -inf, inf, h, opt, gr).value;
  };
  const double kd = static_cast<double>(k);
  return m.over_mu(per_u, Growth{std::max(kd, 1.0), std::max(kd, 2.0), kn.short_memory() ? 0.0 : zeta},
                   MeasureTolerance{1e-300, 1e-11});
}

/// Density of the image measure N at r != 0 (H < 1/2).
inline double image_density(const Model& m, double r) {
  detail::require_short(m, "image_density");
  if (r > 0.0) return mathfrak_m(m, r);
  if (r < 0.0) {
    // mirror: N(-dr) is the image of the reflected measure
    double out = 0.0;
    const auto& k = m.kernel();
    for (const auto& a : m.mu().all_atoms()) out += a.mass * m_unit(k, -r, -a.location);
    if (!m.mu().pieces.empty()) {
      LevyMeasure rm;
      rm.pieces = m.mu().reflected().pieces;
      const Model mm(rm, m.H(), m.lambda());
      out += mathfrak_m(mm, -r);
    }
    return out;
  }
  throw DomainError("image_density is singular at r = 0");
}

/// M_k(zeta) at t = 1 through the image measure:
///   k >= 2: int_{-inf}^{lambda} r^k e^{zeta r} N(dr)
///   k = 1:  int r (e^{zeta r} - 1) N(dr) + x_C
///   k = 0:  int (e^{zeta r} - 1 - zeta r) N(dr) + zeta x_C
inline double mk_image(const Model& m, int k, double zeta) {
  detail::require_short(m, "mk_image");
  if (k < 0) throw DomainError("m_k requires k >= 0");
  const double lam = m.lambda();
  const double q = m.kernel().origin_exponent();
  const QuadOptions opt{1e-300, 1e-12, 8000};
  auto body = [&](double r) { return detail::axis_integrand(k, zeta, r, 1.0) * image_density(m, r); };
  // integrand in v = ln|r| behaves like |r|^{e} near 0
  const double e = (k <= 1 ? 2.0 : k) + 1.0 - q;
  const double v0 = -46.0 / e;
  std::vector<double> jumps_pos, jumps_neg;
  for (const auto& a : m.mu().all_atoms()) {
    const double j = std::log(std::abs(a.location) * m.kernel().inv_gamma());
    (a.location > 0.0 ? jumps_pos : jumps_neg).push_back(j);
  }
  auto run = [&](double sign, double va, double vb, const std::vector<double>& jumps) {
    if (!(vb > va)) return 0.0;
    std::vector<double> pts = detail::tau_breaks(va, vb, 0.5);
    for (double j : jumps)
      if (j > va && j < vb) pts.push_back(j);
    std::sort(pts.begin(), pts.end());
    auto f = [&](double v) {
      const double r = sign * std::exp(v);
      return body(r) * std::abs(r);
    };
    return integrate(f, std::span<const double>(pts), opt).value;
  };
  // r in (0, lambda]
  double total = run(1.0, v0, std::log(lam), jumps_pos);
  // r < 0: walk out until the integrand is negligible
  {
    auto w = [&](double v) { return std::abs(body(-std::exp(v))) * std::exp(v); };
    double peak = 0.0, hi = 0.0;
    for (int j = 0; j < 4000; ++j) {
      const double v = v0 + 0.5 * j;
      const double val = w(v);
      if (std::isfinite(val)) peak = std::max(peak, val);
      hi = v;
      if (v > 2.0 && val < 1e-18 * peak) break;
    }
    total += run(-1.0, v0, hi, jumps_neg);
  }
  const double xc = x_lower_bound(m);
  if (k == 1) total += xc;
  if (k == 0) total += zeta * xc;
  return total;
}

/// M_k(zeta) at t = 1.
inline double mk_unit(const Model& m, int k, double zeta, MkRoute route = MkRoute::automatic) {
  if (route == MkRoute::automatic) route = m.kernel().short_memory() ? MkRoute::image : MkRoute::direct;
  return route == MkRoute::image ? mk_image(m, k, zeta) : mk_direct(m, k, zeta);
}

/// M_k(t, xi) = chi^k t M_k(chi xi).
inline double m_k(const Model& m, double t, int k, double xi, MkRoute route = MkRoute::automatic) {
  if (!(t > 0.0)) throw DomainError("m_k requires t > 0");
  if (k < 1) throw DomainError("m_k requires k >= 1");
  const double chi = m.chi(t);
  return std::pow(chi, k) * t * mk_unit(m, k, chi * xi, route);
}

struct SaddleResult {
  double xi = 0.0;        // critical point xi(t,x)
  double D = 0.0;         // H(t, x, i xi)
  double K = 0.0;         // M_2(t, xi)
  double residual = 0.0;  // |dH/dxi| at xi
  double x_t = 0.0;       // lower end of the admissible x (may be -inf)
  double zeta = 0.0;      // xi at t = 1 for the rescaled x
  int iterations = 0;
};

/// x_t at time t: t^{H+1/2} x_1.
inline double x_t_bound(const Model& m, double t) {
  const double x1 = x_lower_bound(m);
  return std::isinf(x1) ? x1 : std::pow(t, m.H() + 0.5) * x1;
}

/// Unique root of M_1(t, xi) = x on (0, infinity).
inline SaddleResult solve_saddle(const Model& m, double t, double x, MkRoute route = MkRoute::automatic,
                                 double xi_start = 1.0) {
  if (!(t > 0.0)) throw DomainError("solve_saddle requires t > 0");
  detail::require_saddle_regime(m);
  SaddleResult res;
  res.x_t = x_t_bound(m, t);
  if (!(x > res.x_t)) throw DomainError("solve_saddle: x must exceed x_t = " + std::to_string(res.x_t));
  const double th = std::pow(t, m.H() + 0.5);
  const double y = x / th;
  auto g = [&](double z) { return mk_unit(m, 1, z, route) - y; };
  // bracket: double the upper end until the derivative is positive
  double lo = 0.0, hi = xi_start * m.chi(t);
  int guard = 0;
  while (g(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 200) throw ConvergenceError("solve_saddle: bracket expansion failed");
  }
  while (lo > 0.0 && g(lo) > 0.0) {
    hi = lo;
    lo *= 0.5;
    if (++guard > 400 || lo < 1e-300) {
      lo = 0.0;
      break;
    }
  }
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
    ++res.iterations;
  }
  double z = 0.5 * (lo + hi);
  double r = g(z);
  for (int it = 0; it < 3; ++it) {
    const double zn = z - r / mk_unit(m, 2, z, route);
    if (!(zn > 0.0)) break;
    const double rn = g(zn);
    if (!(std::abs(rn) < std::abs(r))) break;
    z = zn;
    r = rn;
    ++res.iterations;
  }
  const double chi = m.chi(t);
  res.zeta = z;
  res.xi = z / chi;
  res.residual = std::abs(r) * th;
  res.D = t * (-z * y + mk_unit(m, 0, z, route));
  res.K = chi * chi * t * mk_unit(m, 2, z, route);
  return res;
}

struct SaddleRow {
  double x;
  bool admissible;
  double zeta;
  double D_ratio;   // D(x) / (-x ln x / lambda)
  double M2_ratio;  // M_2(zeta(x)) / (lambda x)
  double zeta_ratio;  // zeta(x) lambda / ln x
};

/// Ratios of the t = 1 saddle quantities to their large-x asymptotes
/// (truncated case).
inline std::vector<SaddleRow> saddle_asymptote_check(const Model& m, std::span<const double> x_grid) {
  detail::require_short(m, "saddle_asymptote_check");
  std::vector<SaddleRow> rows;
  const double lam = m.lambda();
  const double xt = x_lower_bound(m);
  double start = 1.0;
  for (double x : x_grid) {
    SaddleRow row{x, x > xt && x > 1.0, 0.0, 0.0, 0.0, 0.0};
    if (row.admissible) {
      const auto s = solve_saddle(m, 1.0, x, MkRoute::automatic, start);
      start = s.zeta;
      const double lx = std::log(x);
      row.zeta = s.zeta;
      row.D_ratio = s.D / (-x * lx / lam);
      row.M2_ratio = s.K / (lam * x);
      row.zeta_ratio = s.zeta * lam / lx;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace flm
