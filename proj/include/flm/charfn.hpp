#pragma once

// Characteristic exponent of Z_t^H and the pieces of its truncated split.
//
//   Psi(t,z) = int ds int mu(du) (e^{-i z f(t,s) u} - 1 + i z f(t,s) u 1{|u|<=1})
//   phi(t,z) = E e^{i z Z_t} = exp Psi(t,-z)
//
// For H < 1/2 and a level lambda > 0 the jumps with u f(s/t) > lambda are
// split off:
//   psi1 integrates over {u f(s/t) <= lambda}  (log phi1, infinitely divisible)
//   psi2 = compound Poisson part over the complement - i z a(t)
// and everything scales as  g(t,z) = t g(1, t^{H-1/2} z).
//
// The big-jump intensity M_t has density
//   m_t(x) = t^{3/2-H} m(t^{1/2-H} x) 1{x > lambda t^{H-1/2}},
//   m(r)   = int (1/u) ell(r/u) mu(du).

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flm/branch.hpp"
#include "flm/error.hpp"
#include "flm/kernel.hpp"
#include "flm/levy_measure.hpp"
#include "flm/quadrature.hpp"

namespace flm {

/// y-ranges on the two branches, [p_lo, p_hi] and [n_lo, n_hi].
struct BranchRanges {
  double p_lo, p_hi, n_lo, n_hi;
};

class Model {
 public:
  /// lambda defaults to 1/Gamma(H+1/2). The truncation level is only used
  /// when H < 1/2.
  Model(LevyMeasure mu, double H, std::optional<double> lambda = {}) : mu_(std::move(mu)), k_(H) {
    mu_.validate();
    if (mu_.empty()) throw DomainError("Levy measure is zero; mu(R) > 0 is required");
    lambda_ = lambda.value_or(k_.inv_gamma());
    if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) throw DomainError("truncation level lambda must be positive");
    if (!check_existence(mu_, H)) throw DivergenceError("the stochastic integral does not exist for this measure and H");
    if (k_.short_memory()) {
      Lambda_ = over_mu([&](double u) { return complement_length(u); }, Growth{2.0 / (3.0 - 2.0 * H), 2.0 / (1.0 - 2.0 * H), 0.0});
      a1_ = over_mu([&](double u) { return std::abs(u) <= 1.0 ? u * complement_integral_f(u) : 0.0; },
                    Growth{0.0, 1.0 + 2.0 / (1.0 - 2.0 * H), 0.0});
    }
  }

  const LevyMeasure& mu() const { return mu_; }
  const Kernel& kernel() const { return k_; }
  double H() const { return k_.H(); }
  double lambda() const { return lambda_; }
  /// M_1(R); zero for H > 1/2 (no truncation).
  double Lambda() const { return Lambda_; }
  double a1() const { return a1_; }
  double a(double t) const { return std::pow(t, k_.H() + 0.5) * a1_; }
  double chi(double t) const { return std::pow(t, k_.beta()); }

  /// Branch ranges of {u f <= lambda} for jump u (H < 1/2).
  BranchRanges truncated_ranges(double u) const {
    const double inf = detail::kInf;
    if (u > 0.0) return {k_.inv_gamma(), lambda_ / u, -inf, 0.0};
    return {k_.inv_gamma(), inf, -lambda_ / std::abs(u), 0.0};
  }

  /// Branch ranges of {u f > lambda}; empty ranges have lo >= hi.
  BranchRanges complement_ranges(double u) const {
    const double inf = detail::kInf;
    if (u > 0.0) return {std::max(lambda_ / u, k_.inv_gamma()), inf, 0.0, 0.0};
    return {0.0, 0.0, -inf, -lambda_ / std::abs(u)};
  }

  /// Lebesgue measure of {s : u f(s) > lambda}.
  double complement_length(double u) const {
    if (u > 0.0) return k_.pos_v(std::max(lambda_ / u, k_.inv_gamma()));
    return k_.neg_inverse(-lambda_ / std::abs(u));
  }

  /// int_{u f(s) > lambda} f(s) ds.
  double complement_integral_f(double u) const {
    const double b1 = k_.beta() + 1.0;
    if (u > 0.0) return std::pow(complement_length(u), b1) / (b1 * k_.gamma_const());
    const double us = complement_length(u);
    return k_.neg_f_antiderivative(us) - k_.neg_f_antiderivative(0.0);
  }

  /// int g(u) mu(du) over the whole measure.
  template <typename G>
  auto over_mu(G&& g, const Growth& gr, const MeasureTolerance& tol = {1e-12, 1e-10}) const
      -> std::decay_t<decltype(g(1.0))> {
    const double inf = detail::kInf;
    return integrate_measure(mu_, std::forward<G>(g), -inf, inf, gr, tol).value;
  }

 private:
  LevyMeasure mu_;
  Kernel k_;
  double lambda_ = 0.0;
  double Lambda_ = 0.0;
  double a1_ = 0.0;
};

namespace detail {

inline void require_short(const Model& m, const char* what) {
  if (!m.kernel().short_memory()) throw RegimeError(std::string(what) + " requires H < 1/2");
}

inline double compensator(const Model& m, double u) {
  // full compensation for H > 1/2 (the indicator version diverges there)
  return (!m.kernel().short_memory() || std::abs(u) <= 1.0) ? 1.0 : 0.0;
}

/// Growth of |K(z u)| in u for the measure quadratures.
inline Growth exponent_growth(const Kernel& k) { return Growth{2.0 / (3.0 - 2.0 * k.H()), 2.0, 0.0}; }

}  // namespace detail

/// Psi(1, z) per unit mass of a jump u.
inline cplx psi_unit(const Model& m, cplx z, double u) {
  const auto& k = m.kernel();
  const cplx W = z * u;
  const double c = detail::compensator(m, u);
  const double inf = detail::kInf;
  return exp_branch_integral(k, Branch::positive, W, c, -inf, inf) +
         exp_branch_integral(k, Branch::negative, W, c, -inf, inf);
}

/// Psi(t, z). For H < 1/2 z must be real; for H > 1/2 any z with the
/// relevant exponential moments.
inline cplx psi(const Model& m, double t, cplx z) {
  if (!(t > 0.0)) throw DomainError("psi requires t > 0");
  if (z == cplx(0.0)) return 0.0;
  const cplx zs = z * m.chi(t);
  if (m.kernel().short_memory() && z.imag() == 0.0 && (!m.mu().pieces.empty() || m.mu().dyadic)) {
    // continuous or long atom lists: tabulated per-jump kernel
    const auto& K = KernelExpTable::get(m.H());
    const auto g = [&](double u) { return K(zs.real() * u); };
    return t * m.over_mu(g, detail::exponent_growth(m.kernel()), MeasureTolerance{1e-11, 1e-9});
  }
  const auto g = [&](double u) { return psi_unit(m, zs, u); };
  return t * m.over_mu(g, detail::exponent_growth(m.kernel()), MeasureTolerance{1e-11, 1e-9});
}

inline cplx psi(const Model& m, double t, double z) { return psi(m, t, cplx(z, 0.0)); }

/// log phi(t, z) = Psi(t, -z).
inline cplx log_phi(const Model& m, double t, cplx z) { return psi(m, t, -z); }

/// psi1(1, z) per unit mass of a jump u.
inline cplx psi1_unit(const Model& m, cplx z, double u) {
  const auto& k = m.kernel();
  const auto r = m.truncated_ranges(u);
  const cplx W = -z * u;
  const double c = std::abs(u) <= 1.0 ? 1.0 : 0.0;
  return exp_branch_integral(k, Branch::positive, W, c, r.p_lo, r.p_hi) +
         exp_branch_integral(k, Branch::negative, W, c, r.n_lo, r.n_hi);
}

/// psi1(t, z) = log phi1(t, z). Complex z = w - i xi with xi >= 0 is allowed
/// (the truncated part has all exponential moments on that side).
inline cplx psi1(const Model& m, double t, cplx z) {
  detail::require_short(m, "psi1");
  if (!(t > 0.0)) throw DomainError("psi1 requires t > 0");
  if (z == cplx(0.0)) return 0.0;
  const cplx zs = z * m.chi(t);
  const auto g = [&](double u) { return psi1_unit(m, zs, u); };
  const double p = 2.0 / (1.0 - 2.0 * m.H());
  return t * m.over_mu(g, Growth{2.0 / (3.0 - 2.0 * m.H()), std::min(2.0, p), 0.0}, MeasureTolerance{1e-11, 1e-9});
}

/// Compound Poisson part of psi2(1, z) per unit mass of a jump u:
/// int_{u f > lambda} (e^{i z f u} - 1) ds.
inline cplx psi2_cp_unit(const Model& m, cplx z, double u) {
  const auto& k = m.kernel();
  const auto r = m.complement_ranges(u);
  const cplx W = -z * u;
  return exp_branch_integral(k, Branch::positive, W, 0.0, r.p_lo, r.p_hi) +
         exp_branch_integral(k, Branch::negative, W, 0.0, r.n_lo, r.n_hi);
}

/// psi2(t, z) = int_{u f(s/t) > lambda} (e^{i z f(t,s) u} - 1) mu(du) ds - i z a(t).
inline cplx psi2(const Model& m, double t, double z) {
  detail::require_short(m, "psi2");
  if (!(t > 0.0)) throw DomainError("psi2 requires t > 0");
  if (z == 0.0) return 0.0;
  const double zs = z * m.chi(t);
  const auto g = [&](double u) { return psi2_cp_unit(m, cplx(zs, 0.0), u); };
  const cplx cp = t * m.over_mu(g, Growth{2.0 / (3.0 - 2.0 * m.H()), 2.0 / (1.0 - 2.0 * m.H()), 0.0},
                                MeasureTolerance{1e-11, 1e-9});
  return cp - cplx(0.0, z * m.a(t));
}

struct PsiSplit {
  cplx psi1;
  cplx psi2;
};

inline PsiSplit psi_split(const Model& m, double t, double z) { return {psi1(m, t, cplx(z, 0.0)), psi2(m, t, z)}; }

// ---------------------------------------------------------------------------
// Big-jump intensity

/// (1/u) ell(r/u) for a single jump u.
inline double m_unit(const Kernel& k, double r, double u) { return k.ell(r / u) / u; }

struct ProfileSplit {
  double minus;  // contribution of u < 0
  double plus;   // contribution of u > 0
  double total() const { return minus + plus; }
};

/// m(r) split by the sign of the jump.
inline ProfileSplit mathfrak_m_split(const Model& m, double r) {
  detail::require_short(m, "mathfrak_m");
  if (!(r > 0.0)) throw DomainError("mathfrak_m requires r > 0");
  const auto& k = m.kernel();
  ProfileSplit out{0.0, 0.0};
  for (const auto& a : m.mu().all_atoms()) (a.location > 0.0 ? out.plus : out.minus) += a.mass * m_unit(k, r, a.location);
  if (m.mu().pieces.empty()) return out;

  LevyMeasure pm;
  pm.pieces = m.mu().pieces;
  const double q = 2.0 / (3.0 - 2.0 * m.H());  // u^{q} growth as u -> -inf (ell near 0-)
  const double p = 2.0 / (1.0 - 2.0 * m.H());  // u^{p} decay as u -> 0
  const MeasureTolerance tol{1e-300, 1e-10};
  auto g = [&](double u) { return m_unit(k, r, u); };
  // u > 0: ell(r/u) vanishes for u > r Gamma(H+1/2)
  out.plus += integrate_measure(pm, g, 0.0, r * k.gamma_const(), Growth{0.0, p, 0.0}, tol).value;
  // u < 0: inner |u| < r/1e3, middle, outer |u| > 1e3 r, where the two lines
  // of the ell asymptotics take over
  const double inf = detail::kInf;
  const std::array<double, 4> cuts{-inf, -1e3 * r, -1e-3 * r, 0.0};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    out.minus += integrate_measure(pm, g, cuts[i], cuts[i + 1], Growth{q, p, 0.0}, tol).value;
  return out;
}

inline double mathfrak_m(const Model& m, double r) { return mathfrak_m_split(m, r).total(); }

/// m_t(x) = t^{3/2-H} m(t^{1/2-H} x) 1{x > lambda t^{H-1/2}}.
inline double m_t_density(const Model& m, double t, double x) {
  detail::require_short(m, "m_t_density");
  if (!(t > 0.0)) throw DomainError("m_t_density requires t > 0");
  if (!(x > m.lambda() * m.chi(t))) return 0.0;
  return std::pow(t, 1.5 - m.H()) * mathfrak_m(m, x / m.chi(t));
}

/// Points r where m has a jump (r = u / Gamma for positive atoms u).
inline std::vector<double> profile_jumps(const Model& m) {
  std::vector<double> out;
  for (const auto& a : m.mu().all_atoms())
    if (a.location > 0.0) out.push_back(a.location * m.kernel().inv_gamma());
  std::sort(out.begin(), out.end());
  return out;
}

/// int g(x) m_t(x) dx = t int_lambda^inf g(t^{H-1/2} r) m(r) dr, in log r.
template <typename G>
double integrate_m_t(const Model& m, double t, G&& g, const QuadOptions& opt = {1e-300, 1e-11, 8000}) {
  detail::require_short(m, "integrate_m_t");
  const double chi = m.chi(t);
  const double lo = std::log(m.lambda());
  auto w = [&](double v) { return std::exp(v) * mathfrak_m(m, std::exp(v)); };
  // upper end: walk out until r m(r) has dropped 1e-17 below its maximum
  double peak = w(lo), hi = lo;
  for (int j = 1; j < 4000; ++j) {
    const double v = lo + 0.5 * j;
    const double e = w(v);
    peak = std::max(peak, e);
    hi = v;
    if (e < 1e-17 * peak && j > 4) break;
  }
  std::vector<double> pts = detail::tau_breaks(lo, hi, 0.5);
  for (double r : profile_jumps(m)) {
    const double v = std::log(r);
    if (v > lo && v < hi) pts.push_back(v);
  }
  std::sort(pts.begin(), pts.end());
  auto f = [&](double v) {
    const double r = std::exp(v);
    return g(chi * r) * mathfrak_m(m, r) * r;
  };
  return t * integrate(f, std::span<const double>(pts), opt).value;
}

/// int g dM_t evaluated directly as the double integral over {u f(s/t) > lambda}.
template <typename G>
double pushforward_oracle(const Model& m, double t, G&& g) {
  detail::require_short(m, "pushforward_oracle");
  const auto& k = m.kernel();
  const double chi = m.chi(t);
  const QuadOptions opt{1e-300, 1e-11, 8000};
  auto per_u = [&](double u) {
    const auto r = m.complement_ranges(u);
    auto h = [&](double y) { return g(chi * y * u); };
    const BranchGrowth gr{0.0, 0.0};
    return branch_quad(k, Branch::positive, r.p_lo, r.p_hi, h, opt, gr).value +
           branch_quad(k, Branch::negative, r.n_lo, r.n_hi, h, opt, gr).value;
  };
  return t * m.over_mu(per_u, Growth{2.0 / (3.0 - 2.0 * m.H()), 2.0 / (1.0 - 2.0 * m.H()), 0.0});
}

// ---------------------------------------------------------------------------
// Theta functional

/// Interval (lo, hi) of the real line; either end may be infinite.
struct Interval {
  double lo;
  double hi;
};

/// Theta(t, z, B) = int int_{f(t,s) u in B, u in C(t,s)} (1 - cos(f(t,s) z u)) mu(du) ds
/// with C(t,s) = {f(t,s) u <= lambda t^{H-1/2}} for H < 1/2 and R for H > 1/2.
inline double theta(const Model& m, double t, double z, Interval B) {
  if (!(t > 0.0)) throw DomainError("theta requires t > 0");
  if (z == 0.0) return 0.0;
  const auto& k = m.kernel();
  const double chi = m.chi(t);
  const double zs = z * chi;
  // the condition on r = y u in the scaled variable
  double rlo = B.lo / chi, rhi = B.hi / chi;
  if (k.short_memory()) rhi = std::min(rhi, m.lambda());
  if (!(rhi > rlo)) return 0.0;
  auto per_u = [&](double u) {
    const double ylo = u > 0.0 ? rlo / u : rhi / u;
    const double yhi = u > 0.0 ? rhi / u : rlo / u;
    const cplx W(zs * u, 0.0);
    const cplx e = exp_branch_integral(k, Branch::positive, W, 1.0, ylo, yhi) +
                   exp_branch_integral(k, Branch::negative, W, 1.0, ylo, yhi);
    return -e.real();
  };
  return t * m.over_mu(per_u, detail::exponent_growth(k));
}

/// Checks that |phi1(t,z)| z^2 decreases along z = 10, 100, ..., 10^4.
/// Throws SlowDecayError otherwise.
inline void validate_lambda(const Model& m, double t = 1.0) {
  detail::require_short(m, "validate_lambda");
  double prev = detail::kInf;
  for (double z = 10.0; z <= 1e4; z *= 10.0) {
    const double v = std::exp(psi1(m, t, cplx(z, 0.0)).real()) * z * z;
    if (!(v < prev)) throw SlowDecayError("|phi1(t,z)| z^2 does not decay; choose a smaller truncation level lambda");
    prev = v;
  }
}

}  // namespace flm
