#pragma once

// Integrals over the two monotone kernel branches.
//
// A branch integral is  int h(f(1,s)) ds  restricted to the s-set where
// f(1,s) lies in a y-interval. branch_quad handles smooth, non-oscillatory
// h; exp_branch_integral handles the Levy-Khintchine type integrand
//   e^{-iWy} - 1 + iWcy
// for complex W, using steepest-descent rotation of the y-contour near the
// kernel singularities (H < 1/2), where e^{-iWy} oscillates without bound.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "flm/cheb.hpp"
#include "flm/error.hpp"
#include "flm/kernel.hpp"
#include "flm/quadrature.hpp"

namespace flm {

enum class Branch { positive, negative };

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline cplx cexpm1(cplx x) {
  if (std::abs(x) < 0.5) {
    cplx term = x, sum = x;
    for (int n = 2; n < 30; ++n) {
      term *= x / static_cast<double>(n);
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::exp(x) - 1.0;
}

inline cplx clog1p(cplx x) {
  if (std::abs(x) < 0.25) {
    // log(1+x) = 2 atanh(x / (2 + x))
    const cplx q = x / (2.0 + x);
    const cplx q2 = q * q;
    cplx term = q, sum = q;
    for (int n = 3; n < 80; n += 2) {
      term *= q2;
      const cplx add = term / static_cast<double>(n);
      sum += add;
      if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return 2.0 * sum;
  }
  return std::log(1.0 + x);
}

/// e^{-i zeta} - 1 + i zeta without cancellation for small zeta.
inline cplx g1(cplx zeta) {
  if (std::abs(zeta) < 0.25) {
    const cplx x = cplx(0.0, -1.0) * zeta;
    cplx term = x * x / 2.0, sum = term;
    for (int n = 3; n < 30; ++n) {
      term *= x / static_cast<double>(n);
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::exp(cplx(0.0, -1.0) * zeta) - 1.0 + cplx(0.0, 1.0) * zeta;
}

inline double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

inline std::vector<double> tau_breaks(double a, double b, double width) {
  const int n = std::max(1, static_cast<int>(std::ceil((b - a) / width)));
  return uniform_breaks(a, b, std::min(n, 400));
}

}  // namespace detail

/// The y-range of a branch: (lo, hi).
inline std::pair<double, double> branch_range(const Kernel& k, Branch b) {
  if (k.short_memory()) {
    if (b == Branch::positive) return {k.inv_gamma(), detail::kInf};
    return {-detail::kInf, 0.0};
  }
  return {0.0, k.inv_gamma()};
}

/// Powers q with |h(y)| = O(|y|^q) as |y| -> infinity (kernel
/// singularities, H < 1/2) and as y -> 0 (s -> -infinity). They set where
/// the log-mapped integration variable is truncated.
struct BranchGrowth {
  double at_singularity = 2.0;
  double at_zero = 2.0;
};

/// int h(f(1,s)) ds over the s on branch `b` with f(1,s) in [ylo, yhi].
template <typename Fn>
auto branch_quad(const Kernel& k, Branch b, double ylo, double yhi, Fn&& h, const QuadOptions& opt = {},
                 BranchGrowth growth = {}) {
  using T = std::decay_t<decltype(h(1.0))>;
  QuadResult<T> zero;
  const auto [rlo, rhi] = branch_range(k, b);
  const double lo = std::max(ylo, rlo), hi = std::min(yhi, rhi);
  if (!(hi > lo)) return zero;
  const double beta = k.beta();

  if (b == Branch::positive) {
    if (k.short_memory()) {
      // y = e^tau, ds = w(y) dy
      const double rate = k.tail_exponent() - 1.0 - growth.at_singularity;
      double ta = std::log(lo), tb;
      if (std::isinf(hi)) {
        if (!(rate > 0.0)) throw DivergenceError("branch_quad: integrand does not decay on the positive branch");
        tb = ta + 46.0 / rate;
      } else {
        tb = std::log(hi);
      }
      auto g = [&](double tau) -> T {
        const double y = std::exp(tau);
        return h(y) * (k.pos_weight(y) * y);
      };
      const auto pts = detail::tau_breaks(ta, tb, 1.0);
      return integrate(g, std::span<const double>(pts), opt);
    }
    auto g = [&](double y) -> T { return h(y) * k.pos_weight(y); };
    const auto pts = uniform_breaks(lo, hi, 8);
    return integrate(g, std::span<const double>(pts), opt);
  }

  // negative branch in tau = ln u
  double ua, ub;
  if (k.short_memory()) {
    ua = std::isinf(lo) ? 0.0 : k.neg_inverse(lo);
    ub = hi >= 0.0 ? detail::kInf : k.neg_inverse(hi);
  } else {
    ua = hi >= k.inv_gamma() ? 0.0 : k.neg_inverse(hi);
    ub = lo <= 0.0 ? detail::kInf : k.neg_inverse(lo);
  }
  double ta;
  if (ua == 0.0) {
    // near u = 0: F ~ -u^beta / Gamma (H < 1/2) or F -> 1/Gamma (H > 1/2)
    const double r0 = k.short_memory() ? 1.0 + beta * growth.at_singularity : 1.0;
    if (!(r0 > 0.0)) throw DivergenceError("branch_quad: integrand not integrable at the kernel singularity");
    ta = -46.0 / r0;
  } else {
    ta = std::log(ua);
  }
  double tb;
  if (std::isinf(ub)) {
    const double rate = growth.at_zero * (1.0 - beta) - 1.0;
    if (!(rate > 0.0)) throw DivergenceError("branch_quad: integrand does not decay as s -> -infinity");
    tb = std::max(ta, 0.0) + 46.0 / rate;
  } else {
    tb = std::log(ub);
  }
  if (!(tb > ta)) return zero;
  auto g = [&](double tau) -> T {
    const double u = std::exp(tau);
    return h(k.neg_f(u)) * u;
  };
  const auto pts = detail::tau_breaks(ta, tb, 1.0);
  return integrate(g, std::span<const double>(pts), opt);
}

// ---------------------------------------------------------------------------
// Complex continuation of the negative branch (H < 1/2)

/// u(y) on the negative branch continued to complex y, with du/dy.
/// Works with l = log u so that u^beta stays on the branch continued from
/// the real axis.
class NegBranchContinuation {
 public:
  explicit NegBranchContinuation(const Kernel& k) : k_(k), beta_(k.beta()), gam_(k.gamma_const()) {}

  struct Point {
    cplx u;
    cplx dudy;
  };

  Point at(cplx y) const {
    cplx l = seed(y);
    if (!newton(y, l)) {
      // continuation from the real axis
      const double yr = std::min(y.real(), -1e-300);
      l = std::log(k_.neg_inverse(yr));
      const int steps = 64;
      for (int j = 1; j <= steps; ++j) {
        const cplx yj = cplx(yr, 0.0) + (y - cplx(yr, 0.0)) * (static_cast<double>(j) / steps);
        if (!newton(yj, l)) throw ConvergenceError("complex branch inversion failed");
      }
    }
    const cplx u = std::exp(l);
    return {u, u / dFdl(l)};
  }

  cplx F(cplx l) const {
    const cplx u = std::exp(l);
    const cplx ub = std::exp(beta_ * l);
    if (std::abs(u) > 1.0) return ub * detail::cexpm1(beta_ * detail::clog1p(1.0 / u)) / gam_;
    return (std::exp(beta_ * detail::clog1p(u)) - ub) / gam_;
  }

  cplx dFdl(cplx l) const {
    const cplx u = std::exp(l);
    const cplx ub = std::exp(beta_ * l);
    if (std::abs(u) > 1.0) return beta_ * ub * detail::cexpm1((beta_ - 1.0) * detail::clog1p(1.0 / u)) / gam_;
    return beta_ * (std::exp(l + (beta_ - 1.0) * detail::clog1p(u)) - ub) / gam_;
  }

 private:
  cplx seed(cplx y) const {
    if (std::abs(gam_ * y) >= 1.0) return std::log(1.0 - gam_ * y) / beta_;
    return std::log(gam_ * y / beta_) / (beta_ - 1.0);
  }

  bool newton(cplx y, cplx& l) const {
    const double scale = std::abs(y);
    for (int it = 0; it < 80; ++it) {
      const cplx r = F(l) - y;
      if (std::abs(r) <= 4e-16 * scale) return true;
      cplx step = r / dFdl(l);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return false;
      if (std::abs(step) > 1.0) step *= 1.0 / std::abs(step);
      l -= step;
      if (it > 5 && std::abs(step) < 1e-15 * std::max(1.0, std::abs(l))) {
        return std::abs(F(l) - y) <= 1e-13 * scale;
      }
    }
    return false;
  }

  const Kernel& k_;
  double beta_;
  double gam_;
};

// ---------------------------------------------------------------------------
// Oscillatory branch integrals

namespace detail {

/// R(Y) = int_Y^{Y + infinity d} e^{-iWy} g(y) dy along the steepest-descent
/// ray d = -i |W| / W.
template <typename G>
cplx steepest_ray(cplx W, double Y, G&& g, double scale, const QuadOptions& opt) {
  const double aw = std::abs(W);
  const cplx d = cplx(0.0, -1.0) * aw / W;
  auto integrand = [&](double tau) -> cplx { return std::exp(-aw * tau) * g(cplx(Y, 0.0) + tau * d); };
  const double first = 0.125 * std::min(scale, 1.0 / aw);
  const auto pts = geometric_breaks(0.0, 46.0 / aw, first, 2.0);
  const auto r = integrate(integrand, std::span<const double>(pts), opt);
  return d * std::exp(cplx(0.0, -1.0) * W * Y) * r.value;
}

inline QuadOptions tight() { return QuadOptions{1e-300, 1e-13, 6000}; }

}  // namespace detail

/// int over s on the positive branch with f in [ya, yb] (H < 1/2) of
/// e^{-iW f} - 1 + iWc f.
inline cplx exp_positive_segment(const Kernel& k, cplx W, double c, double ya, double yb) {
  if (!k.short_memory()) throw DomainError("exp_positive_segment requires H < 1/2");
  ya = std::max(ya, k.inv_gamma());
  if (!(yb > ya) || W == cplx(0.0)) return 0.0;
  const double beta = k.beta(), gam = k.gamma_const();
  const cplx iW = cplx(0.0, 1.0) * W;
  const double va = k.pos_v(ya);
  const double vb = std::isinf(yb) ? 0.0 : k.pos_v(yb);
  const double length = va - vb;
  const double first_moment = (std::pow(va, beta + 1.0) - std::pow(vb, beta + 1.0)) / ((beta + 1.0) * gam);
  const double aw = std::abs(W);
  const cplx d = cplx(0.0, -1.0) * aw / W;
  auto w = [&](cplx y) -> cplx {
    return std::pow(gam, 1.0 / beta) * std::exp((1.0 / beta - 1.0) * std::log(y)) / std::abs(beta);
  };

  if (std::isinf(yb)) {
    if (W.imag() > 1e-12 * aw) throw DomainError("exp_positive_segment: Im W > 0 on an unbounded positive branch");
    const cplx e = detail::steepest_ray(W, ya, w, ya, detail::tight());
    return e - length + iW * c * first_moment;
  }
  // bounded segment: rotate at both ends only when the segment holds many
  // oscillations and the rays stay clear of y = 0
  const bool rotate = aw * (yb - ya) > 40.0 && 46.0 * std::abs(d.real()) / aw < 0.5 * ya;
  if (rotate) {
    const cplx e = detail::steepest_ray(W, ya, w, ya, detail::tight()) -
                   detail::steepest_ray(W, yb, w, yb, detail::tight());
    return e - length + iW * c * first_moment;
  }
  auto h = [&](double y) -> cplx { return detail::g1(W * y); };
  const auto r = branch_quad(k, Branch::positive, ya, yb, h, detail::tight());
  return r.value + iW * (c - 1.0) * first_moment;
}

/// int_{ua}^{ub} (e^{-iW F(u)} - 1 + iWc F(u)) du on the negative branch.
inline cplx exp_negative_segment(const Kernel& k, cplx W, double c, double ua, double ub) {
  if (!(ub > ua) || W == cplx(0.0)) return 0.0;
  const cplx iW = cplx(0.0, 1.0) * W;
  const double aw = std::abs(W);
  const auto opt = detail::tight();

  auto g1_quad = [&](double a, double b) -> cplx {
    // int_a^b g1(W F(u)) du in tau = ln u
    const double ta = a == 0.0 ? -46.0 / (k.short_memory() ? 1.0 + 2.0 * k.beta() : 1.0) : std::log(a);
    double tb;
    if (std::isinf(b)) {
      const double rate = 2.0 * (1.0 - k.beta()) - 1.0;
      tb = std::max(ta, 0.0) + 46.0 / rate;
    } else {
      tb = std::log(b);
    }
    if (!(tb > ta)) return 0.0;
    auto g = [&](double tau) -> cplx {
      const double u = std::exp(tau);
      return detail::g1(W * k.neg_f(u)) * u;
    };
    const auto pts = detail::tau_breaks(ta, tb, 1.0);
    return integrate(g, std::span<const double>(pts), opt).value;
  };

  if (!k.short_memory()) {
    if (std::isinf(ub) && c != 1.0)
      throw DivergenceError("uncompensated negative branch diverges for H > 1/2");
    cplx lin = 0.0;
    if (c != 1.0) lin = iW * (c - 1.0) * (k.neg_f_antiderivative(ub) - k.neg_f_antiderivative(ua));
    return g1_quad(ua, ub) + lin;
  }

  auto G = [&](double u) { return std::isinf(u) ? 0.0 : k.neg_f_antiderivative(u); };
  NegBranchContinuation cont(k);
  auto dudy = [&](cplx y) -> cplx { return cont.at(y).dudy; };
  cplx total = 0.0;
  double lo = ua;

  if (ua == 0.0) {
    if (W.imag() < -1e-12 * aw) throw DomainError("exp_negative_segment: Im W < 0 at the kernel singularity");
    const double a1 = std::min(0.25, ub);
    const double Y0 = k.neg_f(a1);
    try {
      const cplx e = -detail::steepest_ray(W, Y0, dudy, std::abs(Y0), opt);
      total += e - a1 + iW * c * (G(a1) - G(0.0));
    } catch (const ConvergenceError&) {
      // the ray winds u^beta around the origin (beta close to 0); integrate
      // along the real axis instead
      total += g1_quad(0.0, a1) + iW * (c - 1.0) * (G(a1) - G(0.0));
    }
    lo = a1;
  }
  if (!(ub > lo)) return total;

  // middle part: oscillatory while |W F| > 1
  double b1 = ub;
  const double y_eta = -1.0 / aw;
  if (std::isinf(ub) || k.neg_f(ub) > y_eta) {
    const double u_eta = k.neg_inverse(y_eta);
    b1 = std::clamp(u_eta, lo, ub);
  }
  if (b1 > lo) {
    const double Ya = k.neg_f(lo), Yb = k.neg_f(b1);
    const cplx d = cplx(0.0, -1.0) * aw / W;
    const bool rotate = aw * (Yb - Ya) > 40.0 && 46.0 * std::abs(d.real()) / aw < 0.5 * std::abs(Yb);
    bool done = false;
    if (rotate) {
      try {
        const cplx e = detail::steepest_ray(W, Ya, dudy, std::abs(Yb), opt) -
                       detail::steepest_ray(W, Yb, dudy, std::abs(Yb), opt);
        total += e - (b1 - lo) + iW * c * (G(b1) - G(lo));
        done = true;
      } catch (const ConvergenceError&) {
      }
    }
    if (!done) total += g1_quad(lo, b1) + iW * (c - 1.0) * (G(b1) - G(lo));
  }
  if (ub > b1) total += g1_quad(b1, ub) + iW * (c - 1.0) * (G(ub) - G(b1));
  return total;
}

/// int over s on branch `b` with f(1,s) in [ylo, yhi] of e^{-iWf} - 1 + iWcf.
inline cplx exp_branch_integral(const Kernel& k, Branch b, cplx W, double c, double ylo, double yhi) {
  const auto [rlo, rhi] = branch_range(k, b);
  const double lo = std::max(ylo, rlo), hi = std::min(yhi, rhi);
  if (!(hi > lo)) return 0.0;
  if (b == Branch::positive) {
    if (k.short_memory()) return exp_positive_segment(k, W, c, lo, hi);
    auto h = [&](double y) -> cplx { return detail::g1(W * y) + cplx(0.0, 1.0) * W * (c - 1.0) * y; };
    return branch_quad(k, b, lo, hi, h, detail::tight()).value;
  }
  double ua, ub;
  if (k.short_memory()) {
    ua = std::isinf(lo) ? 0.0 : k.neg_inverse(lo);
    ub = hi >= 0.0 ? detail::kInf : k.neg_inverse(hi);
  } else {
    ua = hi >= k.inv_gamma() ? 0.0 : k.neg_inverse(hi);
    ub = lo <= 0.0 ? detail::kInf : k.neg_inverse(lo);
  }
  return exp_negative_segment(k, W, c, ua, ub);
}

/// K(W) = int_{-inf}^1 (e^{-iW f(s)} - 1 + iW f(s)) ds over both branches.
inline cplx exp_kernel_full(const Kernel& k, cplx W) {
  const double inf = detail::kInf;
  return exp_branch_integral(k, Branch::positive, W, 1.0, -inf, inf) +
         exp_branch_integral(k, Branch::negative, W, 1.0, -inf, inf);
}

/// exp_kernel_full on the real line (H < 1/2), tabulated in v = ln|W|.
/// Without compensation (the compensators of the two branches cancel) it
/// splits as
///   K(W) = e^{-iW/Gamma} P(W) - 1 + N(W),
/// P(W) = e^{iW/Gamma} (int_P (e^{-iWf} - 1) ds + 1), smooth and O(1/W),
/// N(W) = int_N (e^{-iWf} - 1) ds, O(W) at 0 and O(W^q) at infinity with
/// q = 2/(3-2H). Below the table K = -(W^2/2) int f^2 (the next term is
/// O(W^{1/|beta|})); above it N grows like W^q and P like 1/W.
/// K(-W) = conj K(W).
class KernelExpTable {
 public:
  explicit KernelExpTable(const Kernel& k, double v_lo = -20.0, double v_hi = 70.0, double width = 1.0)
      : v_lo_(v_lo), v_hi_(v_hi), q_(2.0 / (3.0 - 2.0 * k.H())), inv_gamma_(k.inv_gamma()), pos_(20), neg_(20) {
    if (!k.short_memory()) throw RegimeError("KernelExpTable requires H < 1/2");
    const double b = k.beta();
    auto sq = [&](double v) {
      const double u = std::exp(v), f = k.neg_f(u);
      return f * f * u;
    };
    std::vector<double> br;
    for (double v = -60.0; v <= 60.0; v += 2.0) br.push_back(v);
    half_f2_ = 0.5 * (k.inv_gamma() * k.inv_gamma() / (2.0 * b + 1.0) +
                      integrate(sq, std::span<const double>(br), QuadOptions{1e-300, 1e-14, 4000}).value);
    const double inf = detail::kInf;
    for (double v = v_lo; v < v_hi; v += width) {
      pos_.add_panel(v, v + width, [&](double s) {
        const double W = std::exp(s);
        const cplx e = exp_branch_integral(k, Branch::positive, W, 0.0, -inf, inf) + 1.0;
        return std::polar(1.0, W * inv_gamma_) * e / pos_norm(s);
      });
      neg_.add_panel(v, v + width, [&](double s) {
        return exp_branch_integral(k, Branch::negative, std::exp(s), 0.0, -inf, inf) / neg_norm(s);
      });
    }
  }

  cplx operator()(double W) const {
    if (W == 0.0) return 0.0;
    if (W < 0.0) return std::conj((*this)(-W));
    const double v = std::log(W);
    if (v < v_lo_) return -half_f2_ * W * W;
    const double vc = std::min(v, v_hi_);
    const cplx P = pos_(vc) * pos_norm(vc) * (v > v_hi_ ? std::exp(v_hi_ - v) : 1.0);
    const cplx N = neg_(vc) * neg_norm(vc) * (v > v_hi_ ? std::exp(q_ * (v - v_hi_)) : 1.0);
    return std::polar(1.0, -W * inv_gamma_) * P - 1.0 + N;
  }

  /// int f^2 ds / 2.
  double half_f2() const { return half_f2_; }

  /// Shared table for the given H.
  static const KernelExpTable& get(double H) {
    static std::mutex mu;
    static std::map<double, std::unique_ptr<KernelExpTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[H];
    if (!slot) slot = std::make_unique<KernelExpTable>(Kernel(H));
    return *slot;
  }

 private:
  static double pos_norm(double v) { return 1.0 / (1.0 + std::exp(v)); }
  double neg_norm(double v) const { return std::exp(v) / (1.0 + std::exp((1.0 - q_) * v)); }

  double v_lo_, v_hi_, q_, inv_gamma_;
  double half_f2_ = 0.0;
  ChebPanels pos_, neg_;
};

}  // namespace flm
