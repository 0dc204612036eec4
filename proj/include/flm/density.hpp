#pragma once

// Densities by Fourier inversion, the compound Poisson series of the big
// jumps and the decomposition
//   p_t(x) = e^{-t Lambda} p~_t(x + a(t)) + int rho_t(y) p~_t(x + a(t) - y) dy.
//
// Inversion:  p(x) = (1/pi) int_0^inf Re(e^{-izx} phi(z)) dz.
// The unit-time exponent L(zeta) = log phi(1, zeta) is tabulated once on
// geometric Chebyshev panels and reused through
//   log phi(t, z) = t L(t^{H-1/2} z).
// Exponentially small densities are computed along the shifted line
// z = w - i xi (xi at the saddle point), which returns log p directly:
//   log p(x) = -xi x + log phi(t, -i xi)
//              + log (1/pi) int_0^inf Re(e^{-iwx} phi(t, w - i xi) / phi(t, -i xi)) dw.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "flm/charfn.hpp"
#include "flm/cheb.hpp"
#include "flm/error.hpp"
#include "flm/quadrature.hpp"
#include "flm/saddle.hpp"

namespace flm {

// ---------------------------------------------------------------------------
// Exponent table

/// Which characteristic function is inverted.
enum class Exponent {
  full,       // phi(t,z) = exp Psi(t,-z)
  truncated,  // phi1(t,z) = exp psi1(t,z), H < 1/2
};

struct InversionOptions {
  double log_cutoff = -40.0;  // stop where t Re(L - L(0)) falls below this
  double zeta_cap = 1e7;      // slow-decay error beyond this
  double zeta_floor = 1e-7;   // first geometric panel starts here
  double panel_ratio = 1.5;
  int cheb_degree = 20;
  int gl_nodes = 32;
};

/// L(zeta - i eta) - L(-i eta) for zeta >= 0 at a fixed tilt eta >= 0, with
/// L the unit-time log characteristic function of the chosen kind.
class ExponentTable {
 public:
  ExponentTable(const Model& m, Exponent kind, double t_min, double eta = 0.0, const InversionOptions& opt = {})
      : m_(&m), kind_(kind), eta_(eta), cheb_(opt.cheb_degree) {
    if (kind == Exponent::truncated) detail::require_short(m, "truncated exponent");
    if (kind == Exponent::full && eta != 0.0 && m.kernel().short_memory())
      throw DomainError("the full exponent has no exponential moments for H < 1/2; tilt the truncated one");
    if (!(eta >= 0.0)) throw DomainError("tilt must be non-negative");
    L0_ = eta == 0.0 ? cplx(0.0) : raw(cplx(0.0, -eta));
    auto f = [&](double z) { return raw(cplx(z, -eta)) - L0_; };
    double a = 0.0, b = opt.zeta_floor;
    int below = 0;
    while (true) {
      cheb_.add_panel(a, b, f);
      const double edge = t_min * cheb_(b).real();
      if (edge < opt.log_cutoff) {
        if (++below >= 2) break;
      } else {
        below = 0;
      }
      a = b;
      b *= opt.panel_ratio;
      if (b > opt.zeta_cap)
        throw SlowDecayError("characteristic function has not decayed below e^" + std::to_string(opt.log_cutoff) +
                             " by zeta = " + std::to_string(opt.zeta_cap));
    }
    zeta_max_ = cheb_.hi();
  }

  /// Tabulated L(zeta - i eta) - L(-i eta); Hermitian extension to zeta < 0.
  cplx operator()(double zeta) const {
    if (zeta < 0.0) return std::conj((*this)(-zeta));
    if (zeta >= zeta_max_) return cheb_(zeta_max_);
    return cheb_(zeta);
  }
  /// L(-i eta), the unit-time log moment generating function at eta.
  cplx L0() const { return L0_; }
  double zeta_max() const { return zeta_max_; }
  double eta() const { return eta_; }
  const Model& model() const { return *m_; }
  Exponent kind() const { return kind_; }

  /// Direct (untabulated) L(zeta - i eta).
  cplx raw(cplx z) const {
    if (kind_ == Exponent::truncated) return psi1(*m_, 1.0, z);
    return psi(*m_, 1.0, -z);
  }

 private:
  const Model* m_;
  Exponent kind_;
  double eta_;
  cplx L0_;
  ChebPanels cheb_;
  double zeta_max_ = 0.0;
};

struct DensityValue {
  double value = 0.0;
  double err = 0.0;
};

/// Quadrature nodes for int_0^{z_max} g(z) dz: geometric panels from the
/// origin up to `width`, then uniform panels of that width.
inline void inversion_nodes(double z_max, double width, int n, std::vector<double>& z, std::vector<double>& w) {
  std::vector<double> gx, gw;
  gauss_legendre(n, gx, gw);
  std::vector<double> br{0.0};
  double b = width * std::exp2(-30.0);
  while (b < width && b < z_max) {
    br.push_back(b);
    b *= 2.0;
  }
  for (double c = br.back() + width; c < z_max; c += width) br.push_back(c);
  br.push_back(z_max);
  z.clear();
  w.clear();
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    const double a = br[i], h = 0.5 * (br[i + 1] - br[i]);
    if (!(h > 0.0)) continue;
    for (int j = 0; j < n; ++j) {
      z.push_back(a + h * (gx[static_cast<std::size_t>(j)] + 1.0));
      w.push_back(h * gw[static_cast<std::size_t>(j)]);
    }
  }
}

/// Fourier inversion of exp(t [L(chi z - i eta) - L(-i eta)]) at many x.
class Inverter {
 public:
  /// x_scale: the largest |x| to be requested; sets the panel width.
  Inverter(const ExponentTable& tab, double t, double x_scale, const InversionOptions& opt = {})
      : t_(t), chi_(tab.model().chi(t)) {
    if (!(t > 0.0)) throw DomainError("density requires t > 0");
    z_max_ = tab.zeta_max() / chi_;
    // two periods of e^{-izx} per panel at the largest |x|
    const double width = std::min(2.0 * std::numbers::pi / std::max(x_scale, 1e-12), z_max_ / 64.0);
    build(tab, width, opt.gl_nodes, z_, v_);
    build(tab, width, opt.gl_nodes / 2, zc_, vc_);
    tail_ = std::exp(t * tab(tab.zeta_max()).real()) * z_max_;
  }

  /// (1/pi) int_0^inf Re(e^{-izx} Phi(z)) dz.
  DensityValue at(double x) const {
    const double fine = sum(z_, v_, x), coarse = sum(zc_, vc_, x);
    return {fine, std::abs(fine - coarse) + tail_ / std::numbers::pi};
  }

  /// Values on the uniform grid x0 + k dx, k = 0..n-1 (phasor recursion).
  std::vector<DensityValue> grid(double x0, double dx, std::size_t n) const {
    const auto fine = sum_grid(z_, v_, x0, dx, n), coarse = sum_grid(zc_, vc_, x0, dx, n);
    std::vector<DensityValue> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = {fine[k], std::abs(fine[k] - coarse[k]) + tail_ / std::numbers::pi};
    return out;
  }

  /// As grid(), values only.
  std::vector<double> grid_values(double x0, double dx, std::size_t n) const { return sum_grid(z_, v_, x0, dx, n); }

  double z_max() const { return z_max_; }

 private:
  void build(const ExponentTable& tab, double width, int n, std::vector<double>& z, std::vector<cplx>& v) const {
    std::vector<double> w;
    inversion_nodes(z_max_, width, n, z, w);
    v.resize(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) v[j] = w[j] * std::exp(t_ * tab(chi_ * z[j]));
  }

  static double sum(const std::vector<double>& z, const std::vector<cplx>& v, double x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double a = z[j] * x;
      acc += v[j].real() * std::cos(a) + v[j].imag() * std::sin(a);
    }
    return acc / std::numbers::pi;
  }

  static std::vector<double> sum_grid(const std::vector<double>& z, const std::vector<cplx>& v, double x0, double dx,
                                      std::size_t n) {
    std::vector<double> acc(n, 0.0);
    for (std::size_t j = 0; j < z.size(); ++j) {
      const cplx step = std::polar(1.0, -z[j] * dx);
      cplx ph = v[j] * std::polar(1.0, -z[j] * x0);
      for (std::size_t k = 0; k < n; ++k) {
        if (k % 64 == 0 && k) ph = v[j] * std::polar(1.0, -z[j] * (x0 + dx * static_cast<double>(k)));
        acc[k] += ph.real();
        ph *= step;
      }
    }
    for (auto& a : acc) a /= std::numbers::pi;
    return acc;
  }

  double t_, chi_, z_max_ = 0.0, tail_ = 0.0;
  std::vector<double> z_, zc_;
  std::vector<cplx> v_, vc_;
};

/// Inversion with a prebuilt table (built for some t_min <= t).
inline DensityValue invert_at(const ExponentTable& tab, double t, double x, const InversionOptions& opt = {}) {
  return Inverter(tab, t, std::abs(x), opt).at(x);
}

/// p_t(x) by Fourier inversion of phi(t, .).
inline DensityValue density_fourier(const Model& m, double t, double x, const InversionOptions& opt = {}) {
  const ExponentTable tab(m, Exponent::full, t, 0.0, opt);
  return Inverter(tab, t, std::abs(x), opt).at(x);
}

/// p~_t(x) by Fourier inversion of phi1(t, .) (H < 1/2).
inline DensityValue tilde_p(const Model& m, double t, double x, const InversionOptions& opt = {}) {
  const ExponentTable tab(m, Exponent::truncated, t, 0.0, opt);
  return Inverter(tab, t, std::abs(x), opt).at(x);
}

struct LogDensity {
  double log_value = 0.0;
  double rel_err = 0.0;
  double xi = 0.0;  // tilt used (saddle point)
};

/// log p_t(x) (Exponent::full, H > 1/2) or log p~_t(x) (Exponent::truncated)
/// along the line through the saddle point.
inline LogDensity log_density_tilted(const Model& m, Exponent kind, double t, double x,
                                     const InversionOptions& opt = {}) {
  const auto s = solve_saddle(m, t, x);
  const ExponentTable tab(m, kind, t, s.zeta, opt);
  const auto v = Inverter(tab, t, std::abs(x), opt).at(x);
  if (!(v.value > 0.0)) throw ConvergenceError("tilted inversion returned a non-positive value");
  LogDensity out;
  out.xi = s.xi;
  out.log_value = -s.xi * x + t * tab.L0().real() + std::log(v.value);
  out.rel_err = v.err / v.value;
  return out;
}

// ---------------------------------------------------------------------------
// Grids

struct DensityGrid {
  double t = 1.0;
  std::vector<double> x_values;
  std::vector<double> p_values;
  std::vector<double> err_values;

  /// Trapezoid mass over the grid.
  double mass() const {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < x_values.size(); ++i)
      acc += 0.5 * (p_values[i] + p_values[i + 1]) * (x_values[i + 1] - x_values[i]);
    return acc;
  }
};

/// Density on the uniform grid [x_lo, x_hi] with n points.
inline DensityGrid density_grid(const ExponentTable& tab, double t, double x_lo, double x_hi, std::size_t n,
                                const InversionOptions& opt = {}) {
  if (n < 2 || !(x_hi > x_lo)) throw DomainError("density grid needs n >= 2 and x_lo < x_hi");
  const Inverter inv(tab, t, std::max(std::abs(x_lo), std::abs(x_hi)), opt);
  const double dx = (x_hi - x_lo) / static_cast<double>(n - 1);
  const auto vals = inv.grid(x_lo, dx, n);
  DensityGrid g;
  g.t = t;
  for (std::size_t k = 0; k < n; ++k) {
    g.x_values.push_back(x_lo + dx * static_cast<double>(k));
    g.p_values.push_back(vals[k].value);
    g.err_values.push_back(vals[k].err);
  }
  return g;
}

inline DensityGrid density_grid(const Model& m, Exponent kind, double t, double x_lo, double x_hi, std::size_t n,
                                const InversionOptions& opt = {}) {
  return density_grid(ExponentTable(m, kind, t, 0.0, opt), t, x_lo, x_hi, n, opt);
}

struct MassResult {
  double value = 0.0;     // grid mass plus tail corrections
  double grid = 0.0;      // trapezoid mass on [-x_max, x_max]
  double left_tail = 0.0;
  double right_tail = 0.0;
};

/// Total mass. Beyond +-x_max each tail is treated as a power law whose
/// exponent comes from p(x_max / 2) and p(x_max); the tail is then
/// x_max p(x_max) / (gamma - 1).
inline MassResult total_mass(const ExponentTable& tab, double t, double x_max, std::size_t n,
                             const InversionOptions& opt = {}) {
  if (!(x_max > 0.0) || n < 5) throw DomainError("total_mass needs x_max > 0 and n >= 5");
  const auto g = density_grid(tab, t, -x_max, x_max, n, opt);
  MassResult r;
  r.grid = g.mass();
  const Inverter inv(tab, t, x_max, opt);
  auto tail = [&](double sgn) {
    const double pf = std::max(inv.at(sgn * x_max).value, 0.0);
    const double ph = std::max(inv.at(sgn * 0.5 * x_max).value, 0.0);
    if (!(pf > 0.0) || !(ph > pf)) return 0.0;
    const double gamma = std::log(ph / pf) / std::numbers::ln2;
    if (!(gamma > 1.0)) throw SlowDecayError("density tail too heavy for a mass estimate");
    return x_max * pf / (gamma - 1.0);
  };
  r.left_tail = tail(-1.0);
  r.right_tail = tail(1.0);
  r.value = r.grid + r.left_tail + r.right_tail;
  return r;
}

// ---------------------------------------------------------------------------
// Compound Poisson series of the big jumps

struct RhoOptions {
  int points_per_cutoff = 64;  // grid spacing h = lambda t^{H-1/2} / this
  double x_max = 60.0;         // grid end
  double series_tol = 1e-10;   // Poisson tail bound
  bool richardson = true;      // combine spacings h and h/2
};

/// rho_t on the grid x_i = i h, i = 0..n-1.
struct RhoGrid {
  double h = 0.0;
  std::vector<double> values;
  int terms = 0;
  double x(std::size_t i) const { return h * static_cast<double>(i); }
};

namespace detail {

/// Trapezoid convolution of f and g supported on [lo_f h, ..) and [lo_g h, ..),
/// one-sided values at the support edges.
inline std::vector<double> grid_convolve(const std::vector<double>& f, std::size_t lo_f, const std::vector<double>& g,
                                         std::size_t lo_g, double h) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = lo_f + lo_g; i < n; ++i) {
    const std::size_t jhi = i - lo_g;
    double acc = 0.0;
    for (std::size_t j = lo_f; j <= jhi; ++j) acc += f[j] * g[i - j];
    acc -= 0.5 * f[lo_f] * g[i - lo_f] + 0.5 * f[jhi] * g[lo_g];
    out[i] = h * acc;
  }
  return out;
}

inline RhoGrid rho_on_grid(const Model& m, double t, std::size_t n0, double x_max, double tol) {
  const double edge = m.lambda() * m.chi(t);
  const double h = edge / static_cast<double>(n0);
  const std::size_t n = static_cast<std::size_t>(std::ceil(x_max / h)) + 1;
  std::vector<double> mt(n, 0.0);
  const double scale = std::pow(t, 1.5 - m.H());
  const double chi = m.chi(t);
  for (std::size_t i = n0; i < n; ++i) mt[i] = scale * mathfrak_m(m, h * static_cast<double>(i) / chi);
  const double tl = t * m.Lambda();
  // Poisson tail: number of terms
  int K = 1;
  {
    double term = std::exp(-tl) * tl, tail = 1.0 - std::exp(-tl) - term;
    while (tail > tol && K < 400) {
      ++K;
      term *= tl / K;
      tail -= term;
    }
  }
  RhoGrid out;
  out.h = h;
  out.terms = K;
  out.values.assign(n, 0.0);
  std::vector<double> power = mt;
  double fact = 1.0;
  for (int k = 1; k <= K; ++k) {
    if (k > 1) {
      power = grid_convolve(power, static_cast<std::size_t>(k - 1) * n0, mt, n0, h);
      fact *= k;
    }
    if (static_cast<std::size_t>(k) * n0 >= n) break;
    for (std::size_t i = 0; i < n; ++i) out.values[i] += power[i] / fact;
  }
  for (auto& v : out.values) v *= std::exp(-tl);
  return out;
}

}  // namespace detail

/// rho_t = e^{-t Lambda} sum_k m_t^{*k} / k! on the grid i h, h = lambda t^{H-1/2} / 64.
inline RhoGrid rho_series(const Model& m, double t, const RhoOptions& opt = {}) {
  detail::require_short(m, "rho_series");
  const auto n0 = static_cast<std::size_t>(opt.points_per_cutoff);
  RhoGrid coarse = detail::rho_on_grid(m, t, n0, opt.x_max, opt.series_tol);
  if (!opt.richardson) return coarse;
  const RhoGrid fine = detail::rho_on_grid(m, t, 2 * n0, opt.x_max, opt.series_tol);
  for (std::size_t i = 0; i < coarse.values.size() && 2 * i < fine.values.size(); ++i)
    coarse.values[i] = (4.0 * fine.values[2 * i] - coarse.values[i]) / 3.0;
  return coarse;
}

struct ComposeTerms {
  double no_jump = 0.0;  // e^{-t Lambda} p~_t(x + a(t))
  double jumps = 0.0;    // int rho_t(y) p~_t(x + a(t) - y) dy
  double total() const { return no_jump + jumps; }
};

/// The decomposition of p_t at each x (H < 1/2).
inline std::vector<ComposeTerms> compose_density(const Model& m, double t, std::span<const double> xs,
                                                 const RhoOptions& ropt = {}, const InversionOptions& opt = {}) {
  detail::require_short(m, "compose_density");
  const RhoGrid rho = rho_series(m, t, ropt);
  const ExponentTable tab(m, Exponent::truncated, t, 0.0, opt);
  const double a = m.a(t);
  double xs_max = 0.0;
  for (double x : xs) xs_max = std::max(xs_max, std::abs(x + a));
  const Inverter inv(tab, t, xs_max + ropt.x_max, opt);
  const std::size_t n0 = static_cast<std::size_t>(ropt.points_per_cutoff);
  std::vector<ComposeTerms> out;
  for (double x : xs) {
    ComposeTerms c;
    c.no_jump = std::exp(-t * m.Lambda()) * inv.at(x + a).value;
    // p~ at x + a - i h for i = n0..n-1, descending grid
    const std::size_t n = rho.values.size();
    const auto pt = inv.grid_values(x + a - rho.x(n0), -rho.h, n - n0);
    double acc = 0.0;
    for (std::size_t i = n0; i < n; ++i) {
      const double w = (i == n0 || i + 1 == n) ? 0.5 : 1.0;
      acc += w * rho.values[i] * pt[i - n0];
    }
    c.jumps = rho.h * acc;
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sub-exponentiality diagnostics

struct SubexpRow {
  double x;
  double conv_ratio;                 // (g*g)(x) / g(x)
  std::array<double, 3> shift_ratio;  // g(x - y) / g(x), y = 1, 5, 10
};

/// (g*g)/g and shift ratios for a density sampled on the uniform grid
/// x_i = x0 + i dx (g = 0 outside the grid), up to x_max.
inline std::vector<SubexpRow> subexp_test(double x0, double dx, std::span<const double> g, double x_max) {
  if (!(dx > 0.0) || g.size() < 3) throw DomainError("subexp_test needs a uniform grid with dx > 0");
  for (double v : g)
    if (v < 0.0) throw DomainError("subexp_test needs g >= 0");
  const std::size_t n = g.size();
  auto gat = [&](double x) {
    const double s = (x - x0) / dx;
    if (s < 0.0 || s > static_cast<double>(n - 1)) return 0.0;
    const std::size_t i = std::min(static_cast<std::size_t>(s), n - 2);
    const double f = s - static_cast<double>(i);
    return (1.0 - f) * g[i] + f * g[i + 1];
  };
  std::vector<SubexpRow> rows;
  const std::array<double, 3> shifts{1.0, 5.0, 10.0};
  const std::size_t stride = std::max<std::size_t>(1, n / 64);
  for (std::size_t i = 0; i < n; i += stride) {
    const double x = x0 + dx * static_cast<double>(i);
    if (x > x_max) break;
    if (!(g[i] > 0.0)) continue;
    // (g*g)(x) = int g(y) g(x - y) dy, trapezoid on the grid
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double y = x0 + dx * static_cast<double>(j);
      const double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
      acc += w * g[j] * gat(x - y);
    }
    SubexpRow r{x, dx * acc / g[i], {}};
    for (std::size_t s = 0; s < shifts.size(); ++s) r.shift_ratio[s] = gat(x - shifts[s]) / g[i];
    rows.push_back(r);
  }
  return rows;
}

struct ShiftTest {
  std::vector<double> ratios;  // g(x_n - y) / g(x_n)
  bool passes = false;         // ratios tend to 1
};

/// Shift-insensitivity g(x - y) / g(x) -> 1 along the points x_n.
template <typename G>
ShiftTest shift_ratio_test(G&& g, std::span<const double> xs, double y, double tol = 0.05) {
  ShiftTest out;
  for (double x : xs) out.ratios.push_back(g(x - y) / g(x));
  out.passes = !out.ratios.empty() && std::abs(out.ratios.back() - 1.0) <= tol;
  return out;
}

}  // namespace flm
