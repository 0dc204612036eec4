#pragma once

// Monte Carlo sampler of Z_t = int f(t,s) dZ_s.
//
// Jumps (S, U) form a Poisson set with intensity Leb x mu on [s_min, t].
// The window is split at s_split:
//   near  [s_split, t]   every jump with |U| > eps is simulated;
//   far   [s_min, s_split) jumps with |U| > u_far are simulated, the rest
//         replaced by a normal with matching mean and variance (many jumps,
//         each with a small kernel weight).
// Jumps with |U| <= eps are dropped after compensation or replaced by a
// normal (gaussian_substitute). The compensator is 1{|u| <= 1} for H < 1/2
// and 1 for H > 1/2, as in the characteristic function.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "flm/charfn.hpp"
#include "flm/error.hpp"
#include "flm/levy_measure.hpp"
#include "flm/quadrature.hpp"

namespace flm {

enum class SmallJumpMode { drop_compensated, gaussian_substitute };

struct SimConfig {
  std::size_t n_samples = 100000;
  double s_min = 0.0;        // 0: chosen from window_share
  double s_split = 0.0;      // 0: chosen from far_share
  double window_share = 1e-6;  // int_{-inf}^{s_min} f^2 / int f^2
  double far_share = 1e-3;     // int_{s_min}^{s_split} f^2 / int f^2
  double eps = 1e-3;
  std::uint64_t seed = 1;
  SmallJumpMode mode = SmallJumpMode::drop_compensated;
  unsigned threads = 0;  // 0: FLM_THREADS or 1
};

/// SplitMix64 step; used to derive per-block seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Thread cap from FLM_THREADS (default 1).
inline unsigned env_threads() {
  const char* s = std::getenv("FLM_THREADS");
  if (!s) return 1;
  const long v = std::strtol(s, nullptr, 10);
  return v > 0 ? static_cast<unsigned>(v) : 1;
}

namespace detail {

/// int_a^b f(t,s) ds.
inline double kernel_integral(const Kernel& k, double t, double a, double b) {
  const double b1 = k.beta() + 1.0;
  auto A = [&](double s) {
    const double neg = s < 0.0 ? std::pow(-s, b1) : 0.0;
    return (neg - std::pow(t - s, b1)) / (b1 * k.gamma_const());
  };
  return A(std::min(b, t)) - A(a);
}

/// int_a^b |f(t,s)|^p ds for a < b <= 0 (a may be -infinity).
inline double kernel_neg_pow_integral(const Kernel& k, double t, double a, double b, double p) {
  if (!(b > a)) return 0.0;
  // s = -e^tau; the integrand decays like e^{-r tau} as tau -> inf
  auto g = [&](double tau) {
    const double u = std::exp(tau);
    return std::pow(std::abs(k.f(t, -u)), p) * u;
  };
  const double r = p * (1.0 - k.beta()) - 1.0;
  const double ta = std::isinf(a) ? std::log(std::max(-b, t)) + 46.0 / r : std::log(-a);
  const double tb = b == 0.0 ? std::log(t) - 80.0 : std::log(-b);
  const auto pts = tau_breaks(tb, ta, 1.0);
  return integrate(g, std::span<const double>(pts), QuadOptions{1e-300, 1e-12, 4000}).value;
}

/// int_a^b f(t,s)^2 ds (a may be -infinity, b <= t).
inline double kernel_sq_integral(const Kernel& k, double t, double a, double b) {
  if (!(b > a)) return 0.0;
  const double tb = 2.0 * k.beta() + 1.0;
  if (!(tb > 0.0)) throw DomainError("kernel is not square integrable");
  double out = 0.0;
  if (b > 0.0) {
    // (t - s)^{2 beta} / Gamma^2 on [max(a, 0), b]
    const double lo = std::max(a, 0.0);
    const double g2 = k.gamma_const() * k.gamma_const();
    out += (std::pow(t - lo, tb) - std::pow(t - b, tb)) / (tb * g2);
  }
  if (a < 0.0) out += kernel_neg_pow_integral(k, t, a, std::min(b, 0.0), 2.0);
  return out;
}

/// Far-field split: the nearest power-of-two multiple of -t where either the
/// variance share of (-inf, s] is at most `share` or the Lyapunov ratio
/// int_{s_min}^s f^4 / (int f^2)^2 is at most share^2. The second rule keeps
/// the exact window short when the kernel decays slowly (H > 1/2).
inline double split_point(const Kernel& k, double t, double s_min, double share) {
  const double total = kernel_sq_integral(k, t, -kInf, t);
  double s = -t;
  for (int i = 0; i < 200 && s > s_min; ++i) {
    if (kernel_sq_integral(k, t, -kInf, s) <= share * total) return s;
    if (kernel_neg_pow_integral(k, t, s_min, s, 4.0) <= share * share * total * total) return s;
    s *= 2.0;
  }
  return s_min;
}

/// Smallest (most negative) power-of-two multiple of -t whose tail share of
/// int f^2 is below `share`.
inline double window_start(const Kernel& k, double t, double share) {
  const double total = kernel_sq_integral(k, t, -kInf, t);
  double s = -t;
  for (int i = 0; i < 200; ++i) {
    if (kernel_sq_integral(k, t, -kInf, s) <= share * total) return s;
    s *= 2.0;
  }
  throw ConvergenceError("could not place the simulation window");
}

/// Sampler of the normalised jump law on {|u| > lo} (and optionally <= hi).
class JumpLaw {
 public:
  JumpLaw(const LevyMeasure& mu, double lo, double hi) {
    for (const auto& a : mu.all_atoms()) {
      const double au = std::abs(a.location);
      if (au > lo && au <= hi) add_atom(a.location, a.mass);
    }
    for (const auto& p : mu.pieces) {
      const int sd = p.side();
      const double a = std::max(sd > 0 ? p.lo : -p.hi, lo);
      const double b = std::min(sd > 0 ? p.hi : -p.lo, hi);
      if (!(b > a)) continue;
      add_piece(p, sd, a, b);
    }
    double acc = 0.0;
    for (auto& c : comps_) {
      acc += c.mass;
      c.cum = acc;
    }
    total_ = acc;
  }

  double total() const { return total_; }

  template <typename Rng>
  double draw(Rng& rng) const {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double v = U(rng) * total_;
    auto it = std::lower_bound(comps_.begin(), comps_.end(), v, [](const Comp& c, double x) { return c.cum < x; });
    if (it == comps_.end()) --it;
    const Comp& c = *it;
    if (c.cdf_u.empty()) return c.location;
    // inverse of the tabulated cdf (log-linear in u)
    const double w = U(rng);
    auto jt = std::lower_bound(c.cdf_w.begin(), c.cdf_w.end(), w);
    std::size_t j = static_cast<std::size_t>(jt - c.cdf_w.begin());
    j = std::clamp<std::size_t>(j, 1, c.cdf_w.size() - 1);
    const double w0 = c.cdf_w[j - 1], w1 = c.cdf_w[j];
    const double f = w1 > w0 ? (w - w0) / (w1 - w0) : 0.0;
    const double lu = std::log(c.cdf_u[j - 1]) + f * (std::log(c.cdf_u[j]) - std::log(c.cdf_u[j - 1]));
    return c.side * std::exp(lu);
  }

 private:
  struct Comp {
    double mass = 0.0, cum = 0.0, location = 0.0;
    int side = 1;
    std::vector<double> cdf_u, cdf_w;  // empty for atoms
  };

  void add_atom(double loc, double mass) {
    Comp c;
    c.mass = mass;
    c.location = loc;
    comps_.push_back(c);
  }

  void add_piece(const DensityPiece& p, int sd, double a, double b) {
    Comp c;
    c.side = sd;
    // cdf on a log grid, u from a to b (or to where the remaining mass is negligible)
    const double la = std::log(a);
    double lb = std::isinf(b) ? la + 1.0 : std::log(b);
    auto dens = [&](double v) {
      const double u = std::exp(v);
      return p.density(sd * u) * u;
    };
    if (std::isinf(b)) {
      const double peak = std::max(dens(la), 1e-300);
      while (dens(lb) > 1e-17 * peak && lb < la + 700.0) lb += 1.0;
    }
    const int n = 4096;
    c.cdf_u.resize(n + 1);
    c.cdf_w.resize(n + 1);
    double acc = 0.0;
    c.cdf_u[0] = a;
    c.cdf_w[0] = 0.0;
    for (int i = 1; i <= n; ++i) {
      const double v0 = la + (lb - la) * (i - 1) / n, v1 = la + (lb - la) * i / n;
      acc += integrate(dens, v0, v1, QuadOptions{1e-300, 1e-12, 50}).value;
      c.cdf_u[static_cast<std::size_t>(i)] = std::exp(v1);
      c.cdf_w[static_cast<std::size_t>(i)] = acc;
    }
    for (auto& w : c.cdf_w) w /= acc;
    c.mass = acc;
    comps_.push_back(std::move(c));
  }

  std::vector<Comp> comps_;
  double total_ = 0.0;
};

/// int g(u) mu(du) over eps-limited ranges, atoms included.
template <typename G>
double measure_range(const LevyMeasure& mu, G&& g, double lo, double hi, const Growth& gr) {
  // |u| in (lo, hi]
  double out = 0.0;
  for (const auto& a : mu.all_atoms()) {
    const double au = std::abs(a.location);
    if (au > lo && au <= hi) out += a.mass * g(a.location);
  }
  LevyMeasure pm;
  pm.pieces = mu.pieces;
  if (pm.pieces.empty()) return out;
  out += integrate_measure(pm, g, -hi, -lo, gr).value;
  out += integrate_measure(pm, g, lo, hi, gr).value;
  return out;
}

}  // namespace detail

/// Precomputed sampling plan for one (model, t, config).
class Sampler {
 public:
  Sampler(const Model& m, double t, const SimConfig& cfg) : m_(m), t_(t), cfg_(cfg) {
    if (!(t > 0.0)) throw DomainError("sample requires t > 0");
    if (cfg.n_samples == 0) throw ConfigError("n_samples must be positive");
    if (!(cfg.eps > 0.0)) throw ConfigError("jump floor eps must be positive");
    const auto& k = m.kernel();
    const auto& mu = m.mu();
    const double inf = detail::kInf;
    s_min_ = cfg.s_min < 0.0 ? cfg.s_min : detail::window_start(k, t, cfg.window_share);
    s_split_ = cfg.s_split < 0.0 ? cfg.s_split : detail::split_point(k, t, s_min_, cfg.far_share);
    s_split_ = std::clamp(s_split_, s_min_, 0.0);
    if (!(s_min_ < 0.0)) throw ConfigError("s_min must be negative");

    near_ = detail::JumpLaw(mu, cfg.eps, inf);
    if (!std::isfinite(near_.total())) throw DivergenceError("mu({|u| > eps}) is infinite");
    if (near_.total() * (t - s_split_) > 1e6)
      throw ConfigError("more than 1e6 exact jumps per sample; raise far_share or eps");
    const double far_len = s_split_ - s_min_;
    // u_far: expected exact far jumps per sample at most ~2
    u_far_ = cfg.eps;
    while (far_len > 0.0 && detail::JumpLaw(mu, u_far_, inf).total() * far_len > 2.0 && u_far_ < 1e12) u_far_ *= 2.0;
    far_ = detail::JumpLaw(mu, u_far_, inf);

    auto comp = [&](double u) { return detail::compensator(m_, u); };
    const Growth g1{1.0, 1.0, 0.0}, g2{2.0, 2.0, 0.0};
    const double fn = detail::kernel_integral(k, t, s_split_, t);
    const double ff = detail::kernel_integral(k, t, s_min_, s_split_);
    // near: compensation of the simulated jumps
    drift_ = -fn * detail::measure_range(mu, [&](double u) { return u * comp(u); }, cfg.eps, inf, g1);
    // far: exact big jumps compensated, the rest as a normal
    drift_ -= ff * detail::measure_range(mu, [&](double u) { return u * comp(u); }, u_far_, inf, g1);
    far_mean_ = ff * detail::measure_range(mu, [&](double u) { return u * (1.0 - comp(u)); }, cfg.eps, u_far_, g1);
    far_var_ = detail::kernel_sq_integral(k, t, s_min_, s_split_) *
               detail::measure_range(mu, [](double u) { return u * u; }, cfg.eps, u_far_, g2);
    if (cfg.mode == SmallJumpMode::gaussian_substitute) {
      small_var_ = detail::kernel_sq_integral(k, t, s_min_, t) *
                   detail::measure_range(mu, [](double u) { return u * u; }, 0.0, cfg.eps, g2);
    }
  }

  double s_min() const { return s_min_; }
  double s_split() const { return s_split_; }
  double u_far() const { return u_far_; }
  /// Variance of the normal replacing the small jumps (gaussian mode).
  double small_variance() const { return small_var_; }
  double far_variance() const { return far_var_; }
  double drift() const { return drift_ + far_mean_; }

  /// Samples for block b (indices [b B, (b+1) B)).
  void fill_block(std::size_t block, std::span<double> out) const {
    std::mt19937_64 rng(splitmix64(cfg_.seed ^ splitmix64(block + 1)));
    const auto& k = m_.kernel();
    const double near_len = t_ - s_split_, far_len = s_split_ - s_min_;
    std::poisson_distribution<long> n_near(near_.total() * near_len);
    std::poisson_distribution<long> n_far(far_.total() * std::max(far_len, 0.0));
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> N(0.0, 1.0);
    const double sd = std::sqrt(far_var_ + small_var_);
    auto time_in = [&](double a, double b) {
      while (true) {
        const double s = a + (b - a) * U(rng);
        // kernel singularities at s = 0 and s = t
        if (std::abs(s) > 1e-12 && std::abs(s - t_) > 1e-12) return s;
      }
    };
    for (double& x : out) {
      double acc = drift_ + far_mean_;
      if (near_.total() > 0.0) {
        const long nn = n_near(rng);
        for (long j = 0; j < nn; ++j) {
          const double s = time_in(s_split_, t_);
          acc += k.f(t_, s) * near_.draw(rng);
        }
      }
      if (far_len > 0.0 && far_.total() > 0.0) {
        const long nf = n_far(rng);
        for (long j = 0; j < nf; ++j) {
          const double s = time_in(s_min_, s_split_);
          acc += k.f(t_, s) * far_.draw(rng);
        }
      }
      if (sd > 0.0) acc += sd * N(rng);
      x = acc;
    }
  }

  static constexpr std::size_t kBlock = 1u << 14;

 private:
  const Model& m_;
  double t_;
  SimConfig cfg_;
  double s_min_ = 0.0, s_split_ = 0.0, u_far_ = 0.0;
  detail::JumpLaw near_{LevyMeasure{}, 1.0, 1.0}, far_{LevyMeasure{}, 1.0, 1.0};
  double drift_ = 0.0, far_mean_ = 0.0, far_var_ = 0.0, small_var_ = 0.0;
};

/// n_samples draws of Z_t; identical for a given seed whatever the thread count.
inline std::vector<double> sample(const Model& m, double t, const SimConfig& cfg) {
  const Sampler sp(m, t, cfg);
  std::vector<double> out(cfg.n_samples);
  const std::size_t B = Sampler::kBlock;
  const std::size_t blocks = (cfg.n_samples + B - 1) / B;
  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads ? cfg.threads : env_threads(),
                                                             static_cast<unsigned>(blocks)));
  auto run = [&](unsigned id) {
    for (std::size_t b = id; b < blocks; b += threads) {
      const std::size_t lo = b * B, hi = std::min(cfg.n_samples, lo + B);
      sp.fill_block(b, std::span<double>(out.data() + lo, hi - lo));
    }
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(run, i);
    for (auto& th : pool) th.join();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Estimates

struct EmpiricalDensity {
  std::vector<double> x, p, se;
  double bandwidth = 0.0;
  std::size_t n = 0;
};

/// Box-kernel estimate p(x) = #{|X - x| <= h/2} / (n h) on the grid, with
/// binomial standard errors.
inline EmpiricalDensity empirical_density(std::span<const double> samples, double bandwidth,
                                          std::span<const double> grid) {
  if (!(bandwidth > 0.0)) throw DomainError("bandwidth must be positive");
  if (samples.size() < 10000) throw DomainError("empirical_density needs at least 1e4 samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  EmpiricalDensity out;
  out.bandwidth = bandwidth;
  out.n = s.size();
  const double n = static_cast<double>(s.size());
  for (double x : grid) {
    const auto lo = std::lower_bound(s.begin(), s.end(), x - 0.5 * bandwidth);
    const auto hi = std::upper_bound(s.begin(), s.end(), x + 0.5 * bandwidth);
    const double q = static_cast<double>(hi - lo) / n;
    out.x.push_back(x);
    out.p.push_back(q / bandwidth);
    out.se.push_back(std::sqrt(q * (1.0 - q) / n) / bandwidth);
  }
  return out;
}

/// Number of samples above x.
inline std::size_t exceedances(std::span<const double> samples, double x) {
  return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [x](double v) { return v > x; }));
}

// ---------------------------------------------------------------------------
// Export

/// Raw little-endian float64 stream.
inline void write_binary_le(const std::string& path, std::span<const double> samples) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path);
  for (double v : samples) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
  }
}

inline std::vector<double> read_binary_le(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  std::vector<double> out;
  unsigned char b[8];
  while (is.read(reinterpret_cast<char*>(b), 8)) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    out.push_back(v);
  }
  return out;
}

}  // namespace flm
