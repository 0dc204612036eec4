#pragma once

// Mandelbrot-Van Ness kernel
//   f(t,s) = [ (t-s)_+^{H-1/2} - (-s)_+^{H-1/2} ] / Gamma(H+1/2)
// together with its inverse on the two monotone branches and the
// derivative of the inverse, ell(y) = (f^{-1})'(y).
//
// Throughout, beta = H - 1/2. The "positive branch" is s in (0,1) written
// through v = 1 - s, where f = v^beta / Gamma. The "negative branch" is
// s < 0 written through u = -s, where
//   F(u) = f(1,-u) = ((1+u)^beta - u^beta) / Gamma.

#include <cmath>
#include <limits>
#include <string>

#include "flm/error.hpp"

namespace flm {

class Kernel {
 public:
  explicit Kernel(double H, double guard = 1e-3) : H_(H) {
    if (!(H > 0.0 && H < 1.0)) throw DomainError("Hurst parameter must lie in (0,1), got " + std::to_string(H));
    if (std::abs(H - 0.5) < guard)
      throw DomainError("Hurst parameter too close to 1/2 (|H-1/2| < " + std::to_string(guard) + ")");
    beta_ = H - 0.5;
    gamma_ = std::tgamma(H + 0.5);
    inv_gamma_ = 1.0 / gamma_;
  }

  double H() const { return H_; }
  double beta() const { return beta_; }
  double gamma_const() const { return gamma_; }
  /// 1/Gamma(H+1/2): the left end of the positive-branch range for H < 1/2.
  double inv_gamma() const { return inv_gamma_; }
  bool short_memory() const { return H_ < 0.5; }

  /// f(1, s).
  double f(double s) const {
    if (s >= 1.0) return 0.0;
    if (s > 0.0) return std::pow(1.0 - s, beta_) * inv_gamma_;
    if (s == 0.0) {
      if (beta_ < 0.0) throw DomainError("kernel is singular at s = 0 for H < 1/2");
      return inv_gamma_;
    }
    return neg_f(-s);
  }

  /// f(t, s) for t > 0.
  double f(double t, double s) const {
    if (!(t > 0.0)) throw DomainError("eval_f requires t > 0");
    if (beta_ < 0.0 && (s == 0.0 || s == t)) throw DomainError("kernel is singular at s in {0, t} for H < 1/2");
    if (s >= t) return 0.0;
    const double a = std::pow(t - s, beta_);
    const double b = s < 0.0 ? std::pow(-s, beta_) : 0.0;
    if (s < 0.0 && -s > t) {
      // (t-s)^beta - (-s)^beta with t << |s|: factor out |s|^beta
      return b * std::expm1(beta_ * std::log1p(t / -s)) * inv_gamma_;
    }
    return (a - b) * inv_gamma_;
  }

  /// Negative branch in u = -s > 0.
  double neg_f(double u) const {
    if (u > 1.0) return std::pow(u, beta_) * std::expm1(beta_ * std::log1p(1.0 / u)) * inv_gamma_;
    return (std::pow(1.0 + u, beta_) - std::pow(u, beta_)) * inv_gamma_;
  }

  /// dF/du on the negative branch.
  double neg_df(double u) const {
    const double b1 = beta_ - 1.0;
    if (u > 1.0) return beta_ * std::pow(u, b1) * std::expm1(b1 * std::log1p(1.0 / u)) * inv_gamma_;
    return beta_ * (std::pow(1.0 + u, b1) - std::pow(u, b1)) * inv_gamma_;
  }

  /// Antiderivative of F: int F du = ((1+u)^{beta+1} - u^{beta+1}) / ((beta+1) Gamma) + const.
  /// For H < 1/2 this tends to 0 as u -> infinity.
  double neg_f_antiderivative(double u) const {
    const double b1 = beta_ + 1.0;
    if (u > 1.0) return std::pow(u, b1) * std::expm1(b1 * std::log1p(1.0 / u)) * inv_gamma_ / b1;
    return (std::pow(1.0 + u, b1) - std::pow(u, b1)) * inv_gamma_ / b1;
  }

  /// f'(s) on (-inf,0) and (0,1).
  double df(double s) const {
    if (s > 0.0 && s < 1.0) return -beta_ * std::pow(1.0 - s, beta_ - 1.0) * inv_gamma_;
    if (s < 0.0) return -neg_df(-s);
    throw DomainError("kernel derivative undefined at s = " + std::to_string(s));
  }

  // ---- positive branch helpers -------------------------------------------

  /// v = 1 - s with f(1,s) = y on the positive branch.
  double pos_v(double y) const { return std::pow(gamma_ * y, 1.0 / beta_); }

  /// |dv/dy| on the positive branch; equals ell(y) there when H < 1/2.
  double pos_weight(double y) const {
    return std::pow(gamma_, 1.0 / beta_) * std::pow(y, 1.0 / beta_ - 1.0) / std::abs(beta_);
  }

  // ---- inverse and ell (H < 1/2) ------------------------------------------

  /// u > 0 with F(u) = y. For H < 1/2 the branch is increasing with range
  /// (-inf, 0); for H > 1/2 it is decreasing with range (0, 1/Gamma).
  double neg_inverse(double y) const {
    const bool inc = beta_ < 0.0;
    if (inc ? !(y < 0.0) : !(y > 0.0 && y < inv_gamma_))
      throw DomainError("negative-branch inverse: y = " + std::to_string(y) + " outside the branch range");
    // asymptotic seeds: u^beta ~ 1 - Gamma y near the kernel singularity / maximum,
    // F ~ beta u^{beta-1} / Gamma for u -> infinity
    const bool near_origin = inc ? y < -1.0 : y > 0.5 * inv_gamma_;
    double u0 = near_origin ? std::pow(std::abs(1.0 - gamma_ * y), 1.0 / beta_)
                            : std::pow(gamma_ * y / beta_, 1.0 / (beta_ - 1.0));
    if (!(u0 > 0.0) || !std::isfinite(u0)) u0 = 1.0;
    // g(u) = sign * (F(u) - y) is increasing in u
    const double sign = inc ? 1.0 : -1.0;
    auto g = [&](double u) { return sign * (neg_f(u) - y); };
    double lo = u0, hi = u0;
    int guard = 0;
    while (g(lo) > 0.0) {
      lo *= 0.5;
      if (++guard > 4000) throw ConvergenceError("neg_inverse: lower bracket failed");
    }
    while (g(hi) < 0.0) {
      hi *= 2.0;
      if (++guard > 4000) throw ConvergenceError("neg_inverse: upper bracket failed");
    }
    double a = std::log(lo), b = std::log(hi);
    while (b - a > 1e-13 * std::max(1.0, std::abs(a))) {
      const double m = 0.5 * (a + b);
      if (g(std::exp(m)) < 0.0)
        a = m;
      else
        b = m;
    }
    double u = std::exp(0.5 * (a + b));
    const double d = neg_df(u);
    if (d != 0.0 && std::isfinite(d)) {
      const double un = u - (neg_f(u) - y) / d;
      if (un > 0.0 && std::abs(neg_f(un) - y) <= std::abs(neg_f(u) - y)) u = un;
    }
    return u;
  }

  /// The point s with f(1,s) = y (H < 1/2).
  double inverse_f(double y) const {
    require_short_memory("inverse_f");
    if (y < 0.0) return -neg_inverse(y);
    if (y >= inv_gamma_) return 1.0 - pos_v(y);
    throw DomainError("inverse_f: y lies in the gap (0, 1/Gamma(H+1/2))");
  }

  /// ell(y) = 1 / f'(f^{-1}(y)); zero on the gap [0, 1/Gamma).
  double ell(double y) const {
    require_short_memory("ell");
    if (y >= inv_gamma_) return c_H() * std::pow(y, -tail_exponent());
    if (y < 0.0) return -1.0 / neg_df(neg_inverse(y));
    return 0.0;
  }

  /// (3-2H)/(1-2H): decay exponent of ell at +-infinity.
  double tail_exponent() const { return (3.0 - 2.0 * H_) / (1.0 - 2.0 * H_); }
  /// (5-2H)/(3-2H): blow-up exponent of ell at 0-.
  double origin_exponent() const { return (5.0 - 2.0 * H_) / (3.0 - 2.0 * H_); }

  double c_H() const {
    require_short_memory("c_H");
    const double k = 2.0 / (1.0 - 2.0 * H_);
    return k * std::pow(gamma_, -k);
  }
  double c_hat_H() const {
    require_short_memory("c_hat_H");
    const double k = 2.0 / (3.0 - 2.0 * H_);
    return k * std::pow((1.0 - 2.0 * H_) / (2.0 * gamma_), k);
  }

 private:
  void require_short_memory(const char* what) const {
    if (!(H_ < 0.5)) throw DomainError(std::string(what) + " requires H < 1/2");
  }

  double H_;
  double beta_;
  double gamma_;
  double inv_gamma_;
};

struct EllConstants {
  double c_H;
  double c_hat_H;
};

inline EllConstants ell_asymptotic_constants(const Kernel& k) { return {k.c_H(), k.c_hat_H()}; }

}  // namespace flm
