#pragma once

// Adaptive Gauss-Kronrod (10/21) quadrature for real- and complex-valued
// integrands, plus a few fixed rules used for tabulation.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <span>
#include <type_traits>
#include <vector>

namespace flm {

using cplx = std::complex<double>;

template <typename T>
struct QuadResult {
  T value{};
  double abs_error = 0.0;
  bool converged = true;
  int evaluations = 0;
};

struct QuadOptions {
  double abs_tol = 1e-14;
  double rel_tol = 1e-12;
  int max_subdivisions = 4000;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const cplx& v) { return std::abs(v); }

// QUADPACK qk21 nodes/weights.
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208814789838, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <typename T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename T, typename F>
Segment<T> gk21(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T resk = fc * kWgk[10];
  T resg{};
  double resabs = magnitude(fc) * kWgk[10];
  std::array<T, 10> f1{}, f2{};
  for (int j = 0; j < 10; ++j) {
    const double dx = h * kXgk[j];
    f1[j] = f(c - dx);
    f2[j] = f(c + dx);
    resk += kWgk[j] * (f1[j] + f2[j]);
    resabs += kWgk[j] * (magnitude(f1[j]) + magnitude(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1[j] + f2[j]);
  }
  const T mean = resk * 0.5;
  double resasc = kWgk[10] * magnitude(fc - mean);
  for (int j = 0; j < 10; ++j)
    resasc += kWgk[j] * (magnitude(f1[j] - mean) + magnitude(f2[j] - mean));
  const double ah = std::abs(h);
  resasc *= ah;
  resabs *= ah;
  double err = magnitude((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50 * eps))
    err = std::max(50 * eps * resabs, err);
  return {a, b, resk * h, err};
}

}  // namespace detail

/// Globally adaptive GK21 over [a, b] with optional interior breakpoints.
template <typename F>
auto integrate(F&& f, std::span<const double> points, const QuadOptions& opt = {}) {
  using T = std::decay_t<decltype(f(0.0))>;
  using Seg = detail::Segment<T>;
  QuadResult<T> out;
  std::priority_queue<Seg> heap;
  T total{};
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (points[i] == points[i + 1]) continue;
    Seg s = detail::gk21<T>(f, points[i], points[i + 1]);
    total += s.value;
    err += s.error;
    heap.push(s);
    out.evaluations += 21;
  }
  int n = static_cast<int>(heap.size());
  while (!heap.empty() && err > std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total))) {
    if (n >= opt.max_subdivisions) {
      out.converged = false;
      break;
    }
    Seg s = heap.top();
    heap.pop();
    const double mid = 0.5 * (s.a + s.b);
    if (mid <= s.a || mid >= s.b) {
      // interval exhausted at machine resolution; keep its contribution
      out.converged = false;
      break;
    }
    Seg l = detail::gk21<T>(f, s.a, mid);
    Seg r = detail::gk21<T>(f, mid, s.b);
    out.evaluations += 42;
    total += (l.value + r.value) - s.value;
    err += (l.error + r.error) - s.error;
    heap.push(l);
    heap.push(r);
    ++n;
  }
  // recompute the sum from scratch to drop accumulated cancellation noise
  T sum{};
  double esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  out.value = sum;
  out.abs_error = esum;
  return out;
}

template <typename F>
auto integrate(F&& f, double a, double b, const QuadOptions& opt = {}) {
  const std::array<double, 2> pts{a, b};
  return integrate(std::forward<F>(f), std::span<const double>(pts), opt);
}

/// Breakpoints a, a+w, a+2w, ... (w growing geometrically by `ratio`) up to b.
inline std::vector<double> geometric_breaks(double a, double b, double first_width, double ratio = 2.0) {
  std::vector<double> pts{a};
  double w = first_width;
  double x = a;
  while (x + w < b) {
    x += w;
    pts.push_back(x);
    w *= ratio;
  }
  pts.push_back(b);
  return pts;
}

/// Evenly spaced breakpoints.
inline std::vector<double> uniform_breaks(double a, double b, int n) {
  std::vector<double> pts(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) pts[static_cast<std::size_t>(i)] = a + (b - a) * i / n;
  pts.back() = b;
  return pts;
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on the three-term recurrence).
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(n - 1 - i)] = z;
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    w[static_cast<std::size_t>(i)] = wi;
    w[static_cast<std::size_t>(n - 1 - i)] = wi;
  }
}

}  // namespace flm
