#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "flm/asymptotics.hpp"
#include "flm/density.hpp"

using namespace flm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Model two_atoms() { return Model(LevyMeasure({{1.0, 1.0}, {-1.0, 1.0}}), 0.25, 1.0); }

}  // namespace

TEST_CASE("exponent table against the per-jump oracle", "[density]") {
  // L(zeta) = Psi(1, -zeta) = 2 Re K(zeta) for atoms at +-1 (mpmath K values)
  const auto m = two_atoms();
  const ExponentTable tab(m, Exponent::full, 1.0);
  const std::pair<double, double> ref[] = {
      {0.3, -0.13875835521826466}, {1.0, -1.2779103404027508}, {5.0, -3.7595690797065315}};
  for (const auto& [z, v] : ref) {
    CHECK_THAT(tab(z).real(), WithinRel(v, 1e-9));
    CHECK(std::abs(tab(z).imag()) <= 1e-12);
  }
  CHECK(tab.zeta_max() > 5.0);
}

TEST_CASE("p_1 is a symmetric probability density", "[density]") {
  const auto m = two_atoms();
  const ExponentTable tab(m, Exponent::full, 1.0);
  const auto g = density_grid(tab, 1.0, -40.0, 40.0, 4001);
  REQUIRE(g.x_values.size() == 4001);
  REQUIRE(g.p_values.size() == 4001);
  REQUIRE(g.err_values.size() == 4001);
  CHECK_THAT(g.mass(), WithinAbs(1.0, 1e-4));
  for (std::size_t i = 0; i < 4001; i += 250) CHECK_THAT(g.p_values[i], WithinAbs(g.p_values[4000 - i], 1e-12));
  const auto tm = total_mass(tab, 1.0, 40.0, 4001);
  CHECK_THAT(tm.value, WithinAbs(1.0, 1e-5));
  CHECK(tm.left_tail > 0.0);
  CHECK_THAT(tm.left_tail, WithinRel(tm.right_tail, 1e-6));
}

TEST_CASE("p_1(0) regression and decomposition", "[density]") {
  // Frozen from the Fourier inversion; the compound Poisson route is an
  // independent check of the same number.
  const auto m = two_atoms();
  const auto v = density_fourier(m, 1.0, 0.0);
  CHECK_THAT(v.value, WithinRel(0.29208261821, 1e-9));
  CHECK(v.err < 1e-10);
  const std::vector<double> xs{0.0, 3.0};
  const auto c = compose_density(m, 1.0, xs);
  CHECK_THAT(c[0].total(), WithinRel(v.value, 1e-3));
  CHECK_THAT(c[1].total(), WithinRel(density_fourier(m, 1.0, 3.0).value, 1e-3));
}

TEST_CASE("truncated density p~ integrates to 1", "[density]") {
  const auto m = two_atoms();
  const auto g = density_grid(m, Exponent::truncated, 1.0, -40.0, 40.0, 4001);
  CHECK_THAT(g.mass(), WithinAbs(1.0, 1e-6));
  CHECK_THROWS_AS(density_grid(m, Exponent::truncated, 1.0, 1.0, -1.0, 11), DomainError);
  CHECK_THROWS_AS(density_grid(m, Exponent::truncated, 1.0, -1.0, 1.0, 1), DomainError);
}

TEST_CASE("rho_t has mass 1 - exp(-t Lambda)", "[density]") {
  // trapezoid from the first non-zero node (rho_t jumps at the cutoff); the
  // O(h^2) quadrature error is removed by combining spacings h and h/2
  const auto m = two_atoms();
  auto mass = [&](double t, int ppc) {
    RhoOptions o;
    o.points_per_cutoff = ppc;
    o.richardson = false;
    const auto r = rho_series(m, t, o);
    std::size_t i0 = 0;
    while (r.values[i0] == 0.0) ++i0;
    double acc = 0.5 * (r.values[i0] + r.values.back());
    for (std::size_t i = i0 + 1; i + 1 < r.values.size(); ++i) acc += r.values[i];
    return r.h * acc;
  };
  for (double t : {1.0, 2.0}) {
    const double want = -std::expm1(-t * m.Lambda());
    CHECK_THAT((4.0 * mass(t, 128) - mass(t, 64)) / 3.0, WithinAbs(want, 1e-6));
  }
  CHECK(rho_series(m, 1.0).terms >= 1);
}

TEST_CASE("rho_t is one jump when t Lambda is small", "[density]") {
  // lambda = 20 leaves t Lambda ~ 1e-5: rho_t ~ e^{-t Lambda} m_t
  const Model m(LevyMeasure({{1.0, 1.0}, {-1.0, 1.0}}), 0.25, 20.0);
  REQUIRE(m.Lambda() < 1e-3);
  RhoOptions ro;
  ro.x_max = 60.0;
  const auto r = rho_series(m, 1.0, ro);
  const std::size_t i = static_cast<std::size_t>(30.0 / r.h);
  const double one = std::exp(-m.Lambda()) * mathfrak_m(m, r.x(i));
  CHECK_THAT(r.values[i], WithinRel(one, 1e-2));
}

TEST_CASE("rho_t is tail-equivalent to m_t for power tails", "[density]") {
  // lambda = 4 keeps t Lambda ~ 0.19, so the subexponential limit is near by x = 100
  const Model m(power_tail_measure({1.5, 1.0, 1.0}), 0.25, 4.0);
  RhoOptions o;
  o.x_max = 100.0;
  o.points_per_cutoff = 16;
  const auto r = rho_series(m, 1.0, o);
  const std::size_t i = r.values.size() - 1;
  CHECK_THAT(r.values[i] / mathfrak_m(m, r.x(i)), WithinAbs(1.0, 0.1));
}

TEST_CASE("jumps dominate the no-jump term far out", "[density]") {
  const auto m = two_atoms();
  const double x = 100.0;
  const double lp = log_density_tilted(m, Exponent::truncated, 1.0, x + m.a(1.0)).log_value;
  const double p = density_fourier(m, 1.0, x).value;
  CHECK(std::exp(-m.Lambda() + lp) < 0.1 * p);
  CHECK_THAT(p / thm22_regular_asymptote(m, x), WithinAbs(1.0, 0.15));
}

TEST_CASE("subexponential diagnostics", "[density]") {
  // Pareto 4 x^{-5} on [1, inf): (g*g)/g -> 2
  const double dx = 0.01;
  std::vector<double> par, ex;
  for (int i = 0; i <= 40000; ++i) {
    const double x = 1.0 + dx * i;
    par.push_back(4.0 * std::pow(x, -5.0));
  }
  const auto rp = subexp_test(1.0, dx, par, 400.0);
  REQUIRE_FALSE(rp.empty());
  CHECK_THAT(rp.back().conv_ratio, WithinRel(2.0, 0.1));
  CHECK_THAT(rp.back().shift_ratio[2], WithinRel(1.0, 0.15));
  // exponential: (g*g)/g = x grows without bound
  for (int i = 0; i <= 20000; ++i) ex.push_back(std::exp(-dx * i));
  const auto re = subexp_test(0.0, dx, ex, 200.0);
  CHECK(re.back().conv_ratio > 100.0);
  CHECK(re.back().shift_ratio[0] > 2.0);
  CHECK_THROWS_AS(subexp_test(0.0, 0.0, ex, 1.0), DomainError);
}

TEST_CASE("shift ratio test", "[density]") {
  const std::vector<double> xs{1e2, 1e3, 1e4};
  CHECK(shift_ratio_test([](double x) { return std::pow(x, -3.0); }, xs, 5.0).passes);
  CHECK_FALSE(shift_ratio_test([](double x) { return std::exp(-x); }, xs, 5.0).passes);
}

TEST_CASE("slow decay is reported", "[density]") {
  InversionOptions opt;
  opt.zeta_cap = 10.0;
  CHECK_THROWS_AS(ExponentTable(two_atoms(), Exponent::full, 1.0, 0.0, opt), SlowDecayError);
}
