#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "flm/levy_measure.hpp"

using namespace flm;
using Catch::Matchers::WithinRel;

namespace {

const double kInfty = std::numeric_limits<double>::infinity();

LevyMeasure two_atoms() { return LevyMeasure({{1.0, 1.0}, {-1.0, 1.0}}); }

LevyMeasure power_tails(double alpha) {
  return LevyMeasure({}, {{-kInfty, -1.0, PieceFamily::power, 1.0, alpha, 0.0},
                          {1.0, kInfty, PieceFamily::power, 1.0, alpha, 0.0}});
}

LevyMeasure dyadic(double H) {
  LevyMeasure mu({{-1.0, 1.0}});
  mu.dyadic = DyadicSeries{H, 60, 1.0};
  return mu;
}

}  // namespace

TEST_CASE("moment integrals", "[levy_measure]") {
  CHECK_THAT(moment_integral(two_atoms(), 4.0, Region::all).value, WithinRel(2.0, 1e-14));
  // one-sided Pareto: int_1^inf u^p alpha u^{-alpha-1} du = alpha / (alpha - p)
  const LevyMeasure right({}, {{1.0, kInfty, PieceFamily::power, 1.0, 1.5, 0.0}});
  CHECK_THAT(moment_integral(right, 0.8, Region::outer).value, WithinRel(1.5 / 0.7, 1e-9));
  CHECK(moment_integral(right, 4.0, Region::outer).infinite());
  CHECK_THAT(moment_integral(power_tails(1.5), 0.8, Region::outer).value, WithinRel(3.0 / 0.7, 1e-9));
}

TEST_CASE("existence condition", "[levy_measure]") {
  CHECK(check_existence(dyadic(0.25), 0.25));
  CHECK(check_existence(power_tails(1.5), 0.25));
  CHECK_FALSE(check_existence(power_tails(0.5), 0.25));
  CHECK(check_existence(two_atoms(), 0.75));
}

TEST_CASE("tail regime", "[levy_measure]") {
  CHECK(classify_tail_regime(two_atoms(), 0.25) == TailRegime::Regular);
  for (double H : {0.1, 0.25, 0.4}) CHECK(classify_tail_regime(dyadic(H), H) == TailRegime::ExtremelyHeavy);
  CHECK(classify_tail_regime(power_tails(1.5), 0.25) == TailRegime::ExtremelyHeavy);
  CHECK_THROWS_AS(classify_tail_regime(two_atoms(), 0.75), DomainError);
  CHECK_THROWS_AS(classify_tail_regime(power_tails(0.5), 0.25), DivergenceError);
}

TEST_CASE("exponential moments", "[levy_measure]") {
  CHECK(check_exponential_moments(two_atoms(), 5.0));
  CHECK_FALSE(check_exponential_moments(power_tails(1.5), 1.0));
  const LevyMeasure gauss({}, {{1.0, kInfty, PieceFamily::gaussian_tail, 1.0, 0.0, 0.0}});
  CHECK(check_exponential_moments(gauss, 10.0));
}

TEST_CASE("exponential moment M_k", "[levy_measure]") {
  const LevyMeasure one({{1.0, 1.0}});
  CHECK_THAT(exp_moment_Mk(one, 2, 0.0), WithinRel(1.0, 1e-14));
  CHECK_THAT(exp_moment_Mk(one, 4, 2.0), WithinRel(std::exp(2.0), 1e-14));
  CHECK_THAT(exp_moment_Mk(two_atoms(), 2, 1.0), WithinRel(std::exp(1.0) + std::exp(-1.0), 1e-14));
  // Gaussian tail on [1, inf): int u^2 e^{u} e^{-u^2} du by a plain Simpson oracle
  const LevyMeasure gauss({}, {{1.0, kInfty, PieceFamily::gaussian_tail, 1.0, 0.0, 0.0}});
  double acc = 0.0;
  const int n = 20000;
  const double a = 1.0, b = 12.0, h = (b - a) / n;
  for (int i = 0; i <= n; ++i) {
    const double u = a + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * u * u * std::exp(u - u * u);
  }
  CHECK_THAT(exp_moment_Mk(gauss, 2, 1.0), WithinRel(acc * h / 3.0, 1e-8));
  CHECK_THROWS_AS(exp_moment_Mk(one, 1, 0.0), DomainError);
}

TEST_CASE("M_k derivative and monotonicity", "[levy_measure]") {
  const LevyMeasure gauss({{-0.5, 2.0}}, {{1.0, kInfty, PieceFamily::gaussian_tail, 1.0, 0.0, 0.0}});
  double prev = 0.0;
  for (double xi : {0.0, 1.0, 3.0, 6.0}) {
    const double m2 = exp_moment_Mk(gauss, 2, xi);
    CHECK(m2 > prev);
    prev = m2;
    const double h = 1e-4;
    const double d = (exp_moment_Mk(gauss, 2, xi + h) - exp_moment_Mk(gauss, 2, xi - h)) / (2.0 * h);
    CHECK_THAT(d, WithinRel(exp_moment_Mk(gauss, 3, xi), 1e-6));
  }
}

TEST_CASE("long-memory growth conditions", "[levy_measure]") {
  // delta_1: M_k = e^xi, so ratio3 = e^{(1 - 2 gamma) xi} and ratio4 = ln xi / xi
  const std::vector<double> xi{4.0, 8.0, 16.0, 32.0};
  const auto g = growth_conditions(LevyMeasure({{1.0, 1.0}}), 0.75, xi);
  REQUIRE(g.rows.size() == 4);
  CHECK_THAT(g.rows[0].ratio3, WithinRel(std::exp(-2.0), 1e-12));
  CHECK_THAT(g.rows[3].ratio4, WithinRel(std::log(32.0) / 32.0, 1e-12));
  CHECK(g.cond3_decreasing);
  CHECK(g.cond4_decreasing);
  // gamma below 1/2 breaks condition 3 for a single atom
  CHECK_FALSE(growth_conditions(LevyMeasure({{1.0, 1.0}}), 0.4, xi).cond3_decreasing);
  CHECK_THROWS_AS(growth_conditions(LevyMeasure({{1.0, 1.0}}), 1.0, xi), DomainError);
}

TEST_CASE("moment integral against brute-force truncation", "[levy_measure]") {
  // int_1^R u^{0.8} 1.5 u^{-2.5} du, doubling R until the change is below 1e-10
  const LevyMeasure right({}, {{1.0, kInfty, PieceFamily::power, 1.0, 1.5, 0.0}});
  double prev = -1.0, cur = 0.0;
  for (double R = 2.0; std::abs(cur - prev) > 1e-10; R *= 2.0) {
    prev = cur;
    const double lo = 0.0, hi = std::log(R);
    const int n = 4000;
    const double h = (hi - lo) / n;
    cur = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double v = lo + i * h, w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      cur += w * 1.5 * std::exp(-0.7 * v);
    }
    cur *= h / 3.0;
  }
  CHECK_THAT(moment_integral(right, 0.8, Region::outer).value, WithinRel(cur, 1e-8));
}

TEST_CASE("integral conditions", "[levy_measure]") {
  const auto r = check_integral_conditions(LevyMeasure({{1.0, 1.0}}), 0.25);
  CHECK(r.I1.finite);
  CHECK(r.I2.finite);
  const auto h = check_integral_conditions(power_tails(0.5), 0.25);
  CHECK_FALSE(h.I1.finite);
  CHECK_THROWS_AS(check_integral_conditions(LevyMeasure{}, 0.25), DomainError);
}

TEST_CASE("measure validation", "[levy_measure]") {
  CHECK_THROWS_AS(LevyMeasure({{0.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(LevyMeasure({{1.0, -1.0}}), DomainError);
  CHECK_THROWS_AS(LevyMeasure({}, {{-1.0, 1.0, PieceFamily::power, 1.0, 1.5, 0.0}}), DomainError);
  CHECK(LevyMeasure{}.empty());
}

TEST_CASE("reflection", "[levy_measure]") {
  const auto r = power_tails(1.5).reflected();
  CHECK(r.pieces.size() == 2);
  CHECK(r.pieces[0].lo == 1.0);
  CHECK(r.pieces[1].lo == -kInfty);
  const auto d = dyadic(0.25).reflected();
  CHECK_FALSE(d.dyadic);
  CHECK(d.atoms.size() == 62);
  CHECK(d.atoms[0].location == 1.0);
}
