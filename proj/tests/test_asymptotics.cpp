#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "flm/asymptotics.hpp"

using namespace flm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Model two_atoms() { return Model(LevyMeasure({{1.0, 1.0}, {-1.0, 1.0}}), 0.25, 1.0); }

Model pareto() { return Model(power_tail_measure({1.5, 1.0, 1.0}), 0.25, 1.0); }

}  // namespace

TEST_CASE("regime classification", "[asymptotics]") {
  CHECK(classify(two_atoms()) == Regime::Thm22_ii);
  CHECK(classify(pareto()) == Regime::Thm22_i);
  CHECK(classify(Model(LevyMeasure({{1.0, 1.0}}), 0.75)) == Regime::Thm21);
  for (Regime r : {Regime::Thm21, Regime::Thm22_i, Regime::Thm22_ii, Regime::Ex41})
    CHECK(regime_from_string(to_string(r)) == r);
  CHECK_THROWS_AS(regime_from_string("nope"), ConfigError);
}

TEST_CASE("power-tail integrals against a pushforward oracle", "[asymptotics]") {
  // alpha int |f(1,s)|^alpha ds over s in (0,1) and s < 0 (mpmath, 30 digits)
  const Kernel k(0.25);
  CHECK_THAT(phi_integral_plus(k, 1.5), WithinRel(1.7692351069287721, 1e-10));
  CHECK_THAT(phi_integral_minus(k, 1.5), WithinRel(0.50530496829796335, 1e-9));
  CHECK_THROWS_AS(phi_integral_plus(k, 0.5), DomainError);
  CHECK_THROWS_AS(phi_integral_plus(Kernel(0.75), 1.5), RegimeError);
}

TEST_CASE("heavy asymptote at t = 1 is the profile", "[asymptotics]") {
  const auto m = pareto();
  for (double x : {10.0, 1e3}) CHECK_THAT(thm22_heavy_asymptote(m, 1.0, x), WithinRel(mathfrak_m(m, x), 1e-14));
  CHECK_THROWS_AS(thm22_heavy_asymptote(m, 1.0, -1.0), DomainError);
}

TEST_CASE("power-tail asymptote scaling in t and x", "[asymptotics]") {
  const Kernel k(0.25);
  const PowerTail p{1.5, 1.0, 1.0};
  const double a1 = ex41_asymptote(k, 1.0, 1e3, p), a2 = ex41_asymptote(k, 2.0, 1e3, p);
  CHECK_THAT(a2 / a1, WithinRel(std::pow(2.0, 0.625), 1e-13));
  CHECK_THAT(ex41_asymptote(k, 1.0, 2e3, p) / a1, WithinRel(std::pow(2.0, -2.5), 1e-13));
  // the profile asymptote matches the t = 1 density asymptote
  CHECK_THAT(power_tail_profile_asymptote(k, p, 1e3), WithinRel(a1, 1e-13));
  // and the exact profile approaches it
  CHECK_THAT(mathfrak_m(pareto(), 1e3) / a1, WithinAbs(1.0, 1e-4));
}

TEST_CASE("regular asymptote", "[asymptotics]") {
  const auto m = two_atoms();
  const double x = 100.0;
  // c_H int |u|^4 mu(du) x^{-5} at H = 1/4; the moment is 2 for unit atoms at +-1
  CHECK_THAT(thm22_regular_asymptote(m, x) * std::pow(x, 5.0), WithinRel(2.0 * 1.7738823371562308, 1e-12));
  CHECK_THAT(thm22_regular_tail(m, x), WithinRel(thm22_regular_asymptote(m, x) * x / 4.0, 1e-14));
  CHECK_THROWS_AS(thm22_regular_asymptote(Model(LevyMeasure({{1.0, 1.0}}), 0.25, 1.0), x), RegimeError);
}

TEST_CASE("compare reports", "[asymptotics]") {
  const auto m = two_atoms();
  const std::vector<TimePoint> none;
  CHECK(compare(m, Regime::Thm22_ii, none).rows.empty());
  const std::vector<TimePoint> pts{{1.0, 100.0}};
  const auto rep = compare(m, Regime::Thm22_ii, pts);
  REQUIRE(rep.rows.size() == 1);
  CHECK_THAT(rep.rows[0].ratio, WithinAbs(1.0, 0.15));
  CHECK(rep.rows[0].err < 1e-3 * rep.rows[0].exact);
  CHECK_THROWS_AS(compare(m, Regime::Thm21, pts), RegimeError);
  CHECK_THROWS_AS(compare(pareto(), Regime::Ex41, pts), ConfigError);
}

TEST_CASE("long-memory log asymptote", "[asymptotics]") {
  const Model m(LevyMeasure({{1.0, 1.0}}), 0.75);
  const std::vector<TimePoint> pts{{1.0, 20.0}};
  const auto rep = compare(m, Regime::Thm21, pts);
  REQUIRE(rep.rows.size() == 1);
  CHECK_THAT(rep.rows[0].ratio, WithinAbs(1.0, 0.05));
  CHECK_THROWS_AS(thm21_log_asymptote(two_atoms(), 1.0, 20.0), RegimeError);
}
