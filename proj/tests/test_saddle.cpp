#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "flm/acceptance.hpp"
#include "flm/saddle.hpp"

using namespace flm;
using Catch::Matchers::WithinRel;

namespace {

Model negative_atom() { return Model(LevyMeasure({{-1.0, 1.0}}), 0.25, 1.0); }
Model long_memory() { return Model(LevyMeasure({{1.0, 1.0}}), 0.75); }

}  // namespace

TEST_CASE("image and direct routes agree", "[saddle]") {
  const auto m = negative_atom();
  for (int k = 0; k <= 3; ++k)
    for (double z : {0.01, 1.0, 5.0}) CHECK_THAT(mk_image(m, k, z), WithinRel(mk_direct(m, k, z), 1e-10));
}

TEST_CASE("M_1 is strictly increasing", "[saddle]") {
  for (const auto& m : {negative_atom(), long_memory()}) {
    double prev = -1e300;
    for (double z = 0.05; z < 12.0; z *= 1.4) {
      const double v = mk_unit(m, 1, z);
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("d M_k / d xi = M_{k+1}", "[saddle]") {
  for (const auto& m : {negative_atom(), long_memory()})
    for (int k = 0; k <= 2; ++k)
      for (double z : {0.5, 2.0, 6.0}) {
        const double h = 1e-4 * z;
        const double d = (mk_unit(m, k, z + h) - mk_unit(m, k, z - h)) / (2.0 * h);
        CHECK_THAT(d, WithinRel(mk_unit(m, k + 1, z), 1e-5));
      }
}

TEST_CASE("saddle residual and uniqueness", "[saddle]") {
  const auto m = negative_atom();
  const double x = 200.0;
  const auto s = solve_saddle(m, 1.0, x);
  CHECK(s.residual <= 1e-10 * x);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int i = 0; i < 10; ++i) {
    const auto r = solve_saddle(m, 1.0, x, MkRoute::automatic, std::exp(u(rng)));
    CHECK_THAT(r.xi, WithinRel(s.xi, 1e-9));
  }
}

TEST_CASE("saddle time scaling against a direct time-t integral", "[saddle]") {
  const auto m = negative_atom();
  for (double t : {0.5, 3.0}) {
    const auto s = solve_saddle(m, t, 20.0);
    CHECK_THAT(battery::m1_delta_minus(m, t, s.xi), WithinRel(20.0, 1e-8));
    const auto s1 = solve_saddle(m, 1.0, 20.0 * std::pow(t, -0.75));
    CHECK_THAT(s.xi, WithinRel(s1.zeta * std::pow(t, 0.25), 1e-12));
  }
}

TEST_CASE("x must exceed x_t", "[saddle]") {
  const auto m = long_memory();
  CHECK(x_t_bound(m, 1.0) == 0.0);
  CHECK_THROWS_AS(solve_saddle(m, 1.0, 0.0), DomainError);
  CHECK(solve_saddle(m, 1.0, 1e-3).xi < solve_saddle(m, 1.0, 1e-2).xi);
}

TEST_CASE("zeta lambda / ln x trend", "[saddle]") {
  // The ratio approaches 1 slowly: 1 + (ln zeta + 2.37) / ln x.
  const auto m = negative_atom();
  const std::vector<double> xs{1e3, 1e4, 1e5, 1e6};
  const auto rows = saddle_asymptote_check(m, xs);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].zeta_ratio < rows[i - 1].zeta_ratio);
  CHECK_THAT(rows.back().zeta_ratio, WithinRel(1.377, 2e-3));
  CHECK(saddle_asymptote_check(m, std::vector<double>{50.0}).size() == 1);
}

TEST_CASE("long-memory saddle quantities", "[saddle]") {
  const auto m = long_memory();
  const double t = 5.0, x = 10.0 * std::pow(t, 1.25);
  const auto s = solve_saddle(m, t, x);
  CHECK(s.residual <= 1e-10 * x);
  CHECK_THAT(m_k(m, t, 1, s.xi), WithinRel(x, 1e-10));
  CHECK(s.K > 0.0);
}
