#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <vector>

#include "flm/density.hpp"
#include "flm/simulate.hpp"

using namespace flm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Model two_atoms() { return Model(LevyMeasure({{1.0, 1.0}, {-1.0, 1.0}}), 0.25, 1.0); }

SimConfig small(std::size_t n, std::uint64_t seed = 1) {
  SimConfig c;
  c.n_samples = n;
  c.seed = seed;
  c.threads = 1;
  return c;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

}  // namespace

TEST_CASE("samples do not depend on the thread count", "[simulate]") {
  const auto m = two_atoms();
  auto c = small(30000, 5);
  const auto a = sample(m, 1.0, c);
  c.threads = 3;
  const auto b = sample(m, 1.0, c);
  CHECK(a == b);
  c.seed = 6;
  CHECK(sample(m, 1.0, c) != a);
}

TEST_CASE("first two moments", "[simulate]") {
  // symmetric jumps: mean 0, variance 2 int f(1,s)^2 ds
  const auto m = two_atoms();
  const auto x = sample(m, 1.0, small(200000));
  const double mu = mean(x);
  double var = 0.0;
  for (double v : x) var += (v - mu) * (v - mu);
  var /= static_cast<double>(x.size() - 1);
  const double want = 2.0 * detail::kernel_sq_integral(m.kernel(), 1.0, -detail::kInf, 1.0);
  CHECK(std::abs(mu) < 4.0 * std::sqrt(want / x.size()));
  CHECK_THAT(var, WithinRel(want, 0.05));
}

TEST_CASE("empirical density near the origin", "[simulate]") {
  const auto m = two_atoms();
  const auto x = sample(m, 1.0, small(200000, 2));
  const std::vector<double> grid{-1.0, 0.0, 1.0};
  const auto e = empirical_density(x, 0.1, grid);
  REQUIRE(e.p.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = density_fourier(m, 1.0, grid[i]).value;
    CHECK(std::abs(e.p[i] - exact) < 4.0 * e.se[i] + 2e-3);
  }
}

TEST_CASE("long-memory samples", "[simulate]") {
  const Model m(LevyMeasure({{1.0, 1.0}}), 0.75);
  const auto x = sample(m, 1.0, small(50000, 3));
  double var = 0.0;
  for (double v : x) var += v * v;
  var /= static_cast<double>(x.size());
  CHECK(std::abs(mean(x)) < 4.0 * std::sqrt(var / x.size()));
}

TEST_CASE("gaussian small-jump substitute", "[simulate]") {
  // continuous piece on [1e-3, 1] plus an atom; only |u| <= eps changes
  const LevyMeasure mu({{1.0, 1.0}}, {{1e-3, 1.0, PieceFamily::power, 0.1, 0.5, 0.0}});
  const Model m(mu, 0.25, 1.0);
  auto c = small(50000, 4);
  c.eps = 0.1;
  const auto a = sample(m, 1.0, c);
  c.mode = SmallJumpMode::gaussian_substitute;
  const auto b = sample(m, 1.0, c);
  CHECK(a != b);
  CHECK_THAT(mean(a) - mean(b), WithinAbs(0.0, 0.05));
}

TEST_CASE("no jumps above eps gives a pure normal", "[simulate]") {
  // atoms below eps only: every sample is N(0, int f^2 * int u^2 mu)
  const Model m(LevyMeasure({{0.01, 1.0}, {-0.02, 2.0}}), 0.25, 1.0);
  auto c = small(200000, 8);
  c.eps = 0.05;
  c.mode = SmallJumpMode::gaussian_substitute;
  const Sampler sp(m, 1.0, c);
  const double var = detail::kernel_sq_integral(m.kernel(), 1.0, sp.s_min(), 1.0) * 9e-4;
  CHECK_THAT(sp.small_variance(), WithinRel(var, 1e-10));
  const auto x = sample(m, 1.0, c);
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    m2 += v * v;
    m4 += v * v * v * v;
  }
  m2 /= x.size();
  m4 /= x.size();
  CHECK_THAT(m2, WithinRel(var, 0.02));
  CHECK_THAT(m4 / (m2 * m2), WithinAbs(3.0, 0.1));
}

TEST_CASE("empirical density integrates to 1", "[simulate]") {
  const auto x = sample(two_atoms(), 1.0, small(100000, 9));
  const double lo = *std::min_element(x.begin(), x.end()), hi = *std::max_element(x.begin(), x.end());
  const double h = 0.25;
  std::vector<double> grid;
  for (double g = lo; g < hi + h; g += h) grid.push_back(g);
  const auto e = empirical_density(x, h, grid);
  double mass = 0.0;
  for (double p : e.p) mass += p * h;
  CHECK_THAT(mass, WithinAbs(1.0, 1.0 / std::sqrt(100000.0)));
}

TEST_CASE("eps and window refinement stay within the standard error", "[simulate]") {
  // atoms at +-1 plus small jumps u^{-1.5} du on [1e-4, 0.5] (both signs)
  const LevyMeasure mu({{1.0, 1.0}, {-1.0, 1.0}}, {{1e-4, 0.5, PieceFamily::power, 0.1, 0.5, 0.0},
                                                   {-0.5, -1e-4, PieceFamily::power, 0.1, 0.5, 0.0}});
  const Model m(mu, 0.25, 1.0);
  const std::vector<double> grid{-1.0, 0.0, 1.0};
  auto est = [&](double eps, double s_min) {
    auto c = small(200000, 10);
    c.eps = eps;
    c.s_min = s_min;
    return empirical_density(sample(m, 1.0, c), 0.1, grid);
  };
  const double s_min = Sampler(m, 1.0, small(1)).s_min();
  const auto base = est(0.01, 0.0), half = est(0.005, 0.0), wide = est(0.01, 2.0 * s_min);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(base.p[i] - half.p[i]) < 3.0 * std::hypot(base.se[i], half.se[i]));
    CHECK(std::abs(base.p[i] - wide.p[i]) < 3.0 * std::hypot(base.se[i], wide.se[i]));
  }
}

TEST_CASE("exceedances and estimator guards", "[simulate]") {
  const std::vector<double> v{-1.0, 0.5, 2.0, 3.0};
  CHECK(exceedances(v, 1.0) == 2);
  CHECK(exceedances(v, 5.0) == 0);
  const std::vector<double> grid{0.0};
  std::vector<double> many(20000, 0.0);
  CHECK_THROWS_AS(empirical_density(many, 0.0, grid), DomainError);
  CHECK_THROWS_AS(empirical_density(v, 0.1, grid), DomainError);
  CHECK_THAT(empirical_density(many, 0.5, grid).p[0], WithinRel(2.0, 1e-15));
}

TEST_CASE("binary sample round trip", "[simulate]") {
  const auto path = (std::filesystem::temp_directory_path() / "flm_samples_test.bin").string();
  const std::vector<double> v{0.0, -1.5, 1e300, 3.141592653589793};
  write_binary_le(path, v);
  CHECK(std::filesystem::file_size(path) == 32);
  CHECK(read_binary_le(path) == v);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_binary_le(path), ConfigError);
}
