#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "flm/charfn.hpp"

using namespace flm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Model two_atoms() { return Model(LevyMeasure({{1.0, 1.0}, {-1.0, 1.0}}), 0.25, 1.0); }

// Per-jump exponent K(W) at H = 1/4 from mpmath (see test_kernel).
const cplx kK1{-0.63895517020137541, 0.21678164974091575};
const cplx kK5{-1.8797845398532657, 4.9739511723343068};

}  // namespace

TEST_CASE("Psi at z = 0 vanishes", "[charfn]") {
  const auto m = two_atoms();
  CHECK(std::abs(psi(m, 1.0, 0.0)) == 0.0);
  CHECK(std::abs(psi(Model(LevyMeasure({{1.0, 1.0}}), 0.75), 2.0, 0.0)) == 0.0);
}

TEST_CASE("Psi against the per-jump oracle", "[charfn]") {
  // Psi(1, z) = sum_u mass K(z u); K(-W) = conj K(W)
  CHECK(std::abs(psi(two_atoms(), 1.0, 1.0) - 2.0 * kK1.real()) <= 1e-10);
  const Model one(LevyMeasure({{1.0, 1.0}}), 0.25, 1.0);
  CHECK(std::abs(psi(one, 1.0, 5.0) - kK5) <= 1e-10 * std::abs(kK5));
  CHECK(std::abs(psi(one, 1.0, -1.0) - std::conj(kK1)) <= 1e-10 * std::abs(kK1));
}

TEST_CASE("Psi is Hermitian", "[charfn]") {
  const Model m(LevyMeasure({{1.0, 2.0}, {-0.5, 1.0}}), 0.3, 1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ut(0.2, 3.0), uz(0.01, 20.0);
  for (int i = 0; i < 10; ++i) {
    const double t = ut(rng), z = uz(rng);
    const auto a = psi(m, t, z), b = psi(m, t, -z);
    CHECK(std::abs(a - std::conj(b)) <= 1e-12 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("Psi time scaling", "[charfn]") {
  const auto m = two_atoms();
  for (double t : {0.5, 2.0, 7.0})
    for (double z : {0.3, 4.0}) {
      const auto a = psi(m, t, z), b = t * psi(m, 1.0, std::pow(t, -0.25) * z);
      CHECK(std::abs(a - b) <= 1e-11 * std::abs(a));
    }
}

TEST_CASE("Psi for a continuous piece against a Simpson oracle", "[charfn]") {
  // mu(du) = u^{-2.5} e^{-u} du on [1, 3]; Psi(1, z) = int K(z u) mu(du)
  const LevyMeasure mu({}, {{1.0, 3.0, PieceFamily::exp_tilted_power, 1.0, 1.5, 1.0}});
  const Model m(mu, 0.25, 1.0);
  const Kernel k(0.25);
  const double z = 2.0;
  const int n = 400;
  const double h = 2.0 / n;
  cplx acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = 1.0 + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * exp_kernel_full(k, z * u) * std::pow(u, -2.5) * std::exp(-u);
  }
  acc *= h / 3.0;
  CHECK(std::abs(psi(m, 1.0, z) - acc) <= 1e-8 * std::abs(acc));
}

TEST_CASE("psi1 + psi2 = Psi(t, -z)", "[charfn]") {
  const auto m = two_atoms();
  for (double t : {1.0, 2.0})
    for (double z : {0.3, 5.0, 30.0}) {
      const auto s = psi_split(m, t, z);
      const auto full = psi(m, t, -z);
      CHECK(std::abs(s.psi1 + s.psi2 - full) <= 1e-10 * (1.0 + std::abs(full)));
    }
}

TEST_CASE("profile m(r) tail constant", "[charfn]") {
  const auto m = two_atoms();
  const double v = std::pow(1e3, 5) * mathfrak_m(m, 1e3);
  CHECK_THAT(v, WithinRel(2.0 * m.kernel().c_H(), 0.01));
  CHECK_THAT(v, WithinRel(3.540544, 1e-6));
}

TEST_CASE("m_t support and mass", "[charfn]") {
  const auto m = two_atoms();
  for (double t : {1.0, 2.0}) {
    const double edge = m.lambda() * m.chi(t);
    CHECK(m_t_density(m, t, 0.99 * edge) == 0.0);
    CHECK(m_t_density(m, t, 1.01 * edge) > 0.0);
    CHECK_THAT(pushforward_oracle(m, t, [](double) { return 1.0; }), WithinRel(t * m.Lambda(), 1e-10));
    CHECK_THAT(pushforward_oracle(m, t, [&](double x) { return x > 0.0 && x < edge ? 1.0 : 0.0; }),
               WithinAbs(0.0, 1e-14));
  }
}

TEST_CASE("pushforward equals int g m_t", "[charfn]") {
  const auto m = two_atoms();
  auto g = [](double x) { return std::exp(-x); };
  const double a = integrate_m_t(m, 1.0, g), b = pushforward_oracle(m, 1.0, g);
  CHECK_THAT(a, WithinRel(b, 1e-6));
}

TEST_CASE("theta", "[charfn]") {
  const auto m = two_atoms();
  CHECK(theta(m, 1.0, 0.0, {0.0, 1e300}) == 0.0);
  const double inf = std::numeric_limits<double>::infinity();
  const double whole = theta(m, 1.0, 3.0, {-inf, inf});
  const double part = theta(m, 1.0, 3.0, {0.0, inf});
  CHECK(whole > part);
  CHECK(part > 0.0);
  // Theta over R is -Re psi1 (the compensator term is imaginary)
  CHECK_THAT(whole, WithinRel(-psi1(m, 1.0, cplx(3.0, 0.0)).real(), 1e-9));
}

TEST_CASE("truncation level check", "[charfn]") {
  CHECK_NOTHROW(validate_lambda(two_atoms()));
  CHECK_THROWS_AS(validate_lambda(Model(LevyMeasure({{1.0, 1.0}}), 0.75)), RegimeError);
}

TEST_CASE("empty measure is rejected", "[charfn]") {
  CHECK_THROWS_AS(Model(LevyMeasure{}, 0.25), DomainError);
}
