#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hcl/fuchsian.hpp"
#include "hcl/types.hpp"

using namespace hcl;
using namespace hcl::fuchsian;

TEST_CASE("exponents") {
  const ExponentScheme tve = exponents_from_nu(1.0, 6.0);
  CHECK(tve.rho[0] == doctest::Approx(1.0));
  CHECK(tve.rho[1] == doctest::Approx(0.5));
  CHECK(tve.rho[2] == doctest::Approx(2.5));

  const double s = 2.0, b1 = 1.3;
  const ExponentScheme nve = exponents_from_nu(s, 2 * b1);
  CHECK(nve.rho[0] == doctest::Approx(std::sqrt(s)));
  CHECK(nve.rho[2] == doctest::Approx(std::sqrt(8 * b1 + 1) / 2));

  std::mt19937 rng(99u);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int k = 0; k < 100; ++k) {
    const ExponentScheme e = exponents_from_nu(u(rng), u(rng));
    CHECK(std::abs(e.exponent_sum() - 1.0) < 1e-12);
    CHECK(e.rho[0] == doctest::Approx(e.s0_plus - e.s0_minus));
    CHECK(e.rho[1] == doctest::Approx(e.s1_plus - e.s1_minus));
    CHECK(e.rho[2] == doctest::Approx(e.sinf_plus - e.sinf_minus));
  }
  const ExponentScheme r = scheme_from_rho(1.0, 0.5, 2.5);
  CHECK(std::abs(r.exponent_sum() - 1.0) < 1e-12);
  CHECK(r.rho[2] == 2.5);

  CHECK_THROWS_AS(exponents_from_nu(-1.0, 2.0), DomainError);
  CHECK_THROWS_AS(exponents_from_nu(1.0, -1.0), DomainError);
}

TEST_CASE("kimura criterion") {
  const KimuraVerdict tve = kimura_triangularizable(scheme_from_rho(1.0, 0.5, 2.5));
  CHECK(tve.triangularizable);
  REQUIRE(tve.witness >= 0);
  CHECK(combination_labels()[static_cast<std::size_t>(tve.witness)] == "rho1-rho2+rho3");
  CHECK(tve.witness_value == doctest::Approx(3.0));

  const KimuraVerdict irr = kimura_triangularizable(scheme_from_rho(std::sqrt(2.0), 0.5, 0.5));
  CHECK_FALSE(irr.triangularizable);
  CHECK(irr.witness == -1);

  std::mt19937 rng(5u);
  std::uniform_real_distribution<double> u(0.05, 6.0);
  for (int k = 0; k < 200; ++k) {
    std::array<double, 3> rho{u(rng), 0.5, u(rng)};
    if (k % 2 == 0) rho[2] = 2.0 * (k % 7) + 1.0 + 0.5 - rho[0];  // force rho1 - rho2 + rho3 odd
    const bool base = kimura_triangularizable(scheme_from_rho(rho[0], rho[1], rho[2])).triangularizable;
    for (int j = 0; j < 3; ++j) {
      auto flipped = rho;
      flipped[j] = -flipped[j];
      CHECK(kimura_triangularizable(scheme_from_rho(flipped[0], flipped[1], flipped[2])).triangularizable == base);
    }
    CHECK(kimura_triangularizable(scheme_from_rho(rho[0], rho[1], rho[2]), 1e-6).triangularizable == base);
  }
  CHECK_THROWS_AS(kimura_triangularizable(scheme_from_rho(1, 0.5, 2.5), 0.0), DomainError);
  CHECK_THROWS_AS(kimura_triangularizable(scheme_from_rho(1, 0.5, 2.5), 0.1), DomainError);
}

TEST_CASE("resonance condition") {
  CHECK(std::abs(resonance_beta1(2, 0) - 1.7071068) < 5e-7);
  CHECK(std::abs(resonance_beta1(2, 2) - 7.5355339) < 5e-7);
  CHECK(std::abs(resonance_beta1(2, 4) - 17.36396103) < 5e-7);
  CHECK(resonance_beta1(2, 0) == doctest::Approx(1.0 + std::sqrt(2.0) / 2.0).epsilon(1e-15));

  CHECK(find_resonant_ell(2, 1.7071068, 1e-5) == 0);
  CHECK_FALSE(find_resonant_ell(2, 1.0, 1e-5).has_value());
  for (double s : {1.0, 2.0, 4.0})
    for (int ell = 0; ell <= 8; ++ell) CHECK(find_resonant_ell(s, resonance_beta1(s, ell)) == ell);

  // Kimura on the NVE exponents is equivalent to the resonance condition.
  std::mt19937 rng(2024u);
  std::uniform_real_distribution<double> us(0.1, 4.0), ub(-0.1, 20.0);
  std::uniform_int_distribution<int> ul(0, 8);
  for (int k = 0; k < 200; ++k) {
    const double s = us(rng);
    const double b1 = k % 2 == 0 ? resonance_beta1(s, ul(rng)) : ub(rng);
    const bool kim = kimura_triangularizable(exponents_from_nu(s, 2 * b1)).triangularizable;
    CHECK(kim == find_resonant_ell(s, b1).has_value());
  }
}

TEST_CASE("resonance curves") {
  const auto pts = resonance_curve(0.1, 3.0, {0, 1, 2, 3, 4}, 30);
  CHECK(pts.size() == 150);
  for (const auto& p : pts) CHECK(p.beta1 == resonance_beta1(p.s, p.ell));
  const auto one = resonance_curve(2.0, 2.0, {0}, 1);
  REQUIRE(one.size() == 1);
  CHECK(std::abs(one[0].beta1 - 1.7071068) < 5e-7);
  CHECK_THROWS_AS(resonance_curve(0.1, 3.0, {}, 10), DomainError);
  CHECK_THROWS_AS(resonance_curve(3.0, 0.1, {0}, 10), DomainError);
  CHECK_THROWS_AS(resonance_curve(-1.0, 1.0, {0}, 10), DomainError);
}
