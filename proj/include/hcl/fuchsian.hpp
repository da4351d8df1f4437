#pragma once

// Exponent arithmetic for the Fuchsian form of the 2D variational equations
//
//   xi'' = (nu1 - nu2 sech^2 t) xi,   z = sech^2 t,
//
// whose Riemann scheme has singular points z = 0, 1, inf.

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace hcl::fuchsian {

struct ExponentScheme {
  double s0_plus = 0.0, s0_minus = 0.0;      // at z = 0
  double s1_plus = 0.5, s1_minus = 0.0;      // at z = 1
  double sinf_plus = 0.0, sinf_minus = 0.0;  // at z = inf
  std::array<double, 3> rho{};               // exponent differences

  double exponent_sum() const { return s0_plus + s0_minus + s1_plus + s1_minus + sinf_plus + sinf_minus; }
};

/// Requires nu1 > 0 (saddle case) and 4 nu2 + 1 >= 0.
ExponentScheme exponents_from_nu(double nu1, double nu2);

/// Scheme with the given exponent differences (z = 0 and z = inf centered on 0 and 1/4).
ExponentScheme scheme_from_rho(double rho1, double rho2, double rho3);

struct KimuraVerdict {
  bool triangularizable = false;
  int witness = -1;              // index into combination_labels(), -1 if none
  double witness_value = 0.0;
  std::array<double, 4> combinations{};
};

/// Labels of the four exponent-difference combinations, in the order tested.
const std::array<std::string, 4>& combination_labels();

/// True iff one of rho1+rho2+rho3, rho1-rho2+rho3, -rho1+rho2+rho3, rho1+rho2-rho3
/// lies within tol of an odd integer. tol must lie in (0, 1e-3].
KimuraVerdict kimura_triangularizable(const ExponentScheme& scheme, double tol = 1e-9);

/// beta1 = ((2 sqrt s + 2 ell + 1)^2 - 1) / 8.
double resonance_beta1(double s, int ell);

/// The ell with |resonance_beta1(s, ell) - beta1| < tol, searching |ell| <= 64.
/// Nonnegative solutions are preferred, then smaller |ell|.
std::optional<int> find_resonant_ell(double s, double beta1, double tol = 1e-9);

struct ResonanceSample {
  double s;
  int ell;
  double beta1;
};

/// n_points samples per ell, uniform in s over [s_min, s_max].
std::vector<ResonanceSample> resonance_curve(double s_min, double s_max, const std::vector<int>& ells, int n_points);

}  // namespace hcl::fuchsian
