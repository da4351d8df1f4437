#pragma once

// Gamma function, terminating hypergeometric series, sech-power integrals and
// the bounded solutions xi2(t) of the normal variational equation
//
//   xi2'' = (s - 2 beta1 sech^2 t) xi2,   beta1 = ((2 sqrt s + 2 ell + 1)^2 - 1) / 8.

#include <vector>

namespace hcl::specfun {

/// Gamma(x) by Lanczos (g = 7, 9 terms) with reflection below 0.5.
/// Throws DomainError at the poles x = 0, -1, -2, ...
double gamma_fn(double x);

struct HypergeoParams {
  double a = 0.0;  // nonpositive integer, |a| <= 50
  double b = 0.0;
  double c = 1.0;
};

/// F(a, b, c; z) for a terminating series (a a nonpositive integer).
double hypergeometric_finite(const HypergeoParams& hp, double z);

/// int_R sech^a t dt = 2^(a-1) Gamma(a/2)^2 / Gamma(a), a > 0.
double sech_power_integral(double a);

constexpr int kMaxEll = 50;

/// xi2(t) = sech^r t * tanh^parity t * sum_j coeffs[j] sech^(2j) t, r = sqrt(s).
struct Xi2Series {
  double exponent = 0.0;
  int parity = 0;
  std::vector<double> coeffs;
};

/// Polynomial part of the bounded solution for ell >= 0. The hypergeometric
/// factor is F(-k+1, r+k-1/2, 1+r; z) for ell = 2(k-1) and
/// F(-k+1, r+k+1/2, 1+r; z) for ell = 2k-1, z = sech^2 t.
Xi2Series xi2_series(double s, int ell);

/// Bounded solution xi2(t), normalized to leading coefficient 1.
double xi2_bounded(double t, double s, int ell);
double xi2_bounded_derivative(double t, double s, int ell);

/// Evaluation helpers for a precomputed series (avoids rebuilding coefficients).
double xi2_eval(const Xi2Series& xs, double t);
double xi2_eval_derivative(const Xi2Series& xs, double t);

}  // namespace hcl::specfun
