#include "hcl/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hcl/types.hpp"

namespace hcl::specfun {

namespace {

// Lanczos coefficients for g = 7, n = 9.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos{
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
};

bool is_nonpositive_integer(double x) { return x <= 0.0 && std::floor(x) == x; }

}  // namespace

double gamma_fn(double x) {
  if (!std::isfinite(x)) throw DomainError("gamma_fn: non-finite argument");
  if (is_nonpositive_integer(x)) {
    std::ostringstream msg;
    msg << "gamma_fn: pole at x=" << x;
    throw DomainError(msg.str());
  }
  if (x < 0.5) return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma_fn(1.0 - x));
  const double xm = x - 1.0;
  double acc = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) acc += kLanczos[i] / (xm + static_cast<double>(i));
  const double t = xm + kLanczosG + 0.5;
  // Split the power to postpone overflow for x up to ~171.
  const double half = std::pow(t, 0.5 * (xm + 0.5));
  return std::sqrt(2.0 * std::numbers::pi) * half * (half * std::exp(-t)) * acc;
}

double hypergeometric_finite(const HypergeoParams& hp, double z) {
  if (!is_nonpositive_integer(hp.a)) throw DomainError("hypergeometric_finite: a must be a nonpositive integer");
  if (hp.a < -kMaxEll) throw DomainError("hypergeometric_finite: |a| exceeds 50");
  if (!std::isfinite(hp.b) || !std::isfinite(hp.c) || !std::isfinite(z))
    throw DomainError("hypergeometric_finite: non-finite argument");
  const int n = static_cast<int>(-hp.a);
  if (is_nonpositive_integer(hp.c) && -hp.c < n)
    throw DomainError("hypergeometric_finite: c hits a zero Pochhammer denominator");
  double term = 1.0, sum = 1.0;
  for (int j = 0; j < n; ++j) {
    term *= (hp.a + j) * (hp.b + j) / ((hp.c + j) * (j + 1.0)) * z;
    sum += term;
  }
  return sum;
}

double sech_power_integral(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("sech_power_integral: a must be positive");
  if (a > 160.0) return std::exp((a - 1.0) * std::numbers::ln2 + 2.0 * std::lgamma(0.5 * a) - std::lgamma(a));
  const double g = gamma_fn(0.5 * a);
  return std::pow(2.0, a - 1.0) * g * g / gamma_fn(a);
}

Xi2Series xi2_series(double s, int ell) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("xi2: s must be positive");
  if (ell < 0) throw DomainError("xi2: ell must be nonnegative (negative ell gives unbounded series)");
  if (ell > kMaxEll) throw DomainError("xi2: ell exceeds the supported cap of 50");
  const double r = std::sqrt(s);
  Xi2Series xs;
  xs.exponent = r;
  xs.parity = ell % 2;
  const int k = xs.parity == 0 ? ell / 2 + 1 : (ell + 1) / 2;
  const double a = -k + 1.0;
  const double b = xs.parity == 0 ? r + k - 0.5 : r + k + 0.5;
  const double c = 1.0 + r;
  xs.coeffs.assign(static_cast<std::size_t>(k), 0.0);
  double term = 1.0;
  xs.coeffs[0] = 1.0;
  for (int j = 0; j + 1 < k; ++j) {
    term *= (a + j) * (b + j) / ((c + j) * (j + 1.0));
    xs.coeffs[static_cast<std::size_t>(j) + 1] = term;
  }
  return xs;
}

namespace {

struct PolyVal {
  double p = 0.0;
  double dp = 0.0;
};

PolyVal horner(const std::vector<double>& c, double z) {
  PolyVal v;
  for (std::size_t i = c.size(); i-- > 0;) {
    v.dp = v.dp * z + v.p;
    v.p = v.p * z + c[i];
  }
  return v;
}

}  // namespace

double xi2_eval(const Xi2Series& xs, double t) {
  const double sech = 1.0 / std::cosh(t);
  const double z = sech * sech;
  double v = std::pow(sech, xs.exponent) * horner(xs.coeffs, z).p;
  if (xs.parity == 1) v *= std::tanh(t);
  return v;
}

double xi2_eval_derivative(const Xi2Series& xs, double t) {
  const double sech = 1.0 / std::cosh(t);
  const double th = std::tanh(t);
  const double z = sech * sech;
  const double sr = std::pow(sech, xs.exponent);
  const PolyVal pv = horner(xs.coeffs, z);
  const double r = xs.exponent;
  if (xs.parity == 0) return sr * th * (-r * pv.p - 2.0 * z * pv.dp);
  return sr * th * th * (-r * pv.p - 2.0 * z * pv.dp) + sr * z * pv.p;
}

double xi2_bounded(double t, double s, int ell) { return xi2_eval(xi2_series(s, ell), t); }

double xi2_bounded_derivative(double t, double s, int ell) { return xi2_eval_derivative(xi2_series(s, ell), t); }

}  // namespace hcl::specfun
