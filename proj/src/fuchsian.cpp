#include "hcl/fuchsian.hpp"

#include <cmath>
#include <cstdlib>

#include "hcl/types.hpp"

namespace hcl::fuchsian {

ExponentScheme exponents_from_nu(double nu1, double nu2) {
  if (!std::isfinite(nu1) || !std::isfinite(nu2)) throw DomainError("exponents_from_nu: non-finite input");
  if (!(nu1 > 0.0)) throw DomainError("exponents_from_nu: nu1 must be positive (saddle case)");
  if (4.0 * nu2 + 1.0 < 0.0) throw DomainError("exponents_from_nu: 4 nu2 + 1 must be nonnegative");
  ExponentScheme e;
  const double r0 = std::sqrt(nu1), rinf = std::sqrt(4.0 * nu2 + 1.0);
  e.s0_plus = 0.5 * r0;
  e.s0_minus = -0.5 * r0;
  e.sinf_plus = 0.25 * (1.0 + rinf);
  e.sinf_minus = 0.25 * (1.0 - rinf);
  e.rho = {e.s0_plus - e.s0_minus, e.s1_plus - e.s1_minus, e.sinf_plus - e.sinf_minus};
  return e;
}

ExponentScheme scheme_from_rho(double rho1, double rho2, double rho3) {
  ExponentScheme e;
  e.s0_plus = 0.5 * rho1;
  e.s0_minus = -0.5 * rho1;
  e.s1_plus = 0.5 * (0.5 + rho2);
  e.s1_minus = 0.5 * (0.5 - rho2);
  e.sinf_plus = 0.25 + 0.5 * rho3;
  e.sinf_minus = 0.25 - 0.5 * rho3;
  e.rho = {rho1, rho2, rho3};
  return e;
}

const std::array<std::string, 4>& combination_labels() {
  static const std::array<std::string, 4> labels{"rho1+rho2+rho3", "rho1-rho2+rho3", "-rho1+rho2+rho3",
                                                 "rho1+rho2-rho3"};
  return labels;
}

KimuraVerdict kimura_triangularizable(const ExponentScheme& scheme, double tol) {
  if (!(tol > 0.0 && tol <= 1e-3)) throw DomainError("kimura_triangularizable: tol must lie in (0, 1e-3]");
  const auto [r1, r2, r3] = scheme.rho;
  KimuraVerdict v;
  v.combinations = {r1 + r2 + r3, r1 - r2 + r3, -r1 + r2 + r3, r1 + r2 - r3};
  for (int i = 0; i < 4; ++i) {
    const double c = v.combinations[i];
    const double odd = 2.0 * std::round(0.5 * (c - 1.0)) + 1.0;
    if (std::abs(c - odd) < tol) {
      v.triangularizable = true;
      v.witness = i;
      v.witness_value = odd;
      break;
    }
  }
  return v;
}

double resonance_beta1(double s, int ell) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("resonance_beta1: s must be positive");
  const double q = 2.0 * std::sqrt(s) + 2.0 * ell + 1.0;
  return (q * q - 1.0) / 8.0;
}

std::optional<int> find_resonant_ell(double s, double beta1, double tol) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("find_resonant_ell: s must be positive");
  for (int ell = 0; ell <= 64; ++ell)
    if (std::abs(resonance_beta1(s, ell) - beta1) < tol) return ell;
  for (int ell = -1; ell >= -64; --ell)
    if (std::abs(resonance_beta1(s, ell) - beta1) < tol) return ell;
  return std::nullopt;
}

std::vector<ResonanceSample> resonance_curve(double s_min, double s_max, const std::vector<int>& ells, int n_points) {
  if (!(s_min > 0.0) || !(s_max >= s_min) || !std::isfinite(s_max))
    throw DomainError("resonance_curve: need 0 < s_min <= s_max");
  if (ells.empty()) throw DomainError("resonance_curve: empty ell list");
  if (n_points < 1) throw DomainError("resonance_curve: need at least one point");
  if (n_points == 1 && s_min != s_max) throw DomainError("resonance_curve: one point needs s_min == s_max");
  std::vector<ResonanceSample> out;
  out.reserve(ells.size() * static_cast<std::size_t>(n_points));
  for (int ell : ells) {
    for (int i = 0; i < n_points; ++i) {
      const double s = n_points == 1 ? s_min : s_min + (s_max - s_min) * i / (n_points - 1.0);
      out.push_back({s, ell, resonance_beta1(s, ell)});
    }
  }
  return out;
}

}  // namespace hcl::fuchsian
