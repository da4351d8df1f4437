#pragma once

// Melnikov coefficients for saddle-node (mu = beta3) and pitchfork
// (mu = beta1) bifurcations of the homoclinic orbit x^h at an NVE resonance,
// Hamiltonian case: psi2 = -J4 phi2 with phi2 = (0, xi2, 0, xi2').

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "hcl/numerics.hpp"
#include "hcl/specfun.hpp"
#include "hcl/types.hpp"
#include "hcl/variational.hpp"

namespace hcl::melnikov {

struct Coefficient {
  double value = 0.0;
  double error = 0.0;  // quadrature error estimate

  /// Indistinguishable from zero: |value| < 10 * error.
  bool degenerate() const { return std::abs(value) < 10.0 * error; }
};

struct CoefficientPair {
  Coefficient first;
  Coefficient second;
};

struct QuadratureOptions {
  double tol = 1e-12;
  double xi2_scale = 1.0;  // replaces xi2 by xi2_scale * xi2
};

/// a2 = -int xi2 x1^h dt, b2 = -beta4 int xi2^3 dt (mu = beta3).
CoefficientPair coeff_a2_b2(double s, int ell, double beta4, const QuadratureOptions& opts = {});

/// Closed-form Gamma expressions for ell = 0, 2, 4 as printed in the
/// literature (the ell = 2, 4 polynomials transcribed verbatim).
std::pair<double, double> closed_form_a2_b2(double s, int ell, double beta4);

/// The same sech-power formula applied termwise to the finite series of
/// specfun::xi2_series; valid for every even ell and exact up to rounding.
std::pair<double, double> series_closed_form_a2_b2(double s, int ell, double beta4);

/// The degree-12 polynomial g of the ell = 4 closed form, by Horner in r = sqrt(s).
double closed_form_g(double r);

/// Bounded particular solution xi^alpha of xi' = Df(x^h) xi + G_alpha with
/// G_alpha = (1/2) D2f(phi2, phi2) = (0, 0, -beta1 x1^h xi2^2, 0):
///
///   xi^alpha = phi1 int_0^t psi13 G3 + phi3 (int_0^t psi33 G3 - Xi3),
///   Xi3 = int_0^{+-inf} psi33 G3 (both limits agree by parity).
class ParticularSolution {
public:
  double xi1(double t) const;
  double xi3(double t) const;
  Vec4 operator()(double t) const { return {xi1(t), 0.0, xi3(t), 0.0}; }
  double big_xi3() const { return xi3_const_; }

private:
  friend ParticularSolution xi_alpha(double s, int ell, double xi2_scale);

  struct Parts {
    double a;  // int_0^t psi13 G3
    double d;  // int_0^t psi33 G3 - Xi3
  };
  Parts parts(double t) const;
  double cell_integral(int which, double a, double b) const;
  double g3(double t) const;

  double s_ = 0.0, r_ = 0.0, beta1_ = 0.0, scale_ = 1.0;
  int ell_ = 0;
  specfun::Xi2Series xs_;
  double half_length_ = 0.0, h_ = 0.0;
  std::size_t cells_ = 0;
  std::vector<double> prefix_a_;  // int_{-L}^{t_i} psi13 G3
  std::vector<double> prefix_c_;  // int_{-L}^{t_i} psi33 G3
  std::vector<double> suffix_c_;  // int_{t_i}^{L} psi33 G3
  double xi3_const_ = 0.0;
};

ParticularSolution xi_alpha(double s, int ell, double xi2_scale = 1.0);

/// bar_a2 = -int xi2^2 (x1^h)^2, bar_b2 = -2 beta1 int x1^h xi1^alpha xi2^2 - beta2 int xi2^4 (mu = beta1).
/// beta1 must equal resonance_beta1(s, ell) within 1e-6. Throws ConvergenceError
/// if bar_a2 comes out nonnegative.
CoefficientPair coeff_bar_a2_bar_b2(double s, int ell, double beta1, double beta2, const QuadratureOptions& opts = {});

enum class Classification {
  saddle_node_supercritical,
  saddle_node_subcritical,
  pitchfork_supercritical,
  pitchfork_subcritical,
  degenerate,
  none,
};

std::string_view to_string(Classification c);
Classification parse_classification(std::string_view name);

/// a2 b2 < 0: supercritical, > 0: subcritical.
Classification classify_saddle_node(const Coefficient& a2, const Coefficient& b2);
Classification classify_pitchfork(const Coefficient& bar_a2, const Coefficient& bar_b2);

/// a = int <psi2, D_mu f(x^h)>, b = (1/2) int <psi2, D2f(x^h)(phi2, phi2)>.
/// Throws DomainError when an integrand does not decay.
CoefficientPair general_melnikov_ab(const variational::VecCallback& phi2, const variational::VecCallback& psi2,
                                    const SystemParams& p, Param mu, double tol = 1e-12, int sign = +1);

/// bar_a = int <psi2, D_mu D_x f phi2>,
/// bar_b = int <psi2, D2f(phi2, xi_alpha)> + (1/6) int <psi2, D3f(phi2, phi2, phi2)>   (xi^mu = 0).
CoefficientPair general_melnikov_bar(const variational::VecCallback& phi2, const variational::VecCallback& psi2,
                                     const variational::VecCallback& xi_alpha, const SystemParams& p, Param mu,
                                     double tol = 1e-12, int sign = +1);

enum class Mode { saddle_node, pitchfork };
std::string_view to_string(Mode m);

struct MelnikovReport {
  Mode mode = Mode::saddle_node;
  double s = 2.0;
  int ell = 0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta4 = 0.0;
  Coefficient a2, b2, bar_a2, bar_b2;
  std::optional<double> closed_form_a2, closed_form_b2;  // printed forms, ell in {0, 2, 4}
  std::optional<double> series_a2, series_b2;            // termwise series forms, even ell
  Classification classification = Classification::none;

  bool operator==(const MelnikovReport& o) const;
};

/// Saddle-node analysis with mu = beta3 at beta1 = resonance_beta1(s, ell).
MelnikovReport saddle_node_report(double s, int ell, double beta4, double tol = 1e-12);
/// Pitchfork analysis with mu = beta1 at beta3 = beta4 = 0.
MelnikovReport pitchfork_report(double s, int ell, double beta2, double tol = 1e-12);

}  // namespace hcl::melnikov
