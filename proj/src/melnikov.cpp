#include "hcl/melnikov.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hcl/fuchsian.hpp"
#include "hcl/model.hpp"
#include "hcl/specfun.hpp"

namespace hcl::melnikov {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

double x1h(double t) { return kSqrt2 / std::cosh(t); }

void check_ell(int ell) {
  if (ell < 0) throw DomainError("melnikov: ell must be nonnegative");
  if (ell > specfun::kMaxEll) throw DomainError("melnikov: ell exceeds the supported cap of 50");
}

Coefficient to_coeff(const numerics::QuadratureResult& q, double factor) {
  return {factor * q.value, std::abs(factor) * q.error_estimate};
}

}  // namespace

CoefficientPair coeff_a2_b2(double s, int ell, double beta4, const QuadratureOptions& opts) {
  check_ell(ell);
  const specfun::Xi2Series xs = specfun::xi2_series(s, ell);
  const double r = xs.exponent, c = opts.xi2_scale;
  auto xi2 = [&xs, c](double t) { return c * specfun::xi2_eval(xs, t); };
  const auto qa = numerics::integrate_line([&](double t) { return xi2(t) * x1h(t); }, r + 1.0, opts.tol);
  CoefficientPair out;
  out.first = to_coeff(qa, -1.0);
  if (beta4 == 0.0) {
    out.second = {0.0, 0.0};
  } else {
    const auto qb = numerics::integrate_line(
        [&](double t) {
          const double v = xi2(t);
          return v * v * v;
        },
        3.0 * r, opts.tol);
    out.second = to_coeff(qb, -beta4);
  }
  return out;
}

double closed_form_g(double r) {
  static constexpr std::array<double, 13> g{5184.0,      176256.0,     2519568.0,    20488032.0,   106620652.0,
                                            375344312.0, 915087795.0,  1546383098.0, 1772860056.0, 1308687720.0,
                                            556461984.0, 102326688.0,  -73920.0};
  double v = 0.0;
  for (double c : g) v = v * r + c;
  return v;
}

std::pair<double, double> closed_form_a2_b2(double s, int ell, double beta4) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("closed_form_a2_b2: s must be positive");
  using specfun::gamma_fn;
  const double r = std::sqrt(s);
  const double ga = gamma_fn(0.5 * r + 0.5), gb = gamma_fn(1.5 * r);
  const double a_base = ga * ga / gamma_fn(r + 1.0);
  const double b_base = gb * gb / gamma_fn(3.0 * r);
  switch (ell) {
    case 0:
      return {-std::pow(2.0, r + 0.5) * a_base, -std::pow(2.0, 3.0 * r - 1.0) * b_base * beta4};
    case 2: {
      const double a2 = std::pow(2.0, r - 0.5) * (2.0 * s + 3.0 * r - 1.0) * a_base / (r + 2.0);
      const double poly = 72.0 * s * s * s + 252.0 * std::pow(s, 2.5) + 262.0 * s * s + 93.0 * std::pow(s, 1.5) +
                          72.0 * s + 32.0 * r - 40.0;
      const double b2 =
          std::pow(2.0, 3.0 * r - 4.0) * poly * b_base / ((3.0 * r + 1.0) * (r + 1.0) * (3.0 * r + 5.0)) * beta4;
      return {a2, b2};
    }
    case 4: {
      const double poly = 4.0 * s * s + 48.0 * std::pow(s, 1.5) + 199.0 * s + 320.0 * r + 153.0;
      const double a2 = std::pow(2.0, r - 1.5) * poly * a_base / ((r + 2.0) * (r + 4.0));
      const double den =
          (3.0 * r + 1.0) * (r + 1.0) * (3.0 * r + 5.0) * (3.0 * r + 7.0) * (r + 3.0) * (3.0 * r + 11.0);
      const double b2 = std::pow(2.0, 3.0 * r - 7.0) * closed_form_g(r) * b_base / den * beta4;
      return {a2, b2};
    }
    default:
      throw DomainError("closed_form_a2_b2: closed forms exist only for ell in {0, 2, 4}");
  }
}

std::pair<double, double> series_closed_form_a2_b2(double s, int ell, double beta4) {
  check_ell(ell);
  const specfun::Xi2Series xs = specfun::xi2_series(s, ell);
  if (xs.parity == 1) return {0.0, 0.0};
  const double r = xs.exponent;
  const auto& c = xs.coeffs;
  double a2 = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) a2 += c[j] * specfun::sech_power_integral(r + 2.0 * j + 1.0);
  a2 *= -kSqrt2;
  // Coefficients of P(z)^3.
  std::vector<double> sq(2 * c.size() - 1, 0.0), cube(3 * c.size() - 2, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) sq[i + j] += c[i] * c[j];
  for (std::size_t i = 0; i < sq.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) cube[i + j] += sq[i] * c[j];
  double b2 = 0.0;
  for (std::size_t j = 0; j < cube.size(); ++j) b2 += cube[j] * specfun::sech_power_integral(3.0 * r + 2.0 * j);
  return {a2, -beta4 * b2};
}

// ------------------------------------------------------------- xi^alpha

namespace {
const numerics::GaussRule& gauss8() {
  static const numerics::GaussRule rule = numerics::gauss_legendre(8);
  return rule;
}
}  // namespace

double ParticularSolution::g3(double t) const {
  const double v = scale_ * specfun::xi2_eval(xs_, t);
  return -beta1_ * x1h(t) * v * v;
}

// which = 0: psi13 G3 = -phi31 G3; which = 1: psi33 G3 = phi11 G3.
double ParticularSolution::cell_integral(int which, double a, double b) const {
  if (a == b) return 0.0;
  const auto& gr = gauss8();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < gr.nodes.size(); ++i) {
    const double t = mid + half * gr.nodes[i];
    const variational::TangentBasis tb = variational::analytic_tangent_basis(t);
    const double w = which == 0 ? -tb.phi3[0] : tb.phi1[0];
    acc += gr.weights[i] * w * g3(t);
  }
  return half * acc;
}

ParticularSolution::Parts ParticularSolution::parts(double t) const {
  const std::size_t zero = cells_ / 2;
  if (t >= half_length_) return {prefix_a_[cells_] - prefix_a_[zero], 0.0};
  if (t <= -half_length_) return {prefix_a_[0] - prefix_a_[zero], 0.0};
  std::size_t i = static_cast<std::size_t>(std::floor((t + half_length_) / h_));
  i = std::min(i, cells_ - 1);
  const double ti = -half_length_ + h_ * static_cast<double>(i);
  const double pa = prefix_a_[i] + cell_integral(0, ti, t);
  const double pc = cell_integral(1, ti, t);
  Parts out;
  out.a = pa - prefix_a_[zero];
  // Integrate the psi33 term from the nearer end to avoid cancellation.
  out.d = t >= 0.0 ? -(suffix_c_[i] - pc) : prefix_c_[i] + pc;
  return out;
}

double ParticularSolution::xi1(double t) const {
  const Parts p = parts(t);
  const variational::TangentBasis tb = variational::analytic_tangent_basis(t);
  if (std::abs(t) >= half_length_) return tb.phi1[0] * p.a;
  return tb.phi1[0] * p.a + tb.phi3[0] * p.d;
}

double ParticularSolution::xi3(double t) const {
  const Parts p = parts(t);
  const variational::TangentBasis tb = variational::analytic_tangent_basis(t);
  if (std::abs(t) >= half_length_) return tb.phi1[2] * p.a;
  return tb.phi1[2] * p.a + tb.phi3[2] * p.d;
}

ParticularSolution xi_alpha(double s, int ell, double xi2_scale) {
  check_ell(ell);
  const specfun::Xi2Series xs = specfun::xi2_series(s, ell);
  ParticularSolution ps;
  ps.s_ = s;
  ps.r_ = xs.exponent;
  ps.ell_ = ell;
  ps.xs_ = xs;
  ps.scale_ = xi2_scale;
  ps.beta1_ = fuchsian::resonance_beta1(s, ell);
  // The slowest integrand (psi13 G3) decays like exp(-2 r |t|).
  ps.h_ = 0.05;
  ps.half_length_ = std::ceil(std::max(30.0, 40.0 / ps.r_));
  ps.cells_ = static_cast<std::size_t>(std::llround(2.0 * ps.half_length_ / ps.h_));
  if (ps.cells_ % 2 == 1) ++ps.cells_;
  ps.h_ = 2.0 * ps.half_length_ / static_cast<double>(ps.cells_);
  std::vector<double> ca(ps.cells_), cc(ps.cells_);
  for (std::size_t i = 0; i < ps.cells_; ++i) {
    const double a = -ps.half_length_ + ps.h_ * static_cast<double>(i);
    ca[i] = ps.cell_integral(0, a, a + ps.h_);
    cc[i] = ps.cell_integral(1, a, a + ps.h_);
  }
  ps.prefix_a_.assign(ps.cells_ + 1, 0.0);
  ps.prefix_c_.assign(ps.cells_ + 1, 0.0);
  ps.suffix_c_.assign(ps.cells_ + 1, 0.0);
  for (std::size_t i = 0; i < ps.cells_; ++i) {
    ps.prefix_a_[i + 1] = ps.prefix_a_[i] + ca[i];
    ps.prefix_c_[i + 1] = ps.prefix_c_[i] + cc[i];
  }
  for (std::size_t i = ps.cells_; i-- > 0;) ps.suffix_c_[i] = ps.suffix_c_[i + 1] + cc[i];
  ps.xi3_const_ = ps.suffix_c_[ps.cells_ / 2];
  return ps;
}

CoefficientPair coeff_bar_a2_bar_b2(double s, int ell, double beta1, double beta2, const QuadratureOptions& opts) {
  check_ell(ell);
  const double res = fuchsian::resonance_beta1(s, ell);
  if (std::abs(beta1 - res) > 1e-6) {
    std::ostringstream msg;
    msg << "coeff_bar_a2_bar_b2: beta1=" << beta1 << " is not the ell=" << ell << " resonance " << res;
    throw DomainError(msg.str());
  }
  const specfun::Xi2Series xs = specfun::xi2_series(s, ell);
  const double r = xs.exponent, c = opts.xi2_scale;
  auto xi2 = [&xs, c](double t) { return c * specfun::xi2_eval(xs, t); };

  const auto qa = numerics::integrate_line(
      [&](double t) {
        const double v = xi2(t) * x1h(t);
        return v * v;
      },
      2.0 * r + 2.0, opts.tol);
  CoefficientPair out;
  out.first = to_coeff(qa, -1.0);
  if (!(out.first.value < 0.0)) {
    std::ostringstream msg;
    msg << "consistency failure: bar_a2=" << out.first.value << " is not negative";
    throw ConvergenceError(msg.str());
  }

  const ParticularSolution xa = xi_alpha(s, ell, c);
  const auto q1 = numerics::integrate_line(
      [&](double t) {
        const double v = xi2(t);
        return x1h(t) * xa.xi1(t) * v * v;
      },
      2.0 * r + 1.0, opts.tol);
  Coefficient b{-2.0 * res * q1.value, 2.0 * std::abs(res) * q1.error_estimate};
  if (beta2 != 0.0) {
    const auto q2 = numerics::integrate_line(
        [&](double t) {
          const double v = xi2(t);
          return v * v * v * v;
        },
        4.0 * r, opts.tol);
    b.value -= beta2 * q2.value;
    b.error += std::abs(beta2) * q2.error_estimate;
  }
  out.second = b;
  return out;
}

// -------------------------------------------------------- classification

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::saddle_node_supercritical: return "saddle-node-supercritical";
    case Classification::saddle_node_subcritical: return "saddle-node-subcritical";
    case Classification::pitchfork_supercritical: return "pitchfork-supercritical";
    case Classification::pitchfork_subcritical: return "pitchfork-subcritical";
    case Classification::degenerate: return "degenerate";
    case Classification::none: return "none";
  }
  return "none";
}

Classification parse_classification(std::string_view name) {
  for (auto c : {Classification::saddle_node_supercritical, Classification::saddle_node_subcritical,
                 Classification::pitchfork_supercritical, Classification::pitchfork_subcritical,
                 Classification::degenerate, Classification::none})
    if (to_string(c) == name) return c;
  throw DomainError("unknown classification '" + std::string(name) + "'");
}

std::string_view to_string(Mode m) { return m == Mode::saddle_node ? "sn" : "pf"; }

Classification classify_saddle_node(const Coefficient& a2, const Coefficient& b2) {
  if (a2.degenerate() || b2.degenerate() || a2.value == 0.0 || b2.value == 0.0) return Classification::degenerate;
  return a2.value * b2.value < 0.0 ? Classification::saddle_node_supercritical
                                   : Classification::saddle_node_subcritical;
}

Classification classify_pitchfork(const Coefficient& bar_a2, const Coefficient& bar_b2) {
  if (bar_a2.degenerate() || bar_b2.degenerate() || bar_a2.value == 0.0 || bar_b2.value == 0.0)
    return Classification::degenerate;
  return bar_a2.value * bar_b2.value < 0.0 ? Classification::pitchfork_supercritical
                                           : Classification::pitchfork_subcritical;
}

// ------------------------------------------------------- general route

namespace {

Coefficient line_integral(const std::function<double(double)>& f, double tol) {
  // Decay check on a coarse far-field sample.
  const double near = std::max(std::abs(f(25.0)), std::abs(f(-25.0)));
  const double far = std::max(std::abs(f(35.0)), std::abs(f(-35.0)));
  if (far > 1e-6 && far >= near) throw DomainError("melnikov integrand does not decay: unbounded solution supplied?");
  const auto q = numerics::integrate_line(f, 1.0, tol);
  return {q.value, q.error_estimate};
}

}  // namespace

CoefficientPair general_melnikov_ab(const variational::VecCallback& phi2, const variational::VecCallback& psi2,
                                    const SystemParams& p, Param mu, double tol, int sign) {
  CoefficientPair out;
  out.first = line_integral(
      [&](double t) { return dot(psi2(t), model::eval_dmu_f(model::homoclinic(t, sign), p, mu)); }, tol);
  out.second = line_integral(
      [&](double t) {
        const Vec4 ph = phi2(t);
        return 0.5 * dot(psi2(t), model::eval_d2f(model::homoclinic(t, sign), p, ph, ph));
      },
      tol);
  return out;
}

CoefficientPair general_melnikov_bar(const variational::VecCallback& phi2, const variational::VecCallback& psi2,
                                     const variational::VecCallback& xi_alpha, const SystemParams& p, Param mu,
                                     double tol, int sign) {
  CoefficientPair out;
  out.first = line_integral(
      [&](double t) {
        return dot(psi2(t), model::eval_dmu_dx_f(model::homoclinic(t, sign), p, mu, phi2(t)));
      },
      tol);
  out.second = line_integral(
      [&](double t) {
        const Vec4 x = model::homoclinic(t, sign), ph = phi2(t), ps = psi2(t);
        return dot(ps, model::eval_d2f(x, p, ph, xi_alpha(t))) + dot(ps, model::eval_d3f(x, p, ph, ph, ph)) / 6.0;
      },
      tol);
  return out;
}

// --------------------------------------------------------------- reports

namespace {
bool coeff_eq(const Coefficient& a, const Coefficient& b) { return a.value == b.value && a.error == b.error; }
}  // namespace

bool MelnikovReport::operator==(const MelnikovReport& o) const {
  return mode == o.mode && s == o.s && ell == o.ell && beta1 == o.beta1 && beta2 == o.beta2 && beta4 == o.beta4 &&
         coeff_eq(a2, o.a2) && coeff_eq(b2, o.b2) && coeff_eq(bar_a2, o.bar_a2) && coeff_eq(bar_b2, o.bar_b2) &&
         closed_form_a2 == o.closed_form_a2 && closed_form_b2 == o.closed_form_b2 && series_a2 == o.series_a2 &&
         series_b2 == o.series_b2 && classification == o.classification;
}

MelnikovReport saddle_node_report(double s, int ell, double beta4, double tol) {
  MelnikovReport rep;
  rep.mode = Mode::saddle_node;
  rep.s = s;
  rep.ell = ell;
  rep.beta1 = fuchsian::resonance_beta1(s, ell);
  rep.beta4 = beta4;
  const CoefficientPair ab = coeff_a2_b2(s, ell, beta4, {tol, 1.0});
  rep.a2 = ab.first;
  rep.b2 = ab.second;
  if (ell == 0 || ell == 2 || ell == 4) {
    const auto [ca, cb] = closed_form_a2_b2(s, ell, beta4);
    rep.closed_form_a2 = ca;
    rep.closed_form_b2 = cb;
  }
  if (ell % 2 == 0) {
    const auto [sa, sb] = series_closed_form_a2_b2(s, ell, beta4);
    rep.series_a2 = sa;
    rep.series_b2 = sb;
  }
  rep.classification = classify_saddle_node(rep.a2, rep.b2);
  return rep;
}

MelnikovReport pitchfork_report(double s, int ell, double beta2, double tol) {
  MelnikovReport rep;
  rep.mode = Mode::pitchfork;
  rep.s = s;
  rep.ell = ell;
  rep.beta1 = fuchsian::resonance_beta1(s, ell);
  rep.beta2 = beta2;
  const CoefficientPair ab = coeff_bar_a2_bar_b2(s, ell, rep.beta1, beta2, {tol, 1.0});
  rep.bar_a2 = ab.first;
  rep.bar_b2 = ab.second;
  rep.classification = classify_pitchfork(rep.bar_a2, rep.bar_b2);
  return rep;
}

}  // namespace hcl::melnikov
