#include "hcl/variational.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "hcl/fuchsian.hpp"
#include "hcl/model.hpp"
#include "hcl/specfun.hpp"

namespace hcl::variational {

using numerics::Matrix;

namespace {

Matrix to_matrix(const Mat4& m) {
  Matrix out(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) out(i, j) = m[i][j];
  return out;
}

void fill_bases_4d(LinearSystemAlongOrbit& sys, const SystemParams& p) {
  const model::SpectralData sd = model::equilibrium_spectrum(p);
  sys.asymptotic = to_matrix(model::eval_jacobian({0.0, 0.0, 0.0, 0.0}, p));
  sys.stable_basis = Matrix(4, 2);
  sys.unstable_basis = Matrix(4, 2);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < 4; ++i) {
      sys.stable_basis(i, j) = sd.stable_basis[j][i];
      sys.unstable_basis(i, j) = sd.unstable_basis[j][i];
    }
}

// eta'' = (kappa - w(t)) eta - nu eta'.
LinearSystemAlongOrbit second_order_2d(double kappa, double nu, std::function<double(double)> well) {
  const double disc = nu * nu + 4.0 * kappa;
  if (!(kappa > 0.0) || disc <= 0.0) {
    std::ostringstream msg;
    msg << "non-hyperbolic asymptotic matrix: kappa=" << kappa << ", nu=" << nu;
    throw DomainError(msg.str());
  }
  LinearSystemAlongOrbit sys;
  sys.dim = 2;
  sys.asymptotic = Matrix(2, 2);
  sys.asymptotic(0, 1) = 1.0;
  sys.asymptotic(1, 0) = kappa;
  sys.asymptotic(1, 1) = -nu;
  const double lp = 0.5 * (-nu + std::sqrt(disc)), lm = 0.5 * (-nu - std::sqrt(disc));
  sys.unstable_basis = Matrix(2, 1);
  sys.stable_basis = Matrix(2, 1);
  sys.unstable_basis(0, 0) = 1.0 / std::hypot(1.0, lp);
  sys.unstable_basis(1, 0) = lp / std::hypot(1.0, lp);
  sys.stable_basis(0, 0) = 1.0 / std::hypot(1.0, lm);
  sys.stable_basis(1, 0) = lm / std::hypot(1.0, lm);
  sys.coefficient = [kappa, nu, well = std::move(well)](double t) {
    Matrix a(2, 2);
    a(0, 1) = 1.0;
    a(1, 0) = kappa - well(t);
    a(1, 1) = -nu;
    return a;
  };
  return sys;
}

double sech2(double t) {
  const double c = 1.0 / std::cosh(t);
  return c * c;
}

}  // namespace

Vec4 OrbitSample::operator()(double time) const {
  if (t.size() < 2) throw DomainError("orbit sample needs at least two nodes");
  if (time <= t.front()) return x.front();
  if (time >= t.back()) return x.back();
  const auto it = std::upper_bound(t.begin(), t.end(), time);
  const std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
  const double h = t[i + 1] - t[i];
  const double th = (time - t[i]) / h;
  const double h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
  const double h10 = th * (1.0 - th) * (1.0 - th);
  const double h01 = th * th * (3.0 - 2.0 * th);
  const double h11 = th * th * (th - 1.0);
  Vec4 out{};
  for (std::size_t k = 0; k < 4; ++k)
    out[k] = h00 * x[i][k] + h10 * h * dx[i][k] + h01 * x[i + 1][k] + h11 * h * dx[i + 1][k];
  return out;
}

OrbitSample sample_homoclinic(double half_length, std::size_t intervals, int sign) {
  if (!(half_length > 0.0) || intervals < 2) throw DomainError("sample_homoclinic: bad grid");
  OrbitSample o;
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double t = -half_length + 2.0 * half_length * static_cast<double>(i) / static_cast<double>(intervals);
    o.t.push_back(t);
    o.x.push_back(model::homoclinic(t, sign));
    o.dx.push_back(model::homoclinic_velocity(t, sign));
  }
  return o;
}

LinearSystemAlongOrbit ve_along_homoclinic(const SystemParams& p, int sign) {
  p.validate();
  if (p.beta3 != 0.0 || p.nu1 != 0.0)
    throw DomainError("ve_along_homoclinic: the explicit orbit needs beta3 = nu1 = 0; supply a numeric orbit");
  if (sign != 1 && sign != -1) throw DomainError("homoclinic orbit sign must be +1 or -1");
  LinearSystemAlongOrbit sys;
  sys.dim = 4;
  fill_bases_4d(sys, p);
  sys.coefficient = [p, sign](double t) { return to_matrix(model::eval_jacobian(model::homoclinic(t, sign), p)); };
  return sys;
}

LinearSystemAlongOrbit ve_along_orbit(const OrbitSample& orbit, const SystemParams& p) {
  p.validate();
  if (orbit.t.size() < 2 || orbit.t.size() != orbit.x.size() || orbit.t.size() != orbit.dx.size())
    throw DomainError("ve_along_orbit: inconsistent orbit sample");
  LinearSystemAlongOrbit sys;
  sys.dim = 4;
  fill_bases_4d(sys, p);
  sys.coefficient = [orbit, p](double t) { return to_matrix(model::eval_jacobian(orbit(t), p)); };
  return sys;
}

LinearSystemAlongOrbit nve_2d(const SystemParams& p) {
  p.validate();
  if (p.beta3 != 0.0) throw DomainError("nve_2d: requires beta3 = 0");
  const double b1 = p.beta1;
  return second_order_2d(p.s, p.nu1, [b1](double t) { return 2.0 * b1 * sech2(t); });
}

LinearSystemAlongOrbit tve_2d(const SystemParams& p) {
  p.validate();
  return second_order_2d(1.0, p.nu1, [](double t) { return 6.0 * sech2(t); });
}

double ode_residual(const LinearSystemAlongOrbit& sys, const std::function<std::vector<double>(double)>& sol,
                    double t, double h) {
  // Fourth-order central difference.
  const auto ym2 = sol(t - 2 * h), ym1 = sol(t - h), yp1 = sol(t + h), yp2 = sol(t + 2 * h), y = sol(t);
  const Matrix a = sys.coefficient(t);
  const std::vector<double> ay = a * std::span<const double>(y);
  double r = 0.0;
  for (std::size_t i = 0; i < sys.dim; ++i) {
    const double d = (ym2[i] - 8.0 * ym1[i] + 8.0 * yp1[i] - yp2[i]) / (12.0 * h);
    r = std::max(r, std::abs(d - ay[i]));
  }
  return r;
}

TangentBasis analytic_tangent_basis(double t) {
  const double S = 1.0 / std::cosh(t), T = std::tanh(t), sh = std::sinh(t);
  TangentBasis b;
  b.phi1 = {S * T, 0.0, 2.0 * S * S * S - S, 0.0};
  b.phi3 = {1.5 * t * S * T + 0.5 * sh * T - S, 0.0, 3.0 * t * S * S * S + 3.0 * S * T - 1.5 * t * S + 0.5 * sh, 0.0};
  b.psi1 = {b.phi3[2], 0.0, -b.phi3[0], 0.0};
  b.psi3 = {-b.phi1[2], 0.0, b.phi1[0], 0.0};
  return b;
}

VecCallback adjoint_from_solution(VecCallback phi) {
  return [phi = std::move(phi)](double t) { return -1.0 * apply_j4(phi(t)); };
}

SolutionBasis resonant_solution_basis(double s, int ell, double half_length) {
  if (!(half_length > 0.0)) throw DomainError("resonant_solution_basis: half_length must be positive");
  const auto xs = std::make_shared<specfun::Xi2Series>(specfun::xi2_series(s, ell));
  const double beta1 = fuchsian::resonance_beta1(s, ell);

  // Second NVE solution u with Wronskian xi2 u' - xi2' u = 1, opposite parity to xi2.
  const double x0 = specfun::xi2_eval(*xs, 0.0), dx0 = specfun::xi2_eval_derivative(*xs, 0.0);
  const std::vector<double> u0 = xs->parity == 0 ? std::vector<double>{0.0, 1.0 / x0} : std::vector<double>{-1.0 / dx0, 0.0};
  numerics::OdeRhs rhs = [s, beta1](double t, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = (s - 2.0 * beta1 * sech2(t)) * y[0];
  };
  numerics::IntegratorConfig cfg;
  cfg.rel_tol = 1e-13;
  cfg.abs_tol = 1e-15;
  const auto fwd = std::make_shared<numerics::Trajectory>(numerics::integrate_ode(rhs, u0, 0.0, half_length, cfg));
  const auto bwd = std::make_shared<numerics::Trajectory>(numerics::integrate_ode(rhs, u0, 0.0, -half_length, cfg));
  auto u = [fwd, bwd](double t) { return t >= 0.0 ? (*fwd)(t) : (*bwd)(t); };

  SolutionBasis b;
  b.half_length = half_length;
  b.bounded = {true, true, false, false};
  b.phi[0] = [](double t) { return analytic_tangent_basis(t).phi1; };
  b.phi[2] = [](double t) { return analytic_tangent_basis(t).phi3; };
  b.psi[0] = [](double t) { return analytic_tangent_basis(t).psi1; };
  b.psi[2] = [](double t) { return analytic_tangent_basis(t).psi3; };
  b.phi[1] = [xs](double t) { return Vec4{0.0, specfun::xi2_eval(*xs, t), 0.0, specfun::xi2_eval_derivative(*xs, t)}; };
  b.phi[3] = [u](double t) {
    const auto v = u(t);
    return Vec4{0.0, v[0], 0.0, v[1]};
  };
  b.psi[1] = [u](double t) {
    const auto v = u(t);
    return Vec4{0.0, v[1], 0.0, -v[0]};
  };
  b.psi[3] = adjoint_from_solution(b.phi[1]);
  return b;
}

BoundedCount count_bounded_solutions(const LinearSystemAlongOrbit& sys, double T, double sv_tol,
                                     double integrator_tol) {
  if (sys.dim != 2 && sys.dim != 4) throw DomainError("count_bounded_solutions: dimension must be 2 or 4");
  if (!(T > 0.0) || !(sv_tol > 0.0)) throw DomainError("count_bounded_solutions: T and sv_tol must be positive");
  for (double edge : {-T, T}) {
    const double dev = (sys.coefficient(edge) - sys.asymptotic).max_abs();
    if (dev > 1e-6) {
      std::ostringstream msg;
      msg << "count_bounded_solutions: T=" << T << " too small, coefficient deviates by " << dev;
      throw DomainError(msg.str());
    }
  }
  const std::size_t n = sys.dim;
  numerics::IntegratorConfig cfg;
  cfg.rel_tol = integrator_tol;
  cfg.abs_tol = 1e-2 * integrator_tol;

  auto propagate = [&](Matrix basis, double from, double to) {
    const std::size_t k = basis.cols();
    numerics::orthonormalize_columns(basis);
    numerics::OdeRhs rhs = [&sys, n, k](double t, std::span<const double> y, std::span<double> dy) {
      const Matrix a = sys.coefficient(t);
      for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          double v = 0.0;
          for (std::size_t m = 0; m < n; ++m) v += a(i, m) * y[j * n + m];
          dy[j * n + i] = v;
        }
    };
    const double dir = to > from ? 1.0 : -1.0;
    double t = from;
    while (dir * (to - t) > 0.0) {
      const double next = dir * (to - t) > 0.5 ? t + dir * 0.5 : to;
      std::vector<double> y(n * k);
      for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < n; ++i) y[j * n + i] = basis(i, j);
      const auto tr = numerics::integrate_ode(rhs, std::move(y), t, next, cfg);
      const auto& yf = tr.final_state();
      for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < n; ++i) basis(i, j) = yf[j * n + i];
      numerics::orthonormalize_columns(basis);
      t = next;
    }
    return basis;
  };

  const Matrix u = propagate(sys.unstable_basis, -T, 0.0);
  const Matrix st = propagate(sys.stable_basis, T, 0.0);
  // Component of the stable subspace orthogonal to the unstable one.
  Matrix resid = st - u * (u.transpose() * st);
  const numerics::SvdResult svd = numerics::svd_small(resid);

  BoundedCount out;
  out.T = T;
  out.sines = svd.sigma;
  std::sort(out.sines.begin(), out.sines.end());
  out.n0 = static_cast<int>(std::count_if(out.sines.begin(), out.sines.end(), [sv_tol](double x) { return x < sv_tol; }));
  return out;
}

}  // namespace hcl::variational
