#include "hcl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hcl {

std::string_view to_string(Param p) {
  switch (p) {
    case Param::beta1: return "beta1";
    case Param::beta2: return "beta2";
    case Param::beta3: return "beta3";
    case Param::beta4: return "beta4";
    case Param::nu1: return "nu1";
  }
  return "?";
}

Param parse_param(std::string_view name) {
  if (name == "beta1" || name == "b1") return Param::beta1;
  if (name == "beta2" || name == "b2") return Param::beta2;
  if (name == "beta3" || name == "b3") return Param::beta3;
  if (name == "beta4" || name == "b4") return Param::beta4;
  if (name == "nu1") return Param::nu1;
  throw DomainError("unknown parameter id '" + std::string(name) + "'");
}

double SystemParams::get(Param p) const {
  switch (p) {
    case Param::beta1: return beta1;
    case Param::beta2: return beta2;
    case Param::beta3: return beta3;
    case Param::beta4: return beta4;
    case Param::nu1: return nu1;
  }
  throw DomainError("unknown parameter id");
}

void SystemParams::set(Param p, double v) {
  switch (p) {
    case Param::beta1: beta1 = v; return;
    case Param::beta2: beta2 = v; return;
    case Param::beta3: beta3 = v; return;
    case Param::beta4: beta4 = v; return;
    case Param::nu1: nu1 = v; return;
  }
  throw DomainError("unknown parameter id");
}

void SystemParams::validate() const {
  for (double v : {s, beta1, beta2, beta3, beta4, nu1})
    if (!std::isfinite(v)) throw DomainError("system parameters must be finite");
  if (!(s > 0.0)) throw DomainError("s must be positive");
}

namespace model {

namespace {

void check_finite(const StateVec& x) {
  for (double v : x)
    if (!std::isfinite(v)) throw DomainError("state vector has a non-finite component");
}

}  // namespace

StateVec eval_f(const StateVec& x, const SystemParams& p) {
  check_finite(x);
  p.validate();
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3];
  return {
      x3,
      x4,
      x1 - (x1 * x1 + p.beta1 * x2 * x2) * x1 - p.beta3 * x2 - p.nu1 * x3,
      p.s * x2 - (p.beta1 * x1 * x1 + p.beta2 * x2 * x2) * x2 - p.beta3 * x1 - p.beta4 * x2 * x2 - p.nu1 * x4,
  };
}

Mat4 eval_jacobian(const StateVec& x, const SystemParams& p) {
  const double x1 = x[0], x2 = x[1];
  const double cross = -2.0 * p.beta1 * x1 * x2 - p.beta3;
  Mat4 j{};
  j[0] = {0.0, 0.0, 1.0, 0.0};
  j[1] = {0.0, 0.0, 0.0, 1.0};
  j[2] = {1.0 - 3.0 * x1 * x1 - p.beta1 * x2 * x2, cross, -p.nu1, 0.0};
  j[3] = {cross, p.s - p.beta1 * x1 * x1 - 3.0 * p.beta2 * x2 * x2 - 2.0 * p.beta4 * x2, 0.0, -p.nu1};
  return j;
}

Vec4 eval_d2f(const StateVec& x, const SystemParams& p, const Vec4& u, const Vec4& v) {
  const double x1 = x[0], x2 = x[1];
  // Symmetric products first so that swapping u and v is exact.
  const double p11 = u[0] * v[0], p22 = u[1] * v[1], m12 = u[0] * v[1] + u[1] * v[0];
  return {
      0.0,
      0.0,
      -6.0 * x1 * p11 - 2.0 * p.beta1 * x2 * m12 - 2.0 * p.beta1 * x1 * p22,
      -2.0 * p.beta1 * x2 * p11 - 2.0 * p.beta1 * x1 * m12 - (6.0 * p.beta2 * x2 + 2.0 * p.beta4) * p22,
  };
}

Vec4 eval_d3f(const StateVec& /*x*/, const SystemParams& p, const Vec4& u, const Vec4& v, const Vec4& w) {
  // Sorted operands make the result exactly invariant under permutations of (u, v, w).
  auto prod = [](double a, double b, double c) {
    std::array<double, 3> f{a, b, c};
    std::sort(f.begin(), f.end());
    return f[0] * f[1] * f[2];
  };
  auto sum = [](double a, double b, double c) {
    std::array<double, 3> f{a, b, c};
    std::sort(f.begin(), f.end());
    return f[0] + f[1] + f[2];
  };
  const double s122 = sum(prod(u[0], v[1], w[1]), prod(u[1], v[0], w[1]), prod(u[1], v[1], w[0]));
  const double s112 = sum(prod(u[0], v[0], w[1]), prod(u[0], v[1], w[0]), prod(u[1], v[0], w[0]));
  return {
      0.0,
      0.0,
      -6.0 * prod(u[0], v[0], w[0]) - 2.0 * p.beta1 * s122,
      -2.0 * p.beta1 * s112 - 6.0 * p.beta2 * prod(u[1], v[1], w[1]),
  };
}

Vec4 eval_dmu_f(const StateVec& x, const SystemParams& /*p*/, Param which) {
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3];
  switch (which) {
    case Param::beta1: return {0.0, 0.0, -x2 * x2 * x1, -x1 * x1 * x2};
    case Param::beta2: return {0.0, 0.0, 0.0, -x2 * x2 * x2};
    case Param::beta3: return {0.0, 0.0, -x2, -x1};
    case Param::beta4: return {0.0, 0.0, 0.0, -x2 * x2};
    case Param::nu1: return {0.0, 0.0, -x3, -x4};
  }
  throw DomainError("unknown parameter id");
}

Vec4 eval_dmu_dx_f(const StateVec& x, const SystemParams& /*p*/, Param which, const Vec4& u) {
  const double x1 = x[0], x2 = x[1];
  switch (which) {
    case Param::beta1:
      return {0.0, 0.0, -x2 * x2 * u[0] - 2.0 * x1 * x2 * u[1], -2.0 * x1 * x2 * u[0] - x1 * x1 * u[1]};
    case Param::beta2: return {0.0, 0.0, 0.0, -3.0 * x2 * x2 * u[1]};
    case Param::beta3: return {0.0, 0.0, -u[1], -u[0]};
    case Param::beta4: return {0.0, 0.0, 0.0, -2.0 * x2 * u[1]};
    case Param::nu1: return {0.0, 0.0, -u[2], -u[3]};
  }
  throw DomainError("unknown parameter id");
}

double hamiltonian(const StateVec& x, const SystemParams& p) {
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3];
  const double x1s = x1 * x1, x2s = x2 * x2;
  return 0.5 * (-x1s - p.s * x2s + p.beta1 * x1s * x2s + x3 * x3 + x4 * x4) + 0.25 * (x1s * x1s + p.beta2 * x2s * x2s) +
         p.beta3 * x1 * x2 + p.beta4 * x2s * x2 / 3.0;
}

Vec4 hamiltonian_gradient(const StateVec& x, const SystemParams& p) {
  const double x1 = x[0], x2 = x[1];
  return {
      -x1 + p.beta1 * x1 * x2 * x2 + x1 * x1 * x1 + p.beta3 * x2,
      -p.s * x2 + p.beta1 * x1 * x1 * x2 + p.beta2 * x2 * x2 * x2 + p.beta3 * x1 + p.beta4 * x2 * x2,
      x[2],
      x[3],
  };
}

StateVec homoclinic(double t, int sign) {
  if (sign != 1 && sign != -1) throw DomainError("homoclinic orbit sign must be +1 or -1");
  const double sech = 1.0 / std::cosh(t);
  const double a = sign * std::sqrt(2.0) * sech;
  return {a, 0.0, -a * std::tanh(t), 0.0};
}

StateVec homoclinic_velocity(double t, int sign) {
  if (sign != 1 && sign != -1) throw DomainError("homoclinic orbit sign must be +1 or -1");
  const double sech = 1.0 / std::cosh(t);
  const double th = std::tanh(t);
  const double a = sign * std::sqrt(2.0);
  return {-a * sech * th, 0.0, -a * (2.0 * sech * sech * sech - sech), 0.0};
}

SpectralData equilibrium_spectrum(const SystemParams& p) {
  p.validate();
  // K = [[1, -b3], [-b3, s]]; one Jacobi rotation diagonalizes it.
  const double k00 = 1.0, k01 = -p.beta3, k11 = p.s;
  const double theta = 0.5 * std::atan2(2.0 * k01, k00 - k11);
  const double c = std::cos(theta), sn = std::sin(theta);
  const std::array<std::array<double, 2>, 2> kvec{{{c, sn}, {-sn, c}}};
  const std::array<double, 2> kval{k00 * c * c + 2.0 * k01 * c * sn + k11 * sn * sn,
                                   k00 * sn * sn - 2.0 * k01 * c * sn + k11 * c * c};

  struct Pair {
    double lambda;
    Vec4 right;
    Vec4 left;
  };
  std::array<Pair, 4> pairs{};
  const double nu = p.nu1;
  for (int i = 0; i < 2; ++i) {
    const double disc = nu * nu + 4.0 * kval[i];
    const auto& v = kvec[i];
    if (disc <= 0.0) {
      std::ostringstream msg;
      msg << "non-hyperbolic equilibrium: complex eigenvalue " << 0.0 - 0.5 * nu << " +- " << 0.5 * std::sqrt(-disc)
          << "i";
      throw DomainError(msg.str());
    }
    if (kval[i] <= 0.0) {
      // lambda^2 + nu lambda = kappa <= 0 leaves no saddle pair for this mode.
      std::ostringstream msg;
      msg << "equilibrium is not a 2+2 saddle: eigenvalue " << 0.5 * (-nu + std::sqrt(disc));
      throw DomainError(msg.str());
    }
    for (int sgn : {-1, 1}) {
      const double lam = 0.5 * (-nu + sgn * std::sqrt(disc));
      if (std::abs(lam) < 1e-9) {
        std::ostringstream msg;
        msg << "non-hyperbolic equilibrium: eigenvalue " << lam;
        throw DomainError(msg.str());
      }
      Vec4 r{v[0], v[1], lam * v[0], lam * v[1]};
      r = (1.0 / std::sqrt(dot(r, r))) * r;
      Vec4 l{(lam + nu) * v[0], (lam + nu) * v[1], v[0], v[1]};
      l = (1.0 / dot(l, r)) * l;
      pairs[2 * i + (sgn > 0 ? 1 : 0)] = {lam, r, l};
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.lambda < b.lambda; });

  SpectralData out;
  for (int i = 0; i < 4; ++i) {
    out.eigenvalues[i] = pairs[i].lambda;
    out.eigenvectors[i] = pairs[i].right;
  }
  // Ascending order puts the two negative eigenvalues first.
  for (int i = 0; i < 2; ++i) {
    out.stable_basis[i] = pairs[i].right;
    out.stable_left[i] = pairs[i].left;
    out.unstable_basis[i] = pairs[i + 2].right;
    out.unstable_left[i] = pairs[i + 2].left;
  }
  out.degenerate = p.degenerate_eigenvalues();
  return out;
}

}  // namespace model
}  // namespace hcl
