#pragma once

// Coupled Ginzburg-Landau steady-state system
//
//   x1' = x3,  x3' = x1 - (x1^2 + b1 x2^2) x1 - b3 x2 - nu1 x3
//   x2' = x4,  x4' = s x2 - (b1 x1^2 + b2 x2^2) x2 - b3 x1 - b4 x2^2 - nu1 x4
//
// together with its derivative tensors, Hamiltonian and the explicit
// homoclinic orbit on the (x1, x3)-plane. All derivatives are closed forms.

#include <array>

#include "hcl/types.hpp"

namespace hcl::model {

StateVec eval_f(const StateVec& x, const SystemParams& p);

/// df/dx, row i = component of f, column j = x_j.
Mat4 eval_jacobian(const StateVec& x, const SystemParams& p);

/// D2f(x)(u, v); symmetric and bilinear.
Vec4 eval_d2f(const StateVec& x, const SystemParams& p, const Vec4& u, const Vec4& v);

/// D3f(x)(u, v, w); the field is cubic so this does not depend on x.
Vec4 eval_d3f(const StateVec& x, const SystemParams& p, const Vec4& u, const Vec4& v, const Vec4& w);

Vec4 eval_dmu_f(const StateVec& x, const SystemParams& p, Param which);

/// D_mu D_x f(x) u.
Vec4 eval_dmu_dx_f(const StateVec& x, const SystemParams& p, Param which, const Vec4& u);

double hamiltonian(const StateVec& x, const SystemParams& p);
Vec4 hamiltonian_gradient(const StateVec& x, const SystemParams& p);

/// x_+-^h(t) = (+-sqrt2 sech t, 0, -+sqrt2 sech t tanh t, 0). sign must be +1 or -1.
StateVec homoclinic(double t, int sign = +1);
/// d/dt of homoclinic(t, sign).
StateVec homoclinic_velocity(double t, int sign = +1);

struct SpectralData {
  std::array<double, 4> eigenvalues{};       // ascending
  std::array<Vec4, 4> eigenvectors{};        // unit, paired with eigenvalues
  std::array<Vec4, 2> stable_basis{};        // eigenvectors of the two negative eigenvalues
  std::array<Vec4, 2> unstable_basis{};
  /// Left eigenvectors of the stable (resp. unstable) eigenvalues. Their rows
  /// annihilate the unstable (resp. stable) eigenspace.
  std::array<Vec4, 2> stable_left{};
  std::array<Vec4, 2> unstable_left{};
  bool degenerate = false;                   // s == 1 within 1e-6
};

/// Eigen-decomposition of df/dx at the origin.
///
/// The linearization has the block form [[0, I], [K, -nu1 I]] with
/// K = [[1, -b3], [-b3, s]] symmetric, so each eigenpair (kappa, v) of K
/// yields lambda^2 + nu1 lambda = kappa with eigenvector (v, lambda v).
/// Throws DomainError when an eigenvalue is complex or within 1e-9 of the
/// imaginary axis.
SpectralData equilibrium_spectrum(const SystemParams& p);

}  // namespace hcl::model
