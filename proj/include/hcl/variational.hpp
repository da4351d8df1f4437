#pragma once

// Variational equations along the homoclinic orbit, their tangential (TVE)
// and normal (NVE) blocks, the explicit tangent-block solution basis and the
// count of independent bounded solutions.

#include <array>
#include <functional>
#include <vector>

#include "hcl/numerics.hpp"
#include "hcl/types.hpp"

namespace hcl::variational {

/// xi' = A(t) xi with A(t) -> A_inf as |t| -> inf.
struct LinearSystemAlongOrbit {
  std::size_t dim = 0;
  std::function<numerics::Matrix(double)> coefficient;
  numerics::Matrix asymptotic;
  numerics::Matrix stable_basis;    // dim x dim/2, eigenvectors of A_inf with Re < 0
  numerics::Matrix unstable_basis;  // dim x dim/2, Re > 0
};

/// Time-gridded orbit with derivative data (cubic Hermite between nodes).
struct OrbitSample {
  std::vector<double> t;
  std::vector<Vec4> x;
  std::vector<Vec4> dx;

  Vec4 operator()(double time) const;
};

OrbitSample sample_homoclinic(double half_length, std::size_t intervals, int sign = +1);

/// Full 4D VE along x^h. Requires beta3 = nu1 = 0 (x^h lies in x2 = 0, so beta4 is free).
LinearSystemAlongOrbit ve_along_homoclinic(const SystemParams& p, int sign = +1);

/// 4D VE along a numerically supplied orbit; the asymptotic matrix is the Jacobian at the origin.
LinearSystemAlongOrbit ve_along_orbit(const OrbitSample& orbit, const SystemParams& p);

/// eta'' = (s - 2 beta1 sech^2 t) eta - nu1 eta' in first-order form. Requires beta3 = 0.
LinearSystemAlongOrbit nve_2d(const SystemParams& p);

/// xi1'' = (1 - 6 sech^2 t) xi1 - nu1 xi1'.
LinearSystemAlongOrbit tve_2d(const SystemParams& p);

/// Residual max-norm of xi' - A(t) xi with xi' from central differences.
double ode_residual(const LinearSystemAlongOrbit& sys, const std::function<std::vector<double>(double)>& sol,
                    double t, double h = 1e-4);

/// phi1, phi3 (solutions of the TVE embedded in 4D) and their duals psi1, psi3.
/// phi1 = -xdot^h / sqrt2 for the + orbit.
struct TangentBasis {
  Vec4 phi1, phi3, psi1, psi3;
};
TangentBasis analytic_tangent_basis(double t);

using VecCallback = std::function<Vec4(double)>;

/// psi = -J4 phi, a solution of the adjoint VE whenever phi solves the Hamiltonian VE.
VecCallback adjoint_from_solution(VecCallback phi);

/// Biorthogonal fundamental system of the 4D VE at an NVE resonance:
/// phi1, phi3 from analytic_tangent_basis, phi2 = (0, xi2, 0, xi2') bounded,
/// phi4 = (0, u, 0, u') with xi2 u' - xi2' u = 1 (numerical). Valid on
/// |t| <= half_length.
struct SolutionBasis {
  std::array<VecCallback, 4> phi;
  std::array<VecCallback, 4> psi;
  std::array<bool, 4> bounded{};  // phi_j bounded on the whole line
  double half_length = 0.0;
};
SolutionBasis resonant_solution_basis(double s, int ell, double half_length = 10.0);

struct BoundedCount {
  int n0 = 0;
  std::vector<double> sines;  // principal-angle sines, ascending
  double T = 0.0;
};

/// Propagates the unstable eigenspace of A_inf from -T to 0 and the stable one
/// from +T to 0 (re-orthonormalized every 0.5), then counts the principal
/// angles between them whose sine is below sv_tol.
BoundedCount count_bounded_solutions(const LinearSystemAlongOrbit& sys, double T = 20.0, double sv_tol = 1e-4,
                                     double integrator_tol = 1e-10);

}  // namespace hcl::variational
