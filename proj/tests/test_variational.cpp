#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hcl/fuchsian.hpp"
#include "hcl/model.hpp"
#include "hcl/variational.hpp"

using namespace hcl;
using namespace hcl::variational;

namespace {

SystemParams resonant(double s, int ell) {
  SystemParams p;
  p.s = s;
  p.beta1 = fuchsian::resonance_beta1(s, ell);
  p.beta2 = 1.0;
  p.beta4 = 2.0;
  return p;
}

std::function<std::vector<double>(double)> as_vec(const VecCallback& f) {
  return [f](double t) {
    const Vec4 v = f(t);
    return std::vector<double>{v.begin(), v.end()};
  };
}

// Residual of psi' = -A(t)^T psi with a fourth-order difference.
double adjoint_residual(const LinearSystemAlongOrbit& sys, const VecCallback& psi, double t, double h = 1e-4) {
  const Vec4 d = (1.0 / (12 * h)) * (psi(t - 2 * h) - 8.0 * psi(t - h) + 8.0 * psi(t + h) - psi(t + 2 * h));
  const numerics::Matrix a = sys.coefficient(t);
  const Vec4 y = psi(t);
  double r = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double aty = 0.0;
    for (std::size_t k = 0; k < 4; ++k) aty += a(k, i) * y[k];
    r = std::max(r, std::abs(d[i] + aty));
  }
  return r;
}

}  // namespace

TEST_CASE("VE along the homoclinic orbit") {
  const SystemParams p = resonant(2.0, 0);
  const LinearSystemAlongOrbit ve = ve_along_homoclinic(p);
  CHECK(ve.dim == 4);
  for (double t : {-3.0, 0.0, 0.4, 7.0}) {
    const numerics::Matrix a = ve.coefficient(t);
    for (std::size_t i : {0u, 2u})
      for (std::size_t j : {1u, 3u}) {
        CHECK(a(i, j) == 0.0);
        CHECK(a(j, i) == 0.0);
      }
  }
  for (double t : {-20.0, 20.0}) CHECK((ve.coefficient(t) - ve.asymptotic).max_abs() < 1e-7);

  // x^h-dot solves the VE.
  const VecCallback xdot = [](double t) { return model::homoclinic_velocity(t); };
  for (double t = -10; t <= 10; t += 0.5) CHECK(ode_residual(ve, as_vec(xdot), t) < 1e-8);

  SystemParams bad = p;
  bad.beta3 = 0.1;
  CHECK_THROWS_AS(ve_along_homoclinic(bad), DomainError);
}

TEST_CASE("analytic tangent basis") {
  const LinearSystemAlongOrbit ve = ve_along_homoclinic(resonant(2.0, 0));
  for (double t : {0.0, 1.0, -1.0, 5.0, -5.0}) {
    const TangentBasis b = analytic_tangent_basis(t);
    CHECK(dot(b.psi1, b.phi1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dot(b.psi3, b.phi3) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(dot(b.psi1, b.phi3)) < 1e-12);
    CHECK(std::abs(dot(b.psi3, b.phi1)) < 1e-12);
    // phi1 is the orbit velocity scaled by -1/sqrt 2.
    const Vec4 v = model::homoclinic_velocity(t);
    CHECK(max_norm(b.phi1 + (1.0 / std::sqrt(2.0)) * v) < 1e-14);
  }
  const VecCallback phi3 = [](double t) { return analytic_tangent_basis(t).phi3; };
  const VecCallback psi1 = [](double t) { return analytic_tangent_basis(t).psi1; };
  const VecCallback psi3 = [](double t) { return analytic_tangent_basis(t).psi3; };
  for (double t = -8; t <= 8; t += 0.4) {
    CHECK(ode_residual(ve, as_vec(phi3), t) < 1e-8 * std::max(1.0, max_norm(phi3(t))));
    CHECK(adjoint_residual(ve, psi1, t) < 1e-8);
    CHECK(adjoint_residual(ve, psi3, t) < 1e-8 * std::max(1.0, max_norm(psi3(t))));
  }
}

TEST_CASE("adjoint from solution") {
  const SystemParams p = resonant(2.0, 0);
  const LinearSystemAlongOrbit ve = ve_along_homoclinic(p);
  const VecCallback xdot = [](double t) { return model::homoclinic_velocity(t); };
  const VecCallback psi = adjoint_from_solution(xdot);
  for (double t = -10; t <= 10; t += 0.25) {
    CHECK(dot(xdot(t), apply_j4(xdot(t))) == 0.0);
    CHECK(max_norm(psi(t) - model::hamiltonian_gradient(model::homoclinic(t), p)) < 1e-14);
    CHECK(adjoint_residual(ve, psi, t) < 1e-8);
  }
}

TEST_CASE("resonant solution basis") {
  for (int ell : {0, 1, 2}) {
    const SolutionBasis b = resonant_solution_basis(2.0, ell);
    CHECK(b.bounded[0]);
    CHECK(b.bounded[1]);
    CHECK_FALSE(b.bounded[3]);
    double dev = 0.0;
    for (double t = -8; t <= 8; t += 0.5)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) dev = std::max(dev, std::abs(dot(b.psi[j](t), b.phi[k](t)) - (j == k ? 1.0 : 0.0)));
    CHECK_MESSAGE(dev < 1e-8, "ell=" << ell << " biorthogonality deviation " << dev);
  }
}

TEST_CASE("fundamental matrix determinant") {
  const SystemParams p = resonant(2.0, 1);
  const LinearSystemAlongOrbit ve = ve_along_homoclinic(p);
  const numerics::OdeRhs rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    const numerics::Matrix a = ve.coefficient(t);
    for (std::size_t c = 0; c < 4; ++c)
      for (std::size_t r = 0; r < 4; ++r) {
        double acc = 0.0;
        for (std::size_t k = 0; k < 4; ++k) acc += a(r, k) * y[4 * k + c];
        dy[4 * r + c] = acc;
      }
  };
  // Windows of length 5 restarted at the identity keep the determinant well conditioned.
  numerics::IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  double product = 1.0;
  for (double t0 = -10.0; t0 < 10.0; t0 += 5.0) {
    std::vector<double> y0(16, 0.0);
    for (int i = 0; i < 4; ++i) y0[5 * i] = 1.0;
    const auto tr = numerics::integrate_ode(rhs, y0, t0, t0 + 5.0, cfg);
    for (double t = t0 + 1.0; t <= t0 + 5.0; t += 1.0) {
      const auto y = tr(t);
      numerics::Matrix m(4, 4);
      for (std::size_t i = 0; i < 16; ++i) m(i / 4, i % 4) = y[i];
      const double det = numerics::LuDecomposition(m).determinant();
      CHECK(std::abs(det - 1.0) < 1e-6);
      if (t == t0 + 5.0) product *= det;
    }
  }
  CHECK(std::abs(product - 1.0) < 1e-6);
}

TEST_CASE("bounded solution count") {
  SystemParams p;
  p.s = 2.0;
  p.beta1 = 1.7071068;
  CHECK(count_bounded_solutions(ve_along_homoclinic(p)).n0 == 2);
  p.beta1 = 1.0;
  const BoundedCount one = count_bounded_solutions(ve_along_homoclinic(p));
  CHECK(one.n0 == 1);
  CHECK(one.sines.size() == 2);
  CHECK(one.T == 20.0);

  SystemParams q;
  q.s = 2.0;
  CHECK(count_bounded_solutions(tve_2d(q)).n0 == 1);
  q.beta1 = fuchsian::resonance_beta1(2.0, 3);
  CHECK(count_bounded_solutions(nve_2d(q)).n0 == 1);

  // Two iff resonant, on random parameters.
  std::mt19937 rng(31u);
  std::uniform_real_distribution<double> us(1.2, 4.0), ub(0.2, 20.0);
  std::uniform_int_distribution<int> ul(0, 8);
  for (int k = 0; k < 50; ++k) {
    SystemParams r;
    r.s = us(rng);
    r.beta1 = k % 2 == 0 ? fuchsian::resonance_beta1(r.s, ul(rng)) : ub(rng);
    bool near = false;
    for (int ell = 0; ell <= 8; ++ell) near = near || std::abs(r.beta1 - fuchsian::resonance_beta1(r.s, ell)) < 1e-6;
    CHECK_MESSAGE(count_bounded_solutions(ve_along_homoclinic(r)).n0 == (near ? 2 : 1),
                  "s=" << r.s << " beta1=" << r.beta1);
  }

  CHECK_THROWS_AS(count_bounded_solutions(ve_along_homoclinic(p), 2.0), DomainError);
}
