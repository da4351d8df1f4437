#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hcl/model.hpp"
#include "hcl/numerics.hpp"

using namespace hcl;

namespace {

SystemParams params(double s, double b1, double b2, double b3, double b4, double nu) {
  SystemParams p;
  p.s = s;
  p.beta1 = b1;
  p.beta2 = b2;
  p.beta3 = b3;
  p.beta4 = b4;
  p.nu1 = nu;
  return p;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

struct RandomDraw {
  std::mt19937 rng{1234u};
  std::uniform_real_distribution<double> u{-1.5, 1.5};
  Vec4 vec() { return {u(rng), u(rng), u(rng), u(rng)}; }
  SystemParams p() { return params(0.5 + std::abs(u(rng)), u(rng), u(rng), u(rng), u(rng), 0.3 * u(rng)); }
};

}  // namespace

TEST_CASE("vector field") {
  const SystemParams p = params(2, 0.3, 0.7, 0.1, 0.4, 0.2);
  CHECK(model::eval_f({0, 0, 0, 0}, p) == Vec4{0, 0, 0, 0});

  const Vec4 f = model::eval_f({std::sqrt(2.0), 0, 0, 0}, params(2, 0, 0, 0, 0, 0));
  CHECK(f[0] == 0.0);
  CHECK(f[1] == 0.0);
  CHECK(f[2] == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-15));
  CHECK(f[3] == 0.0);

  const SystemParams q = params(2, 1.7, 1, 0, 2, 0);
  for (double t = -20; t <= 20; t += 0.37) {
    const Vec4 d = model::eval_f(model::homoclinic(t), q) - model::homoclinic_velocity(t);
    CHECK(max_norm(d) < 1e-12);
  }
  CHECK_THROWS_AS(model::eval_f({NAN, 0, 0, 0}, q), DomainError);
}

TEST_CASE("jacobian") {
  const Mat4 j0 = model::eval_jacobian({0, 0, 0, 0}, params(2, 0.5, 1, 0, 0, 0));
  CHECK(j0[2][1] == 0.0);
  CHECK(j0[3][0] == 0.0);
  CHECK(j0[2][0] == 1.0);
  CHECK(j0[3][1] == 2.0);

  const Mat4 jh = model::eval_jacobian(model::homoclinic(0), params(2, 0, 0, 0, 0, 0));
  CHECK(jh[2][0] == doctest::Approx(-5.0));  // 1 - 3 x1^2 with x1 = sqrt 2
  CHECK(jh[3][1] == doctest::Approx(2.0));   // s - beta1 x1^2

  RandomDraw rd;
  for (int k = 0; k < 100; ++k) {
    const Vec4 x = rd.vec();
    const SystemParams p = rd.p();
    const Mat4 j = model::eval_jacobian(x, p);
    for (int c = 0; c < 4; ++c) {
      const double h = 1e-6;
      Vec4 xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      const Vec4 fd = (1.0 / (2 * h)) * (model::eval_f(xp, p) - model::eval_f(xm, p));
      for (int r = 0; r < 4; ++r) CHECK(rel_err(j[r][c], fd[r]) < 1e-6);
    }
    const double trace = j[0][0] + j[1][1] + j[2][2] + j[3][3];
    CHECK(trace == doctest::Approx(-2.0 * p.nu1).epsilon(1e-14));
  }
}

TEST_CASE("higher derivatives") {
  RandomDraw rd;
  for (int k = 0; k < 100; ++k) {
    const Vec4 x = rd.vec(), u = rd.vec(), v = rd.vec(), w = rd.vec();
    const SystemParams p = rd.p();
    CHECK(model::eval_d2f(x, p, u, Vec4{}) == Vec4{0, 0, 0, 0});
    CHECK(model::eval_d2f(x, p, u, v) == model::eval_d2f(x, p, v, u));
    // Mixed second difference along u, v.
    const double h = 1e-4;
    const Vec4 fd = (1.0 / (4 * h * h)) * (model::eval_f(x + h * u + h * v, p) - model::eval_f(x + h * u - h * v, p) -
                                           model::eval_f(x - h * u + h * v, p) + model::eval_f(x - h * u - h * v, p));
    const Vec4 d2 = model::eval_d2f(x, p, u, v);
    for (int r = 0; r < 4; ++r) CHECK(std::abs(d2[r] - fd[r]) < 1e-5 * std::max(1.0, std::abs(d2[r])));

    const Vec4 d3 = model::eval_d3f(x, p, u, v, w);
    CHECK(model::eval_d3f(x, p, u, v, Vec4{}) == Vec4{0, 0, 0, 0});
    CHECK(d3 == model::eval_d3f(x, p, v, w, u));
    CHECK(d3 == model::eval_d3f(x, p, w, u, v));
    CHECK(d3 == model::eval_d3f(x, p, v, u, w));
    CHECK(d3 == model::eval_d3f(rd.vec(), p, u, v, w));
    // d3f as the derivative of d2f along w.
    const Vec4 fd3 = (1.0 / (2 * h)) * (model::eval_d2f(x + h * w, p, u, v) - model::eval_d2f(x - h * w, p, u, v));
    for (int r = 0; r < 4; ++r) CHECK(std::abs(d3[r] - fd3[r]) < 1e-6 * std::max(1.0, std::abs(d3[r])));
  }
}

TEST_CASE("parameter derivatives") {
  const Vec4 x{0.3, -0.7, 1.1, 0.4};
  const SystemParams p = params(2, 0.6, 0.9, 0.2, -0.3, 0.1);
  CHECK(model::eval_dmu_f(x, p, Param::beta3) == Vec4{0, 0, -x[1], -x[0]});
  CHECK(model::eval_dmu_f({1.2, 0, 0.5, 0}, p, Param::beta1) == Vec4{0, 0, 0, 0});

  RandomDraw rd;
  for (int k = 0; k < 100; ++k) {
    const Vec4 y = rd.vec(), u = rd.vec();
    const SystemParams q = rd.p();
    for (Param which : {Param::beta1, Param::beta2, Param::beta3, Param::beta4, Param::nu1}) {
      const double h = 1e-6;
      SystemParams qp = q, qm = q;
      qp.set(which, q.get(which) + h);
      qm.set(which, q.get(which) - h);
      const Vec4 fd = (1.0 / (2 * h)) * (model::eval_f(y, qp) - model::eval_f(y, qm));
      const Vec4 an = model::eval_dmu_f(y, q, which);
      for (int r = 0; r < 4; ++r) CHECK(rel_err(an[r], fd[r]) < 1e-6);
      // Mixed derivative D_mu D_x f u.
      const Mat4 jp = model::eval_jacobian(y, qp), jm = model::eval_jacobian(y, qm);
      const Vec4 fdx = (1.0 / (2 * h)) * (jp * u - jm * u);
      const Vec4 anx = model::eval_dmu_dx_f(y, q, which, u);
      for (int r = 0; r < 4; ++r) CHECK(rel_err(anx[r], fdx[r]) < 1e-6);
    }
  }
}

TEST_CASE("hamiltonian") {
  const SystemParams p = params(2, 1.3, 0.8, 0, 2, 0);
  CHECK(model::hamiltonian({0, 0, 0, 0}, p) == 0.0);
  for (double t = -20; t <= 20; t += 0.5) CHECK(std::abs(model::hamiltonian(model::homoclinic(t), p)) < 1e-15);

  RandomDraw rd;
  for (int k = 0; k < 20; ++k) {
    const Vec4 x = rd.vec();
    SystemParams q = rd.p();
    q.nu1 = 0.0;
    const Vec4 grad = model::hamiltonian_gradient(x, q);
    const Vec4 f = model::eval_f(x, q);
    // f = J4 grad H with J4 = [[0, I], [-I, 0]].
    CHECK(max_norm(f - apply_j4(grad)) < 1e-12);
  }

  // Conservation along an integrated trajectory.
  const SystemParams q = params(2, 0.7, 1, 0.2, 0.5, 0);
  const numerics::OdeRhs rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    const Vec4 f = model::eval_f({y[0], y[1], y[2], y[3]}, q);
    for (int i = 0; i < 4; ++i) dy[i] = f[i];
  };
  numerics::IntegratorConfig cfg;
  const Vec4 x0{0.4, 0.2, 0.1, -0.2};
  const auto tr = numerics::integrate_ode(rhs, {x0.begin(), x0.end()}, 0.0, 40.0, cfg);
  const double h0 = model::hamiltonian(x0, q);
  double drift = 0.0;
  for (double t = 0; t <= 40; t += 0.25) {
    const auto y = tr(t);
    drift = std::max(drift, std::abs(model::hamiltonian({y[0], y[1], y[2], y[3]}, q) - h0));
  }
  CHECK(drift < 1e-8);
}

TEST_CASE("homoclinic orbit") {
  const Vec4 x0 = model::homoclinic(0.0, +1);
  CHECK(x0[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(x0[1] == 0.0);
  CHECK(x0[2] == 0.0);
  CHECK(max_norm(model::homoclinic(20)) < 1e-7);
  CHECK(max_norm(model::homoclinic(-20)) < 1e-7);
  CHECK(model::homoclinic(0.3, -1) == (-1.0) * model::homoclinic(0.3, +1));
  const SystemParams p = params(2, 1.7, 1, 0, 2, 0);
  for (double t = -10; t <= 10; t += 0.7) {
    const double h = 1e-4;
    const Vec4 fd = (1.0 / (12 * h)) * (model::homoclinic(t - 2 * h) - 8.0 * model::homoclinic(t - h) +
                                        8.0 * model::homoclinic(t + h) - model::homoclinic(t + 2 * h));
    CHECK(max_norm(fd - model::eval_f(model::homoclinic(t), p)) < 1e-8);
  }
  CHECK_THROWS_AS(model::homoclinic(0, 2), DomainError);

  // Integrating the flow from x^h(-10) lands on x^h(10).
  const numerics::OdeRhs rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    const Vec4 f = model::eval_f({y[0], y[1], y[2], y[3]}, p);
    for (int i = 0; i < 4; ++i) dy[i] = f[i];
  };
  numerics::IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  const Vec4 a = model::homoclinic(-10);
  const auto tr = numerics::integrate_ode(rhs, {a.begin(), a.end()}, -10, 10, cfg);
  const auto y = tr.final_state();
  CHECK(max_norm(Vec4{y[0], y[1], y[2], y[3]} - model::homoclinic(10)) < 1e-6);
}

TEST_CASE("equilibrium spectrum") {
  const auto sp = model::equilibrium_spectrum(params(2, 0, 0, 0, 0, 0));
  CHECK(sp.eigenvalues[0] == doctest::Approx(-std::sqrt(2.0)));
  CHECK(sp.eigenvalues[1] == doctest::Approx(-1.0));
  CHECK(sp.eigenvalues[2] == doctest::Approx(1.0));
  CHECK(sp.eigenvalues[3] == doctest::Approx(std::sqrt(2.0)));
  CHECK_FALSE(sp.degenerate);

  const auto d = model::equilibrium_spectrum(params(1, 0, 0, 0, 0, 0));
  CHECK(d.degenerate);
  CHECK(d.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(d.eigenvalues[3] == doctest::Approx(1.0));
  // Two independent stable and two independent unstable directions.
  const double cross = dot(d.stable_basis[0], d.stable_basis[1]);
  CHECK(std::abs(cross) < 1 - 1e-6);

  // Coupled case: roots of det(lambda^2 + nu lambda - K) = 0 from the quartic directly.
  const SystemParams p = params(2, 0, 0, 0.1, 0, 0.05);
  const auto c = model::equilibrium_spectrum(p);
  const Mat4 j = model::eval_jacobian({0, 0, 0, 0}, p);
  for (int i = 0; i < 4; ++i) {
    const double l = c.eigenvalues[i];
    // Characteristic polynomial of [[0, I], [K, -nu I]]: (l^2 + nu l - 1)(l^2 + nu l - s) - b3^2.
    const double q = l * l + p.nu1 * l;
    const double charpoly = (q - 1.0) * (q - p.s) - p.beta3 * p.beta3;
    CHECK(std::abs(charpoly) < 1e-10);
    const Vec4 r = j * c.eigenvectors[i] - l * c.eigenvectors[i];
    CHECK(max_norm(r) < 1e-12);
  }
  for (int i = 0; i < 2; ++i) {
    // Left eigenvectors annihilate the opposite eigenspace.
    for (int k = 0; k < 2; ++k) {
      CHECK(std::abs(dot(c.stable_left[i], c.unstable_basis[k])) < 1e-12);
      CHECK(std::abs(dot(c.unstable_left[i], c.stable_basis[k])) < 1e-12);
    }
  }

  CHECK_THROWS_AS(model::equilibrium_spectrum(params(0.5, 0, 0, 2, 0, 0)), DomainError);
  CHECK_THROWS_AS(model::equilibrium_spectrum(params(-1, 0, 0, 0, 0, 0)), DomainError);
}

TEST_CASE("parameter ids") {
  CHECK(parse_param("beta3") == Param::beta3);
  CHECK(parse_param("nu1") == Param::nu1);
  CHECK(to_string(Param::beta2) == "beta2");
  CHECK_THROWS_AS(parse_param("gamma"), DomainError);
}
