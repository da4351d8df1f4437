#pragma once

// Self-contained numerical kernels: Dormand-Prince integration with dense
// output, quadrature on the real line, small dense LU/SVD, damped Newton.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hcl/types.hpp"

namespace hcl::numerics {

/// Row-major dense matrix for small problems.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Matrix transpose() const;
  Matrix operator*(const Matrix& rhs) const;
  std::vector<double> operator*(std::span<const double> v) const;
  Matrix operator-(const Matrix& rhs) const;
  double max_abs() const;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------- ODEs

enum class RkMethod { dopri54 };

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.0;  // 0: unbounded
  RkMethod method = RkMethod::dopri54;
  std::size_t max_steps = 2'000'000;

  /// Throws DomainError unless both tolerances lie in (0, 1e-2].
  void validate() const;
};

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Immutable dense-output solution of an initial value problem.
class Trajectory {
public:
  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  std::size_t dimension() const { return dim_; }
  std::size_t steps() const { return t_.size() - 1; }
  std::size_t rhs_evaluations() const { return evaluations_; }

  /// State at any t between t_begin() and t_end() (either direction).
  std::vector<double> operator()(double t) const;
  const std::vector<double>& final_state() const { return final_; }

private:
  friend Trajectory integrate_ode(const OdeRhs&, std::vector<double>, double, double, const IntegratorConfig&);

  double t_begin_ = 0.0;
  double t_end_ = 0.0;
  std::size_t dim_ = 0;
  std::size_t evaluations_ = 0;
  std::vector<double> t_;      // step boundaries, monotone in integration direction
  std::vector<double> h_;      // signed step sizes
  std::vector<double> coeff_;  // 5 * dim dense-output coefficients per step
  std::vector<double> final_;
};

/// Adaptive Dormand-Prince 5(4) from t0 to t1 (t1 < t0 allowed).
/// Throws ConvergenceError on step-size underflow or step budget exhaustion.
Trajectory integrate_ode(const OdeRhs& rhs, std::vector<double> y0, double t0, double t1, const IntegratorConfig& cfg);

// ---------------------------------------------------------- quadrature

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

/// Adaptive Simpson (with Richardson correction) on [a, b].
QuadratureResult integrate_interval(const std::function<double(double)>& f, double a, double b, double tol,
                                    std::size_t max_evaluations = 4'000'000);

/// Integral over the whole real line of an integrand bounded by C exp(-decay_rate |t|).
///
/// C is estimated by sampling, the line is cut at T = ln(C / (decay_rate * allowance)) / decay_rate
/// where the tail allowance is 1e-2 * tol, and [-T, T] is integrated adaptively.
QuadratureResult integrate_line(const std::function<double(double)>& f, double decay_rate, double tol,
                                std::size_t max_evaluations = 4'000'000);

/// Same as integrate_line on [0, inf).
QuadratureResult integrate_half_line(const std::function<double(double)>& f, double decay_rate, double tol,
                                     std::size_t max_evaluations = 4'000'000);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(std::size_t n);

// ------------------------------------------------------ linear algebra

class LuDecomposition {
public:
  explicit LuDecomposition(Matrix a);

  std::vector<double> solve(std::span<const double> b) const;
  double determinant() const;
  /// max|U_ii| / min|U_ii|; infinity when a pivot vanished.
  double condition_estimate() const;
  bool singular() const { return singular_; }

private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
  bool singular_ = false;
};

struct SvdResult {
  Matrix u;                    // m x k, orthonormal columns
  std::vector<double> sigma;   // k = min(m, n) values, descending
  Matrix v;                    // n x k, orthonormal columns
};

/// One-sided Jacobi SVD for matrices up to 8 x 8.
SvdResult svd_small(const Matrix& m);

/// Orthonormalize the columns of a tall matrix in place (modified Gram-Schmidt, two passes).
/// Throws ConvergenceError if a column collapses.
void orthonormalize_columns(Matrix& a);

// -------------------------------------------------------------- Newton

enum class NewtonStatus { converged, iteration_cap, singular_jacobian };

struct NewtonReport {
  std::vector<double> x;
  NewtonStatus status = NewtonStatus::iteration_cap;
  int iterations = 0;
  double residual_norm = 0.0;
  std::vector<double> step_norms;  // |dx|_inf per iteration
  bool converged() const { return status == NewtonStatus::converged; }
};

using ResidualFn = std::function<std::vector<double>(std::span<const double>)>;
using JacobianFn = std::function<Matrix(std::span<const double>)>;

struct NewtonOptions {
  double tol = 1e-12;
  int max_iter = 50;
  double condition_limit = 1e14;
  bool damped = true;
};

/// Damped Newton with backtracking on the residual max-norm.
NewtonReport newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, std::vector<double> x0,
                          const NewtonOptions& opts = {});

/// Central-difference Jacobian, used to cross-check analytic Jacobians.
Matrix finite_difference_jacobian(const ResidualFn& residual, std::span<const double> x, double h = 1e-6);

double max_norm(std::span<const double> v);

}  // namespace hcl::numerics
