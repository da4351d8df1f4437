#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hcl {

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<Vec4, 4>;

/// Phase-space point (x1, x2, x3, x4) = (U1, U2, U1', U2').
using StateVec = Vec4;

/// Invalid input: non-finite values, broken preconditions, unknown ids.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// An iterative method gave up (Newton, step-size underflow, quadrature budget).
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Parameters that can serve as a Melnikov/continuation parameter.
enum class Param { beta1, beta2, beta3, beta4, nu1 };

std::string_view to_string(Param p);
/// Accepts "beta1".."beta4", "nu1" (also "b1".."b4"). Throws DomainError otherwise.
Param parse_param(std::string_view name);

struct SystemParams {
  double s = 2.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;
  double beta4 = 0.0;
  double nu1 = 0.0;

  double get(Param p) const;
  void set(Param p, double v);

  /// Throws DomainError unless s > 0 and all fields are finite.
  void validate() const;
  /// s = 1 makes the equilibrium eigenvalues collide (-1 = -sqrt(s)).
  bool degenerate_eigenvalues(double tol = 1e-6) const { return std::abs(std::sqrt(s) - 1.0) <= tol; }
  /// The standing assumption of the model is s >= 1.
  bool outside_standard_range() const { return s < 1.0; }

  bool operator==(const SystemParams&) const = default;
};

inline Vec4 operator+(const Vec4& a, const Vec4& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]}; }
inline Vec4 operator-(const Vec4& a, const Vec4& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]}; }
inline Vec4 operator*(double c, const Vec4& a) { return {c * a[0], c * a[1], c * a[2], c * a[3]}; }
inline double dot(const Vec4& a, const Vec4& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]; }
inline double max_norm(const Vec4& a) {
  return std::max(std::max(std::abs(a[0]), std::abs(a[1])), std::max(std::abs(a[2]), std::abs(a[3])));
}
inline Vec4 operator*(const Mat4& m, const Vec4& v) { return {dot(m[0], v), dot(m[1], v), dot(m[2], v), dot(m[3], v)}; }

/// Symplectic matrix J4 = [[0, I], [-I, 0]] applied to v.
inline Vec4 apply_j4(const Vec4& v) { return {v[2], v[3], -v[0], -v[1]}; }

/// Z2 symmetry S = diag(1, -1, 1, -1) of the model at beta3 = beta4 = 0.
inline Vec4 apply_symmetry(const Vec4& v) { return {v[0], -v[1], v[2], -v[3]}; }

}  // namespace hcl
