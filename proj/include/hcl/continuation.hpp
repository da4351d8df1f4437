#pragma once

// Homoclinic orbits as a truncated boundary-value problem on [-T, T]:
// degree-4 Gauss collocation on a mesh graded toward t = 0, projection
// boundary conditions onto the eigenspaces of the origin, an integral phase
// condition, and the damping nu1 as an extra unknown. Pseudo-arclength
// continuation in one parameter with fold and pitchfork detection.

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hcl/melnikov.hpp"
#include "hcl/numerics.hpp"
#include "hcl/types.hpp"

namespace hcl::continuation {

constexpr int kDegree = 4;

struct BvpMesh {
  double T = 15.0;
  int N = 80;
  std::vector<double> t;  // kDegree * N + 1 node times, strictly increasing
  std::vector<Vec4> x;    // state at each node

  std::size_t nodes() const { return t.size(); }
  /// Interval boundaries: every kDegree-th node.
  double interval_start(int i) const { return t[static_cast<std::size_t>(kDegree * i)]; }
};

/// Node layout for T and N (N even, N >= 40): interval boundaries at
/// T (u - 0.75 sin(pi u) / pi), u uniform in [-1, 1], fine near t = 0 and
/// uniform in the tails; Gauss-Lobatto interior nodes in each interval.
BvpMesh make_mesh(double T = 15.0, int N = 80);
BvpMesh mesh_from_homoclinic(double T = 15.0, int N = 80, int sign = +1);

/// Piecewise-polynomial value of the mesh at any t in [-T, T].
Vec4 mesh_eval(const BvpMesh& mesh, double t);

/// Collocation residuals (16 N), projection conditions (4) and the phase
/// condition int <xdot_ref, x - x_ref> dt (1), in that order.
std::vector<double> bvp_residual(const BvpMesh& mesh, const SystemParams& p, const BvpMesh& reference);

/// Dense Jacobian of bvp_residual with respect to the node values, then nu1,
/// then (if given) the control parameter. Intended for tests on small meshes.
numerics::Matrix bvp_jacobian_dense(const BvpMesh& mesh, const SystemParams& p, const BvpMesh& reference,
                                    std::optional<Param> control = std::nullopt);

struct Measures {
  double x2_at_0 = 0.0;
  double max_x2 = 0.0;
  double min_x2 = 0.0;
  double norm = 0.0;          // sqrt(int |x|^2 dt)
  double max_abs_h = 0.0;     // max |H| over nodes
  double symmetry = 0.0;      // max |(x2, x4)| over nodes
};

Measures compute_measures(const BvpMesh& mesh, const SystemParams& p);

struct BranchPoint {
  SystemParams params;               // includes the converged nu1 and control value
  std::optional<Param> control;
  BvpMesh mesh;
  Measures measures;
  double residual = 0.0;             // max-norm BVP residual at acceptance
  int newton_iterations = 0;
  double fold_test = 0.0;            // control component of the unit tangent
  double pitchfork_test = std::numeric_limits<double>::quiet_NaN();  // sign of the antisymmetric-block determinant
  std::vector<double> tangent;       // in unknown space (nodes, nu1, control)

  double lambda() const { return control ? params.get(*control) : std::numeric_limits<double>::quiet_NaN(); }
};

enum class FreeSet { none, nu1 };

/// Newton (free = nu1, square system) or Gauss-Newton (free = none, nu1 fixed,
/// overdetermined) from the initial mesh. The phase condition refers to the
/// initial mesh. Throws ConvergenceError on divergence, DomainError when the
/// origin is not a hyperbolic saddle or s is within 1e-6 of 1.
BranchPoint solve_homoclinic(const BvpMesh& initial, const SystemParams& p, FreeSet free = FreeSet::nu1,
                             double tol = 1e-10);

enum class SpecialKind { fold, pitchfork };
std::string_view to_string(SpecialKind k);

struct SpecialPoint {
  SpecialKind kind = SpecialKind::fold;
  std::size_t after_index = 0;   // located between points after_index and after_index + 1
  double lambda = 0.0;
  BranchPoint point;
  std::vector<double> null_vector;  // pitchfork: antisymmetric kernel, node-major (x2, x4)
};

struct Branch {
  Param control = Param::beta3;
  bool symmetric = false;        // computed in the invariant subspace x2 = x4 = 0
  std::vector<BranchPoint> points;
  std::vector<SpecialPoint> special;
};

struct ContinuationConfig {
  double initial_step = 0.02;
  double min_step = 1e-6;
  double max_step = 0.2;
  int max_points = 200;
  double lambda_min = -std::numeric_limits<double>::infinity();
  double lambda_max = std::numeric_limits<double>::infinity();
  double newton_tol = 1e-10;
  int max_newton = 12;
  int direction = +1;            // orientation of the initial tangent
  bool symmetric = false;        // stay on x2 = x4 = 0 (requires beta3 = beta4 = 0)
  bool track_pitchfork = false;  // evaluate the antisymmetric test function at each point
};

/// Pseudo-arclength continuation with nu1 free. Steps halve on Newton failure
/// and grow after fast convergence. Stops at the parameter bounds, the point
/// budget or step underflow; throws ConvergenceError if no step succeeds.
Branch continue_branch(const BranchPoint& start, Param control, const ContinuationConfig& cfg = {});

/// Continues in both directions from start and joins the legs into one branch.
Branch continue_both_ways(const BranchPoint& start, Param control, const ContinuationConfig& cfg = {});

/// Folds from sign changes of the control component of the tangent, pitchforks
/// from sign changes of the antisymmetric-block determinant (symmetric branches),
/// each refined by secant iteration. Replaces branch.special.
void detect_special_points(Branch& branch, const ContinuationConfig& cfg = {});

/// Converged point on the symmetry-broken branch emanating from a pitchfork,
/// reached by a pseudo-arclength step of length `step` along the antisymmetric
/// null direction. Throws ConvergenceError if Newton fails or the result is symmetric.
BranchPoint switch_branch(const Branch& branch, const SpecialPoint& at, double step = 0.02);

/// Residual of the S-conjugate (x2, x4 -> -x2, -x4) of a branch point.
double conjugate_residual(const BranchPoint& pt);

struct PitchforkDirection {
  double coefficient = 0.0;      // d(lambda) / d(amplitude^2) at zero amplitude
  melnikov::Classification criticality = melnikov::Classification::degenerate;
};

/// Side of the bifurcating branch from two switched points at steps h and h/2,
/// extrapolating lambda - lambda* = c a^2 + d a^4 (a = max |x2|).
/// c > 0: supercritical (branch on the lambda > lambda* side).
PitchforkDirection pitchfork_direction(const Branch& branch, const SpecialPoint& at, double step = 0.04);

void write_branch_csv(std::ostream& os, const Branch& branch);
std::string branch_to_json(const Branch& branch, bool include_mesh = false);

}  // namespace hcl::continuation
