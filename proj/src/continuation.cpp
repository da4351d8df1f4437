#include "hcl/continuation.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "hcl/model.hpp"
#include "json.hpp"

namespace hcl::continuation {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using VecX = Eigen::VectorXd;
using SparseSolver = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

// ------------------------------------------------------ collocation data

constexpr int kStages = kDegree;  // Gauss points per interval

struct Collocation {
  std::array<double, kStages> theta{};
  std::array<double, kStages> weight{};  // sums to 1 on [0, 1]
  double L[kStages][kDegree + 1]{};
  double dL[kStages][kDegree + 1]{};
};

// Gauss-Lobatto node fractions within an interval.
double node_frac(int j) {
  static const double r = 0.5 * std::sqrt(3.0 / 7.0);
  static const double f[kDegree + 1] = {0.0, 0.5 - r, 0.5, 0.5 + r, 1.0};
  return f[j];
}

void lagrange(double th, double* l, double* dl) {
  for (int j = 0; j <= kDegree; ++j) {
    const double tj = node_frac(j);
    double prod = 1.0, deriv = 0.0;
    for (int m = 0; m <= kDegree; ++m) {
      if (m == j) continue;
      const double tm = node_frac(m);
      double term = 1.0 / (tj - tm);
      for (int k = 0; k <= kDegree; ++k) {
        if (k == j || k == m) continue;
        const double tk = node_frac(k);
        term *= (th - tk) / (tj - tk);
      }
      deriv += term;
      prod *= (th - tm) / (tj - tm);
    }
    l[j] = prod;
    if (dl) dl[j] = deriv;
  }
}

const Collocation& collocation() {
  static const Collocation c = [] {
    Collocation out;
    const numerics::GaussRule g = numerics::gauss_legendre(kStages);
    for (int q = 0; q < kStages; ++q) {
      out.theta[q] = 0.5 * (1.0 + g.nodes[q]);
      out.weight[q] = 0.5 * g.weights[q];
      lagrange(out.theta[q], out.L[q], out.dL[q]);
    }
    return out;
  }();
  return c;
}

// --------------------------------------------------------- projections

// Left eigenvectors of the origin: at -T the stable ones (x(-T) must lie in
// the unstable subspace), at T the unstable ones. Mode a continues the x1
// mode, mode b the x2 mode; both are smooth in the parameters.
struct Projection {
  std::array<Vec4, 2> left;
  std::array<Vec4, 2> right;
};

Projection projection_rows(const SystemParams& p) {
  if (p.degenerate_eigenvalues())
    throw DomainError("continuation requires |sqrt(s) - 1| > 1e-6 (eigenvalues collide at s = 1)");
  const double s = p.s, b3 = p.beta3, nu = p.nu1;
  const double mean = 0.5 * (1.0 + s), dev = std::hypot(0.5 * (1.0 - s), b3);
  const double ka = s > 1.0 ? mean - dev : mean + dev;
  const double kb = 1.0 + s - ka;
  const double nrm = std::hypot(s - ka, b3);
  const std::array<double, 2> va{(s - ka) / nrm, b3 / nrm};
  const std::array<double, 2> vb{-va[1], va[0]};
  Projection out;
  int m = 0;
  for (const auto& [kappa, v] : {std::pair{ka, va}, std::pair{kb, vb}}) {
    if (!(kappa > 0.0)) {
      std::ostringstream msg;
      msg << "origin is not a hyperbolic saddle: eigenvalue " << 0.5 * (-nu + std::sqrt(std::max(0.0, nu * nu + 4.0 * kappa)));
      throw DomainError(msg.str());
    }
    const double root = std::sqrt(nu * nu + 4.0 * kappa);
    for (int side = 0; side < 2; ++side) {
      const double lam = side == 0 ? 0.5 * (-nu - root) : 0.5 * (-nu + root);
      Vec4 l{(lam + nu) * v[0], (lam + nu) * v[1], v[0], v[1]};
      l = (1.0 / std::sqrt(dot(l, l))) * l;
      (side == 0 ? out.left : out.right)[m] = l;
    }
    ++m;
  }
  return out;
}

// ---------------------------------------------------------------- problem

enum class Mask { full, symmetric, antisymmetric };

bool comp_kept(Mask m, int c) {
  switch (m) {
    case Mask::full: return true;
    case Mask::symmetric: return c == 0 || c == 2;
    case Mask::antisymmetric: return c == 1 || c == 3;
  }
  return true;
}

struct Reference {
  std::vector<Vec4> x, dx;  // at collocation points, (interval, stage)-major
};

class Problem {
public:
  Problem(const BvpMesh& layout, SystemParams base, std::optional<Param> control, Mask mask, bool nu_free)
      : layout_(layout), base_(base), control_(control), mask_(mask), nu_free_(nu_free) {
    N_ = layout.N;
    nodes_ = layout.nodes();
    nx_ = 4 * nodes_;
    full_unknowns_ = nx_ + 2;
    full_rows_ = static_cast<std::size_t>(16 * N_) + 5;
    col_map_.assign(full_unknowns_, -1);
    int k = 0;
    for (std::size_t i = 0; i < nx_; ++i)
      if (comp_kept(mask_, static_cast<int>(i % 4))) col_map_[i] = k++;
    if (nu_free_ && mask_ != Mask::antisymmetric) col_map_[nx_] = k++;
    if (control_ && mask_ != Mask::antisymmetric) col_map_[nx_ + 1] = k++;
    n_unknowns_ = static_cast<std::size_t>(k);
    row_map_.assign(full_rows_, -1);
    k = 0;
    for (std::size_t r = 0; r < static_cast<std::size_t>(16 * N_); ++r)
      if (comp_kept(mask_, static_cast<int>(r % 4))) row_map_[r] = k++;
    const std::size_t bc = static_cast<std::size_t>(16 * N_);
    for (int m = 0; m < 4; ++m) {
      const bool mode_a = m % 2 == 0;  // rows: left_a, left_b, right_a, right_b
      if (mask_ == Mask::full || (mask_ == Mask::symmetric && mode_a) || (mask_ == Mask::antisymmetric && !mode_a))
        row_map_[bc + m] = k++;
    }
    if (mask_ != Mask::antisymmetric) row_map_[bc + 4] = k++;
    n_rows_ = static_cast<std::size_t>(k);
    set_reference(layout);
  }

  std::size_t unknowns() const { return n_unknowns_; }
  std::size_t rows() const { return n_rows_; }
  int nu_index() const { return col_map_[nx_]; }
  int lambda_index() const { return col_map_[nx_ + 1]; }
  const BvpMesh& layout() const { return layout_; }

  void set_reference(const BvpMesh& ref) {
    const Collocation& cc = collocation();
    ref_.x.assign(static_cast<std::size_t>(N_ * kStages), Vec4{});
    ref_.dx.assign(static_cast<std::size_t>(N_ * kStages), Vec4{});
    const bool same = ref.t.size() == layout_.t.size() && ref.t == layout_.t;
    for (int i = 0; i < N_; ++i) {
      const double a = layout_.interval_start(i), h = layout_.interval_start(i + 1) - a;
      for (int q = 0; q < kStages; ++q) {
        Vec4 x{}, dx{};
        if (same) {
          for (int j = 0; j <= kDegree; ++j) {
            const Vec4& xn = ref.x[static_cast<std::size_t>(kDegree * i + j)];
            x = x + cc.L[q][j] * xn;
            dx = dx + (cc.dL[q][j] / h) * xn;
          }
        } else {
          const double t = a + h * cc.theta[q];
          x = mesh_eval(ref, t);
          const double e = 1e-5;
          dx = (1.0 / (2.0 * e)) * (mesh_eval(ref, std::min(t + e, ref.T)) - mesh_eval(ref, std::max(t - e, -ref.T)));
        }
        ref_.x[static_cast<std::size_t>(i * kStages + q)] = x;
        ref_.dx[static_cast<std::size_t>(i * kStages + q)] = dx;
      }
    }
  }

  SystemParams params_of(const VecX& y) const {
    SystemParams p = base_;
    if (nu_index() >= 0) p.nu1 = y[nu_index()];
    if (control_ && lambda_index() >= 0) p.set(*control_, y[lambda_index()]);
    return p;
  }

  VecX pack(const BvpMesh& mesh, const SystemParams& p) const {
    if (mesh.t.size() != nodes_) throw DomainError("mesh layout mismatch");
    VecX y(static_cast<Eigen::Index>(n_unknowns_));
    for (std::size_t k = 0; k < nodes_; ++k)
      for (int c = 0; c < 4; ++c)
        if (col_map_[4 * k + c] >= 0) y[col_map_[4 * k + c]] = mesh.x[k][c];
    if (nu_index() >= 0) y[nu_index()] = p.nu1;
    if (control_ && lambda_index() >= 0) y[lambda_index()] = p.get(*control_);
    return y;
  }

  void unpack(const VecX& y, BvpMesh& mesh, SystemParams& p) const {
    mesh = layout_;
    for (std::size_t k = 0; k < nodes_; ++k)
      for (int c = 0; c < 4; ++c) mesh.x[k][c] = col_map_[4 * k + c] >= 0 ? y[col_map_[4 * k + c]] : 0.0;
    p = params_of(y);
  }

  /// Full-space vector (nodes, nu1, lambda) from a reduced one and back.
  std::vector<double> expand(const VecX& y) const {
    std::vector<double> out(full_unknowns_, 0.0);
    for (std::size_t i = 0; i < full_unknowns_; ++i)
      if (col_map_[i] >= 0) out[i] = y[col_map_[i]];
    return out;
  }
  VecX reduce(const std::vector<double>& full) const {
    VecX y = VecX::Zero(static_cast<Eigen::Index>(n_unknowns_));
    for (std::size_t i = 0; i < full_unknowns_ && i < full.size(); ++i)
      if (col_map_[i] >= 0) y[col_map_[i]] = full[i];
    return y;
  }

  /// Weights of the arclength inner product.
  VecX weights() const {
    VecX w = VecX::Constant(static_cast<Eigen::Index>(n_unknowns_), 1.0 / static_cast<double>(nodes_));
    if (nu_index() >= 0) w[nu_index()] = 1.0;
    if (lambda_index() >= 0) w[lambda_index()] = 1.0;
    return w;
  }

  /// Residual (and optionally Jacobian) for the reduced unknowns. The
  /// parameter-free antisymmetric block is evaluated at the symmetric state
  /// `anchor` (nodes from it, comps 1, 3 from y).
  void eval(const VecX& y, VecX& r, SpMat* jac, const BvpMesh* anchor = nullptr) const {
    const Collocation& cc = collocation();
    const SystemParams p = params_of(y);
    BvpMesh mesh;
    SystemParams dummy;
    unpack(y, mesh, dummy);
    if (anchor)
      for (std::size_t k = 0; k < nodes_; ++k)
        for (int c : {0, 2}) mesh.x[k][c] = anchor->x[k][c];

    r = VecX::Zero(static_cast<Eigen::Index>(n_rows_));
    std::vector<Triplet> trip;
    if (jac) trip.reserve(static_cast<std::size_t>(N_) * 16 * 24);
    auto put_r = [&](std::size_t row, double v) {
      if (row_map_[row] >= 0) r[row_map_[row]] += v;
    };
    auto put_j = [&](std::size_t row, std::size_t col, double v) {
      if (jac && row_map_[row] >= 0 && col_map_[col] >= 0 && v != 0.0) trip.emplace_back(row_map_[row], col_map_[col], v);
    };

    for (int i = 0; i < N_; ++i) {
      const double h = layout_.interval_start(i + 1) - layout_.interval_start(i);
      const std::size_t base_node = static_cast<std::size_t>(kDegree * i);
      for (int q = 0; q < kStages; ++q) {
        Vec4 x{}, dx{};
        for (int j = 0; j <= kDegree; ++j) {
          const Vec4& xn = mesh.x[base_node + j];
          x = x + cc.L[q][j] * xn;
          dx = dx + (cc.dL[q][j] / h) * xn;
        }
        const Vec4 f = model::eval_f(x, p);
        const std::size_t row0 = static_cast<std::size_t>((i * kStages + q) * 4);
        for (int c = 0; c < 4; ++c) put_r(row0 + c, dx[c] - f[c]);
        // phase condition
        const Vec4& xr = ref_.x[static_cast<std::size_t>(i * kStages + q)];
        const Vec4& dxr = ref_.dx[static_cast<std::size_t>(i * kStages + q)];
        const double wq = h * cc.weight[q];
        put_r(full_rows_ - 1, wq * dot(dxr, x - xr));
        if (!jac) continue;
        const Mat4 J = model::eval_jacobian(x, p);
        for (int j = 0; j <= kDegree; ++j) {
          const std::size_t col0 = 4 * (base_node + j);
          for (int c = 0; c < 4; ++c) {
            put_j(row0 + c, col0 + c, cc.dL[q][j] / h);
            for (int c2 = 0; c2 < 4; ++c2) put_j(row0 + c, col0 + c2, -J[c][c2] * cc.L[q][j]);
            put_j(full_rows_ - 1, col0 + c, wq * dxr[c] * cc.L[q][j]);
          }
        }
        const Vec4 dnu = model::eval_dmu_f(x, p, Param::nu1);
        for (int c = 0; c < 4; ++c) put_j(row0 + c, nx_, -dnu[c]);
        if (control_) {
          const Vec4 dl = model::eval_dmu_f(x, p, *control_);
          for (int c = 0; c < 4; ++c) put_j(row0 + c, nx_ + 1, -dl[c]);
        }
      }
    }

    // Projection boundary conditions.
    const Projection pr = projection_rows(p);
    const std::size_t bc = static_cast<std::size_t>(16 * N_);
    const Vec4& xl = mesh.x.front();
    const Vec4& xrt = mesh.x.back();
    const std::array<const Vec4*, 4> rows{&pr.left[0], &pr.left[1], &pr.right[0], &pr.right[1]};
    for (int m = 0; m < 4; ++m) put_r(bc + m, dot(*rows[m], m < 2 ? xl : xrt));
    if (jac) {
      for (int m = 0; m < 4; ++m) {
        const std::size_t node = m < 2 ? 0 : nodes_ - 1;
        for (int c = 0; c < 4; ++c) put_j(bc + m, 4 * node + c, (*rows[m])[c]);
      }
      // Parameter dependence of the rows by central differences.
      auto fd_rows = [&](auto setter, double value, std::size_t col) {
        const double e = 1e-7 * std::max(1.0, std::abs(value));
        SystemParams pp = p, pm = p;
        setter(pp, value + e);
        setter(pm, value - e);
        const Projection a = projection_rows(pp), b = projection_rows(pm);
        const std::array<Vec4, 4> ra{a.left[0], a.left[1], a.right[0], a.right[1]};
        const std::array<Vec4, 4> rb{b.left[0], b.left[1], b.right[0], b.right[1]};
        for (int m = 0; m < 4; ++m)
          put_j(bc + m, col, dot((1.0 / (2.0 * e)) * (ra[m] - rb[m]), m < 2 ? xl : xrt));
      };
      if (col_map_[nx_] >= 0) fd_rows([](SystemParams& q, double v) { q.nu1 = v; }, p.nu1, nx_);
      if (control_ && col_map_[nx_ + 1] >= 0) {
        const Param c = *control_;
        fd_rows([c](SystemParams& q, double v) { q.set(c, v); }, p.get(c), nx_ + 1);
      }
      jac->resize(static_cast<Eigen::Index>(n_rows_), static_cast<Eigen::Index>(n_unknowns_));
      jac->setFromTriplets(trip.begin(), trip.end());
    }
  }

private:
  BvpMesh layout_;
  SystemParams base_;
  std::optional<Param> control_;
  Mask mask_;
  bool nu_free_;
  int N_ = 0;
  std::size_t nodes_ = 0, nx_ = 0, full_unknowns_ = 0, full_rows_ = 0;
  std::vector<int> col_map_, row_map_;
  std::size_t n_unknowns_ = 0, n_rows_ = 0;
  Reference ref_;
};

void validate_params(const SystemParams& p) {
  p.validate();
  if (p.degenerate_eigenvalues())
    throw DomainError("continuation requires |sqrt(s) - 1| > 1e-6 (eigenvalues collide at s = 1)");
  (void)model::equilibrium_spectrum(p);  // names the offending eigenvalue if non-hyperbolic
}

void check_layout(const BvpMesh& m) {
  if (m.N < 40 || m.N % 2 != 0) throw DomainError("mesh needs an even N >= 40");
  if (m.t.size() != static_cast<std::size_t>(kDegree * m.N + 1) || m.x.size() != m.t.size())
    throw DomainError("mesh node arrays do not match N");
  for (std::size_t i = 1; i < m.t.size(); ++i)
    if (!(m.t[i] > m.t[i - 1])) throw DomainError("mesh nodes must be strictly increasing");
}

SpMat augment(const SpMat& j, const VecX& row) {
  SpMat a(j.rows() + 1, j.cols());
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(j.nonZeros() + row.size()));
  for (int k = 0; k < j.outerSize(); ++k)
    for (SpMat::InnerIterator it(j, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index c = 0; c < row.size(); ++c)
    if (row[c] != 0.0) trip.emplace_back(j.rows(), c, row[c]);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

struct CorrectorResult {
  bool ok = false;
  int iterations = 0;
  double residual = 0.0;
};

// Newton on [F(y); <w, y> - c] = 0 (square). No damping: failures shrink the step instead.
CorrectorResult corrector(const Problem& pb, VecX& y, const VecX& wrow, double c, double tol, int max_iter) {
  CorrectorResult out;
  VecX r;
  SpMat j;
  for (int it = 0; it <= max_iter; ++it) {
    pb.eval(y, r, &j);
    VecX full(r.size() + 1);
    full << r, wrow.dot(y) - c;
    out.residual = full.lpNorm<Eigen::Infinity>();
    out.iterations = it;
    if (!std::isfinite(out.residual)) return out;
    if (out.residual < tol) {
      out.ok = true;
      out.residual = r.lpNorm<Eigen::Infinity>();
      return out;
    }
    if (it == max_iter) break;
    SparseSolver lu;
    lu.compute(augment(j, wrow));
    if (lu.info() != Eigen::Success) return out;
    const VecX dy = lu.solve(full);
    if (!dy.allFinite()) return out;
    y -= dy;
  }
  return out;
}

// Unit (weighted) tangent: kernel of J fixed by <row, t> = 1.
VecX tangent_at(const Problem& pb, const VecX& y, const VecX& row) {
  VecX r;
  SpMat j;
  pb.eval(y, r, &j);
  SparseSolver lu;
  lu.compute(augment(j, row));
  if (lu.info() != Eigen::Success) throw ConvergenceError("tangent computation failed: singular bordered Jacobian");
  VecX rhs = VecX::Zero(j.rows() + 1);
  rhs[j.rows()] = 1.0;
  VecX t = lu.solve(rhs);
  const VecX w = pb.weights();
  t /= std::sqrt(t.dot(w.cwiseProduct(t)));
  return t;
}

VecX random_row(std::size_t n) {
  std::mt19937 rng(20240611u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VecX v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
  return v;
}

double bvp_max_residual(const Problem& pb, const VecX& y) {
  VecX r;
  pb.eval(y, r, nullptr);
  return r.lpNorm<Eigen::Infinity>();
}

Mask mask_for(bool symmetric) { return symmetric ? Mask::symmetric : Mask::full; }

BranchPoint make_point(const Problem& pb, const VecX& y, std::optional<Param> control, int iters) {
  BranchPoint pt;
  pb.unpack(y, pt.mesh, pt.params);
  pt.control = control;
  pt.measures = compute_measures(pt.mesh, pt.params);
  pt.residual = bvp_max_residual(pb, y);
  pt.newton_iterations = iters;
  return pt;
}

struct AntisymTest {
  double sign = 0.0;
  double log_abs = 0.0;
};

AntisymTest antisym_test(const BranchPoint& pt) {
  Problem pb(pt.mesh, pt.params, std::nullopt, Mask::antisymmetric, false);
  pb.set_reference(pt.mesh);
  VecX y = VecX::Zero(static_cast<Eigen::Index>(pb.unknowns())), r;
  SpMat j;
  pb.eval(y, r, &j, &pt.mesh);
  SparseSolver lu;
  lu.compute(j);
  if (lu.info() != Eigen::Success) return {0.0, -std::numeric_limits<double>::infinity()};
  return {lu.signDeterminant(), lu.logAbsDeterminant()};
}

std::vector<double> antisym_null_vector(const BranchPoint& pt) {
  Problem pb(pt.mesh, pt.params, std::nullopt, Mask::antisymmetric, false);
  VecX y = VecX::Zero(static_cast<Eigen::Index>(pb.unknowns())), r;
  SpMat j;
  pb.eval(y, r, &j, &pt.mesh);
  SparseSolver lu;
  lu.compute(j);
  if (lu.info() != Eigen::Success) throw ConvergenceError("antisymmetric block factorization failed");
  VecX v = VecX::Constant(j.cols(), 1.0);
  for (int it = 0; it < 4; ++it) {
    v = lu.solve(v);
    v /= v.norm();
  }
  // Orient: positive x2 at t = 0.
  const std::size_t center = pt.mesh.nodes() / 2;
  if (v[static_cast<Eigen::Index>(2 * center)] < 0.0) v = -v;
  return {v.data(), v.data() + v.size()};
}

void orient(VecX& t, const Problem& pb, int direction) {
  const int li = pb.lambda_index();
  const std::size_t center = pb.layout().nodes() / 2;
  double key = 0.0;
  if (li >= 0 && std::abs(t[li]) > 1e-3) {
    key = t[li];
  } else {
    std::vector<double> full = pb.expand(t);
    key = full[4 * center + 1];
    if (std::abs(key) < 1e-12) key = li >= 0 ? t[li] : full[4 * center];
  }
  if (key * direction < 0.0) t = -t;
}

}  // namespace

// -------------------------------------------------------------- meshes

BvpMesh make_mesh(double T, int N) {
  if (!(T > 0.0)) throw DomainError("mesh half-length T must be positive");
  if (N < 40 || N % 2 != 0) throw DomainError("mesh needs an even N >= 40");
  BvpMesh m;
  m.T = T;
  m.N = N;
  m.t.resize(static_cast<std::size_t>(kDegree * N + 1));
  auto boundary = [T, N](int i) {
    if (2 * i == N) return 0.0;
    const double u = -1.0 + 2.0 * i / static_cast<double>(N);
    return T * (u - 0.75 * std::sin(std::numbers::pi * u) / std::numbers::pi);
  };
  for (int i = 0; i < N; ++i) {
    const double a = boundary(i), b = boundary(i + 1);
    for (int j = 0; j < kDegree; ++j) m.t[static_cast<std::size_t>(kDegree * i + j)] = a + (b - a) * node_frac(j);
  }
  m.t.back() = T;
  m.x.assign(m.t.size(), Vec4{});
  return m;
}

BvpMesh mesh_from_homoclinic(double T, int N, int sign) {
  BvpMesh m = make_mesh(T, N);
  for (std::size_t k = 0; k < m.t.size(); ++k) m.x[k] = model::homoclinic(m.t[k], sign);
  return m;
}

Vec4 mesh_eval(const BvpMesh& mesh, double t) {
  if (t < -mesh.T - 1e-12 || t > mesh.T + 1e-12) throw DomainError("mesh_eval outside [-T, T]");
  int lo = 0, hi = mesh.N;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (mesh.interval_start(mid) <= t) lo = mid;
    else hi = mid;
  }
  const double a = mesh.interval_start(lo), b = mesh.interval_start(lo + 1);
  double l[kDegree + 1];
  lagrange((t - a) / (b - a), l, nullptr);
  Vec4 out{};
  for (int j = 0; j <= kDegree; ++j) out = out + l[j] * mesh.x[static_cast<std::size_t>(kDegree * lo + j)];
  return out;
}

std::vector<double> bvp_residual(const BvpMesh& mesh, const SystemParams& p, const BvpMesh& reference) {
  check_layout(mesh);
  Problem pb(mesh, p, std::nullopt, Mask::full, true);
  pb.set_reference(reference);
  VecX r;
  pb.eval(pb.pack(mesh, p), r, nullptr);
  return {r.data(), r.data() + r.size()};
}

numerics::Matrix bvp_jacobian_dense(const BvpMesh& mesh, const SystemParams& p, const BvpMesh& reference,
                                    std::optional<Param> control) {
  check_layout(mesh);
  Problem pb(mesh, p, control, Mask::full, true);
  pb.set_reference(reference);
  VecX r;
  SpMat j;
  pb.eval(pb.pack(mesh, p), r, &j);
  numerics::Matrix out(static_cast<std::size_t>(j.rows()), static_cast<std::size_t>(j.cols()));
  for (int k = 0; k < j.outerSize(); ++k)
    for (SpMat::InnerIterator it(j, k); it; ++it)
      out(static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col())) += it.value();
  return out;
}

Measures compute_measures(const BvpMesh& mesh, const SystemParams& p) {
  Measures m;
  m.x2_at_0 = mesh.x[mesh.nodes() / 2][1];
  m.max_x2 = -std::numeric_limits<double>::infinity();
  m.min_x2 = std::numeric_limits<double>::infinity();
  for (const Vec4& x : mesh.x) {
    m.max_x2 = std::max(m.max_x2, x[1]);
    m.min_x2 = std::min(m.min_x2, x[1]);
    m.max_abs_h = std::max(m.max_abs_h, std::abs(model::hamiltonian(x, p)));
    m.symmetry = std::max(m.symmetry, std::max(std::abs(x[1]), std::abs(x[3])));
  }
  const Collocation& cc = collocation();
  double acc = 0.0;
  for (int i = 0; i < mesh.N; ++i) {
    const double h = mesh.interval_start(i + 1) - mesh.interval_start(i);
    for (int q = 0; q < kStages; ++q) {
      Vec4 x{};
      for (int j = 0; j <= kDegree; ++j) x = x + cc.L[q][j] * mesh.x[static_cast<std::size_t>(kDegree * i + j)];
      acc += h * cc.weight[q] * dot(x, x);
    }
  }
  m.norm = std::sqrt(acc);
  return m;
}

// ------------------------------------------------------------- solving

BranchPoint solve_homoclinic(const BvpMesh& initial, const SystemParams& p, FreeSet free, double tol) {
  check_layout(initial);
  validate_params(p);
  const bool nu_free = free == FreeSet::nu1;
  Problem pb(initial, p, std::nullopt, Mask::full, nu_free);
  pb.set_reference(initial);
  VecX y = pb.pack(initial, p), r, trial_r;
  SpMat j;
  int it = 0;
  double res = 0.0;
  if (nu_free) {
    for (; it < 40; ++it) {
      pb.eval(y, r, &j);
      res = r.lpNorm<Eigen::Infinity>();
      if (res < tol) break;
      SparseSolver lu;
      lu.compute(j);
      if (lu.info() != Eigen::Success) throw ConvergenceError("Newton diverged: singular BVP Jacobian");
      const VecX dy = lu.solve(r);
      double step = 1.0;
      for (int back = 0; back < 20; ++back) {
        const VecX trial = y - step * dy;
        pb.eval(trial, trial_r, nullptr);
        const double tn = trial_r.lpNorm<Eigen::Infinity>();
        if (std::isfinite(tn) && (tn < res || tn < tol)) {
          y = trial;
          break;
        }
        step *= 0.5;
        if (back == 19) throw ConvergenceError("Newton diverged: no descent along the Newton direction");
      }
    }
  } else {
    // Overdetermined (nu1 fixed): Gauss-Newton on the normal equations.
    for (; it < 40; ++it) {
      pb.eval(y, r, &j);
      res = r.lpNorm<Eigen::Infinity>();
      const SpMat jt = j.transpose();
      const SpMat normal = jt * j;
      Eigen::SimplicialLDLT<SpMat> ldlt;
      ldlt.compute(normal);
      if (ldlt.info() != Eigen::Success) throw ConvergenceError("Gauss-Newton failed: rank-deficient BVP Jacobian");
      const VecX dy = ldlt.solve(jt * r);
      y -= dy;
      if (dy.lpNorm<Eigen::Infinity>() < 1e-13 || res < tol) break;
    }
    pb.eval(y, r, nullptr);
    res = r.lpNorm<Eigen::Infinity>();
  }
  if (!(res < std::max(tol, 1e-8))) {
    std::ostringstream msg;
    msg << "Newton diverged: residual " << res << " after " << it << " iterations";
    throw ConvergenceError(msg.str());
  }
  BranchPoint pt = make_point(pb, y, std::nullopt, it);
  return pt;
}

// --------------------------------------------------------- continuation

namespace {

struct Stepper {
  Problem pb;
  Param control;
  const ContinuationConfig& cfg;

  Stepper(const BranchPoint& start, Param c, const ContinuationConfig& config)
      : pb(start.mesh, start.params, c, mask_for(config.symmetric), true), control(c), cfg(config) {}

  // Corrects from `from` along tangent t by arclength sigma. Returns nullopt on failure.
  std::optional<std::pair<VecX, CorrectorResult>> step(const BranchPoint& from, const VecX& t, double sigma) {
    pb.set_reference(from.mesh);
    const VecX y0 = pb.pack(from.mesh, from.params);
    const VecX w = pb.weights().cwiseProduct(t);
    VecX y = y0 + sigma * t;
    const CorrectorResult cr = corrector(pb, y, w, w.dot(y), cfg.newton_tol, cfg.max_newton);
    if (!cr.ok) return std::nullopt;
    return std::make_pair(y, cr);
  }

  BranchPoint finish(const VecX& y, const VecX& prev_t, int iters) {
    const VecX w = pb.weights().cwiseProduct(prev_t);
    VecX t = tangent_at(pb, y, w);
    if (t.dot(w) < 0.0) t = -t;
    BranchPoint pt = make_point(pb, y, control, iters);
    pt.tangent = pb.expand(t);
    pt.fold_test = t[pb.lambda_index()];
    if (cfg.track_pitchfork) pt.pitchfork_test = antisym_test(pt).sign;
    return pt;
  }
};

void check_symmetric_allowed(const SystemParams& p) {
  if (p.beta3 != 0.0 || p.beta4 != 0.0)
    throw DomainError("symmetric continuation requires beta3 = beta4 = 0");
}

}  // namespace

Branch continue_branch(const BranchPoint& start, Param control, const ContinuationConfig& cfg) {
  check_layout(start.mesh);
  validate_params(start.params);
  if (cfg.symmetric) check_symmetric_allowed(start.params);
  if (!(cfg.initial_step > 0.0) || !(cfg.min_step > 0.0) || cfg.max_step < cfg.min_step)
    throw DomainError("bad continuation step configuration");
  Stepper st(start, control, cfg);
  Problem& pb = st.pb;

  Branch br;
  br.control = control;
  br.symmetric = cfg.symmetric;
  BranchPoint first = start;
  first.control = control;
  const VecX y0 = pb.pack(first.mesh, first.params);
  VecX t;
  if (!start.tangent.empty() && start.control == control) {
    t = pb.reduce(start.tangent);
    t /= std::sqrt(t.dot(pb.weights().cwiseProduct(t)));
    if (cfg.direction < 0) t = -t;
  } else {
    t = tangent_at(pb, y0, random_row(pb.unknowns()));
    orient(t, pb, cfg.direction);
  }
  first.tangent = pb.expand(t);
  first.fold_test = t[pb.lambda_index()];
  first.residual = bvp_max_residual(pb, y0);
  if (cfg.track_pitchfork) first.pitchfork_test = antisym_test(first).sign;
  br.points.push_back(first);

  double sigma = cfg.initial_step;
  while (static_cast<int>(br.points.size()) < cfg.max_points) {
    const BranchPoint& prev = br.points.back();
    const VecX tp = pb.reduce(prev.tangent);
    auto res = st.step(prev, tp, sigma);
    bool accepted = false;
    if (res) {
      BranchPoint pt = st.finish(res->first, tp, res->second.iterations);
      const VecX tn = pb.reduce(pt.tangent);
      const double cosang = tn.dot(pb.weights().cwiseProduct(tp));
      if (cosang > 0.5) {
        accepted = true;
        const double lam = pt.lambda();
        br.points.push_back(std::move(pt));
        if (lam < cfg.lambda_min || lam > cfg.lambda_max) break;
        if (res->second.iterations <= 3) sigma = std::min(1.5 * sigma, cfg.max_step);
      }
    }
    if (!accepted) {
      sigma *= 0.5;
      if (sigma < cfg.min_step) {
        if (br.points.size() == 1) throw ConvergenceError("continuation step underflow before any progress");
        break;
      }
    }
  }
  return br;
}

Branch continue_both_ways(const BranchPoint& start, Param control, const ContinuationConfig& cfg) {
  ContinuationConfig fwd = cfg;
  fwd.direction = cfg.direction >= 0 ? 1 : -1;
  Branch a = continue_branch(start, control, fwd);
  BranchPoint seed = a.points.front();
  ContinuationConfig bwd = fwd;
  bwd.direction = -1;
  Branch b = continue_branch(seed, control, bwd);
  Branch out;
  out.control = control;
  out.symmetric = cfg.symmetric;
  for (std::size_t i = b.points.size(); i-- > 1;) {
    BranchPoint p = b.points[i];
    for (double& v : p.tangent) v = -v;
    p.fold_test = -p.fold_test;
    out.points.push_back(std::move(p));
  }
  for (auto& p : a.points) out.points.push_back(std::move(p));
  detect_special_points(out, cfg);
  return out;
}

// ---------------------------------------------------- special points

namespace {

std::optional<SpecialPoint> refine_fold(const Branch& br, std::size_t i, const ContinuationConfig& cfg) {
  const BranchPoint& a = br.points[i];
  const BranchPoint& b = br.points[i + 1];
  Stepper st(a, br.control, cfg);
  const VecX ta = st.pb.reduce(a.tangent);
  const VecX w = st.pb.weights().cwiseProduct(ta);
  const double total = w.dot(st.pb.pack(b.mesh, b.params) - st.pb.pack(a.mesh, a.params));
  double lo = 0.0, hi = total, flo = a.fold_test, fhi = b.fold_test;
  std::optional<SpecialPoint> best;
  int side = 0;
  for (int it = 0; it < 40; ++it) {
    const double sig = (lo * fhi - hi * flo) / (fhi - flo);
    auto res = st.step(a, ta, sig);
    if (!res) break;
    BranchPoint pt = st.finish(res->first, ta, res->second.iterations);
    const double f = pt.fold_test;
    SpecialPoint sp;
    sp.kind = SpecialKind::fold;
    sp.after_index = i;
    sp.lambda = pt.lambda();
    sp.point = std::move(pt);
    best = std::move(sp);
    if (std::abs(f) < 1e-10 || std::abs(hi - lo) < 1e-12) break;
    // Illinois variant of regula falsi.
    if ((f < 0.0) == (flo < 0.0)) {
      lo = sig;
      flo = f;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = sig;
      fhi = f;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
  }
  return best;
}

std::optional<SpecialPoint> refine_pitchfork(const Branch& br, std::size_t i, const ContinuationConfig& cfg) {
  const BranchPoint& a = br.points[i];
  const BranchPoint& b = br.points[i + 1];
  const Param c = br.control;
  auto point_at = [&](double lam) {
    SystemParams p = a.params;
    p.set(c, lam);
    Problem pb(a.mesh, p, std::nullopt, mask_for(br.symmetric), true);
    pb.set_reference(a.mesh);
    VecX y = pb.pack(a.mesh, p), r;
    SpMat j;
    for (int it = 0; it < 20; ++it) {
      pb.eval(y, r, &j);
      if (r.lpNorm<Eigen::Infinity>() < cfg.newton_tol) break;
      SparseSolver lu;
      lu.compute(j);
      if (lu.info() != Eigen::Success) break;
      y -= lu.solve(r);
    }
    BranchPoint pt = make_point(pb, y, c, 0);
    return pt;
  };
  const double ref_log = antisym_test(a).log_abs;
  auto test = [&](const BranchPoint& pt) {
    const AntisymTest at = antisym_test(pt);
    return at.sign * std::exp(at.log_abs - ref_log);
  };
  double lo = a.lambda(), hi = b.lambda();
  double flo = test(a), fhi = test(b);
  if (!(flo * fhi < 0.0)) return std::nullopt;
  BranchPoint best = a;
  int side = 0;
  for (int it = 0; it < 80; ++it) {
    const double lam = (lo * fhi - hi * flo) / (fhi - flo);
    BranchPoint pt = point_at(lam);
    const double f = test(pt);
    best = pt;
    if (f == 0.0 || std::abs(hi - lo) < 1e-11) break;
    if ((f < 0.0) == (flo < 0.0)) {
      lo = lam;
      flo = f;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = lam;
      fhi = f;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
    if (std::abs(hi - lo) < 1e-11) break;
  }
  SpecialPoint sp;
  sp.kind = SpecialKind::pitchfork;
  sp.after_index = i;
  sp.lambda = best.lambda();
  sp.null_vector = antisym_null_vector(best);
  best.pitchfork_test = 0.0;
  sp.point = std::move(best);
  return sp;
}

}  // namespace

void detect_special_points(Branch& branch, const ContinuationConfig& cfg) {
  branch.special.clear();
  if (branch.points.size() < 3) return;
  ContinuationConfig c = cfg;
  c.symmetric = branch.symmetric;
  c.track_pitchfork = false;
  for (std::size_t i = 0; i + 1 < branch.points.size(); ++i) {
    const double fa = branch.points[i].fold_test, fb = branch.points[i + 1].fold_test;
    if (fa * fb < 0.0)
      if (auto sp = refine_fold(branch, i, c)) branch.special.push_back(std::move(*sp));
  }
  if (branch.symmetric) {
    for (auto& p : branch.points)
      if (std::isnan(p.pitchfork_test)) p.pitchfork_test = antisym_test(p).sign;
    for (std::size_t i = 0; i + 1 < branch.points.size(); ++i)
      if (branch.points[i].pitchfork_test * branch.points[i + 1].pitchfork_test < 0.0)
        if (auto sp = refine_pitchfork(branch, i, c)) branch.special.push_back(std::move(*sp));
  }
  std::sort(branch.special.begin(), branch.special.end(),
            [](const SpecialPoint& a, const SpecialPoint& b) { return a.after_index < b.after_index; });
}

std::string_view to_string(SpecialKind k) { return k == SpecialKind::fold ? "fold" : "pitchfork"; }

BranchPoint switch_branch(const Branch& branch, const SpecialPoint& at, double step) {
  if (at.kind != SpecialKind::pitchfork || at.null_vector.empty())
    throw DomainError("switch_branch needs a pitchfork annotation with a null vector");
  const BranchPoint& base = at.point;
  ContinuationConfig cfg;
  cfg.max_newton = 20;
  Stepper st(base, branch.control, cfg);
  Problem& pb = st.pb;
  // Null direction embedded in (x2, x4); nu1 and the control do not move.
  std::vector<double> full(4 * base.mesh.nodes() + 2, 0.0);
  for (std::size_t k = 0; k < base.mesh.nodes(); ++k) {
    full[4 * k + 1] = at.null_vector[2 * k];
    full[4 * k + 3] = at.null_vector[2 * k + 1];
  }
  VecX t = pb.reduce(full);
  t /= std::sqrt(t.dot(pb.weights().cwiseProduct(t)));
  auto res = st.step(base, t, step);
  if (!res) throw ConvergenceError("branch switching failed: Newton did not converge off the symmetric branch");
  BranchPoint pt = st.finish(res->first, t, res->second.iterations);
  if (pt.measures.symmetry < 1e-6) throw ConvergenceError("branch switching returned to the symmetric branch");
  return pt;
}

double conjugate_residual(const BranchPoint& pt) {
  BvpMesh m = pt.mesh;
  for (Vec4& x : m.x) x = apply_symmetry(x);
  const std::vector<double> r = bvp_residual(m, pt.params, m);
  return numerics::max_norm(r);
}

PitchforkDirection pitchfork_direction(const Branch& branch, const SpecialPoint& at, double step) {
  const BranchPoint p1 = switch_branch(branch, at, step);
  const BranchPoint p2 = switch_branch(branch, at, 0.5 * step);
  auto amp = [](const BranchPoint& p) { return std::max(std::abs(p.measures.max_x2), std::abs(p.measures.min_x2)); };
  const double a1 = amp(p1) * amp(p1), a2 = amp(p2) * amp(p2);
  const double d1 = p1.lambda() - at.lambda, d2 = p2.lambda() - at.lambda;
  // d = c a + e a^2 with a = amplitude^2.
  const double det = a1 * a2 * a2 - a2 * a1 * a1;
  PitchforkDirection out;
  out.coefficient = det != 0.0 ? (d1 * a2 * a2 - d2 * a1 * a1) / det : 0.0;
  if (std::abs(out.coefficient) < 1e-9) out.criticality = melnikov::Classification::degenerate;
  else
    out.criticality = out.coefficient > 0.0 ? melnikov::Classification::pitchfork_supercritical
                                            : melnikov::Classification::pitchfork_subcritical;
  return out;
}

// ------------------------------------------------------------- export

void write_branch_csv(std::ostream& os, const Branch& branch) {
  os << to_string(branch.control) << ",nu1,x2_0,max_x2,min_x2,residual,special\n";
  os << std::setprecision(17);
  auto row = [&](const BranchPoint& p, std::string_view tag) {
    os << p.lambda() << ',' << p.params.nu1 << ',' << p.measures.x2_at_0 << ',' << p.measures.max_x2 << ','
       << p.measures.min_x2 << ',' << p.residual << ',' << tag << '\n';
  };
  std::size_t next = 0;
  for (std::size_t i = 0; i < branch.points.size(); ++i) {
    row(branch.points[i], "");
    while (next < branch.special.size() && branch.special[next].after_index == i) {
      row(branch.special[next].point, to_string(branch.special[next].kind));
      ++next;
    }
  }
}

std::string branch_to_json(const Branch& branch, bool include_mesh) {
  using nlohmann::json;
  auto point_json = [include_mesh](const BranchPoint& p) {
    json j{{"lambda", p.lambda()},
           {"params",
            {{"s", p.params.s},
             {"beta1", p.params.beta1},
             {"beta2", p.params.beta2},
             {"beta3", p.params.beta3},
             {"beta4", p.params.beta4},
             {"nu1", p.params.nu1}}},
           {"x2_0", p.measures.x2_at_0},
           {"max_x2", p.measures.max_x2},
           {"min_x2", p.measures.min_x2},
           {"norm", p.measures.norm},
           {"residual", p.residual},
           {"fold_test", p.fold_test}};
    if (!std::isnan(p.pitchfork_test)) j["pitchfork_test"] = p.pitchfork_test;
    if (include_mesh) {
      j["mesh"] = {{"T", p.mesh.T}, {"N", p.mesh.N}, {"t", p.mesh.t}};
      json xs = json::array();
      for (const Vec4& x : p.mesh.x) xs.push_back({x[0], x[1], x[2], x[3]});
      j["mesh"]["x"] = xs;
    }
    return j;
  };
  json out{{"control", std::string(to_string(branch.control))}, {"symmetric", branch.symmetric}};
  out["points"] = json::array();
  for (const auto& p : branch.points) out["points"].push_back(point_json(p));
  out["special"] = json::array();
  for (const auto& s : branch.special)
    out["special"].push_back({{"kind", std::string(to_string(s.kind))},
                              {"after_index", s.after_index},
                              {"lambda", s.lambda},
                              {"point", point_json(s.point)}});
  return out.dump(2);
}

}  // namespace hcl::continuation
