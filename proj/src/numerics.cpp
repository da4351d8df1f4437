#include "hcl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace hcl::numerics {

double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// ------------------------------------------------------------------ Matrix

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  if (cols_ != rhs.rows_) throw DomainError("matrix dimension mismatch");
  Matrix out(rows_, rhs.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
    }
  return out;
}

std::vector<double> Matrix::operator*(std::span<const double> v) const {
  if (cols_ != v.size()) throw DomainError("matrix-vector dimension mismatch");
  std::vector<double> out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out[i] += (*this)(i, j) * v[j];
  return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw DomainError("matrix dimension mismatch");
  Matrix out = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
  return out;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

// -------------------------------------------------------------- integrator

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0 && rel_tol <= 1e-2) || !(abs_tol > 0.0 && abs_tol <= 1e-2))
    throw DomainError("integrator tolerances must lie in (0, 1e-2]");
  if (max_step < 0.0) throw DomainError("max_step must be non-negative");
}

namespace {

// Dormand-Prince 5(4) tableau with Hairer's continuous extension.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

}  // namespace

Trajectory integrate_ode(const OdeRhs& rhs, std::vector<double> y0, double t0, double t1,
                         const IntegratorConfig& cfg) {
  cfg.validate();
  const std::size_t n = y0.size();
  if (n == 0) throw DomainError("empty initial state");
  for (double v : y0)
    if (!std::isfinite(v)) throw DomainError("non-finite initial state");

  Trajectory tr;
  tr.t_begin_ = t0;
  tr.t_end_ = t1;
  tr.dim_ = n;
  tr.t_.push_back(t0);
  if (t0 == t1) {
    tr.final_ = y0;
    return tr;
  }

  const double dir = t1 > t0 ? 1.0 : -1.0;
  std::vector<double> y = std::move(y0), ynew(n), tmp(n), err(n);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  auto f = [&](double t, const std::vector<double>& state, std::vector<double>& out) {
    rhs(t, state, out);
    ++tr.evaluations_;
  };

  auto weighted_norm = [&](const std::vector<double>& e, const std::vector<double>& ya, const std::vector<double>& yb) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
      acc += (e[i] / sc) * (e[i] / sc);
    }
    return std::sqrt(acc / static_cast<double>(n));
  };

  double t = t0;
  f(t, y, k1);

  // Initial step guess (Hairer & Wanner, II.4).
  double h;
  {
    std::vector<double> zero(n, 0.0);
    const double dn0 = weighted_norm(y, y, zero) + 1e-300;
    const double dn1 = weighted_norm(k1, y, zero) + 1e-300;
    double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
    h0 = std::min(h0, std::abs(t1 - t0));
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dir * h0 * k1[i];
    f(t + dir * h0, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) err[i] = k2[i] - k1[i];
    const double dn2 = weighted_norm(err, y, zero) / h0;
    const double h1 = std::max(dn1, dn2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(dn1, dn2), 0.2);
    h = std::min(100.0 * h0, h1);
  }
  if (cfg.max_step > 0.0) h = std::min(h, cfg.max_step);

  std::size_t steps = 0;
  bool last = false;
  while (!last) {
    if (++steps > cfg.max_steps) {
      std::ostringstream msg;
      msg << "integrator step budget exhausted at t=" << t;
      throw ConvergenceError(msg.str());
    }
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t))) {
      std::ostringstream msg;
      msg << "integrator step size underflow at t=" << t;
      throw ConvergenceError(msg.str());
    }
    if ((t + dir * h - t1) * dir >= 0.0) {
      h = std::abs(t1 - t);
      last = true;
    }
    const double hs = dir * h;
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * a21 * k1[i];
    f(t + c2 * hs, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    f(t + c3 * hs, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(t + c4 * hs, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + c5 * hs, tmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(t + hs, tmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    f(t + hs, ynew, k7);
    for (std::size_t i = 0; i < n; ++i)
      err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

    bool finite = true;
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(ynew[i]) || !std::isfinite(err[i])) finite = false;
    const double en = finite ? weighted_norm(err, y, ynew) : std::numeric_limits<double>::infinity();

    if (en <= 1.0) {
      const std::size_t base = tr.coeff_.size();
      tr.coeff_.resize(base + 5 * n);
      double* r = tr.coeff_.data() + base;
      for (std::size_t i = 0; i < n; ++i) {
        const double dy = ynew[i] - y[i];
        const double bspl = hs * k1[i] - dy;
        r[i] = y[i];
        r[n + i] = dy;
        r[2 * n + i] = bspl;
        r[3 * n + i] = dy - hs * k7[i] - bspl;
        r[4 * n + i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      t = last ? t1 : t + hs;
      tr.t_.push_back(t);
      tr.h_.push_back(hs);
      y.swap(ynew);
      k1.swap(k7);
      const double fac = en == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2)));
      h *= fac;
    } else {
      last = false;
      h *= finite ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.25;
    }
    if (cfg.max_step > 0.0) h = std::min(h, cfg.max_step);
  }
  tr.final_ = y;
  return tr;
}

std::vector<double> Trajectory::operator()(double t) const {
  const double lo = std::min(t_begin_, t_end_), hi = std::max(t_begin_, t_end_);
  const double slack = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  if (t < lo - slack || t > hi + slack) throw DomainError("trajectory queried outside its time span");
  if (h_.empty()) return final_;
  const double dir = t_end_ >= t_begin_ ? 1.0 : -1.0;
  // First step boundary not before t in the integration direction.
  auto it = std::lower_bound(t_.begin(), t_.end(), t, [dir](double a, double b) { return dir * a < dir * b; });
  std::size_t step = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  step = std::min(step, h_.size() - 1);
  const double theta = (t - t_[step]) / h_[step];
  const double th1 = 1.0 - theta;
  const double* r = coeff_.data() + step * 5 * dim_;
  std::vector<double> out(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    out[i] = r[i] + theta * (r[dim_ + i] + th1 * (r[2 * dim_ + i] + theta * (r[3 * dim_ + i] + th1 * r[4 * dim_ + i])));
  return out;
}

// -------------------------------------------------------------- quadrature

QuadratureResult integrate_interval(const std::function<double(double)>& f, double a, double b, double tol,
                                    std::size_t max_evaluations) {
  QuadratureResult res;
  if (a == b) return res;
  if (!(tol > 0.0)) throw DomainError("quadrature tolerance must be positive");
  const double sign = b > a ? 1.0 : -1.0;
  if (b < a) std::swap(a, b);

  struct Panel {
    double a, b, fa, fm, fb, whole, tol;
  };
  auto eval = [&](double t) {
    ++res.evaluations;
    const double v = f(t);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "integrand is not finite at t=" << t;
      throw DomainError(msg.str());
    }
    return v;
  };
  // Start from panels no wider than 0.5 so that narrow features are sampled.
  const auto initial = static_cast<std::size_t>(std::max(8.0, std::ceil((b - a) / 0.5)));
  std::vector<Panel> stack;
  stack.reserve(initial + 64);
  const double w = (b - a) / static_cast<double>(initial);
  for (std::size_t i = 0; i < initial; ++i) {
    const double pa = a + w * static_cast<double>(i);
    const double pb = i + 1 == initial ? b : pa + w;
    const double pm = 0.5 * (pa + pb);
    Panel p{pa, pb, eval(pa), eval(pm), eval(pb), 0.0, tol / static_cast<double>(initial)};
    p.whole = (pb - pa) / 6.0 * (p.fa + 4.0 * p.fm + p.fb);
    stack.push_back(p);
  }
  double err_sum = 0.0;
  // Compensated summation keeps the 1e-12-level results clean.
  double sum = 0.0, comp = 0.0;
  auto accumulate = [&](double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };
  while (!stack.empty()) {
    if (res.evaluations > max_evaluations) throw ConvergenceError("quadrature evaluation budget exhausted");
    Panel p = stack.back();
    stack.pop_back();
    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m), rm = 0.5 * (m + p.b);
    const double flm = eval(lm), frm = eval(rm);
    const double left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    const double right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    const double delta = left + right - p.whole;
    if (std::abs(delta) <= 15.0 * p.tol || (p.b - p.a) < 1e-10 * std::max(1.0, std::abs(m))) {
      accumulate(left + right + delta / 15.0);
      err_sum += std::abs(delta) / 15.0;
    } else {
      stack.push_back({p.a, m, p.fa, flm, p.fm, left, 0.5 * p.tol});
      stack.push_back({m, p.b, p.fm, frm, p.fb, right, 0.5 * p.tol});
    }
  }
  res.value = sign * sum;
  res.error_estimate = err_sum;
  return res;
}

namespace {

struct Truncation {
  double cutoff = 0.0;
  double tail_bound = 0.0;
  bool zero = false;
};

// Envelope constant C with |f(t)| <= C exp(-d |t|), sampled on a grid.
Truncation choose_cutoff(const std::function<double(double)>& f, double decay, double allowance, bool both_sides,
                         std::size_t& evals) {
  const double reach = std::max(12.0, 60.0 / decay);
  double c = 0.0;
  for (double t = 0.0; t <= reach; t += 0.25) {
    for (double sgn : {1.0, -1.0}) {
      if (sgn < 0 && (!both_sides || t == 0.0)) continue;
      const double v = std::abs(f(sgn * t));
      ++evals;
      if (std::isfinite(v)) c = std::max(c, v * std::exp(decay * t));
    }
  }
  Truncation out;
  if (c == 0.0) {
    out.zero = true;
    return out;
  }
  out.cutoff = std::max(1.0, std::log(c / (decay * allowance)) / decay);
  out.tail_bound = c * std::exp(-decay * out.cutoff) / decay;
  return out;
}

}  // namespace

QuadratureResult integrate_line(const std::function<double(double)>& f, double decay_rate, double tol,
                                std::size_t max_evaluations) {
  if (!(decay_rate > 0.0)) throw DomainError("decay rate must be positive");
  if (!(tol > 0.0)) throw DomainError("quadrature tolerance must be positive");
  std::size_t evals = 0;
  const Truncation tr = choose_cutoff(f, decay_rate, 0.5e-2 * tol, true, evals);
  if (tr.zero) return {0.0, 0.0, evals};
  QuadratureResult r = integrate_interval(f, -tr.cutoff, tr.cutoff, 0.99 * tol, max_evaluations);
  r.evaluations += evals;
  r.error_estimate += 2.0 * tr.tail_bound;
  return r;
}

QuadratureResult integrate_half_line(const std::function<double(double)>& f, double decay_rate, double tol,
                                     std::size_t max_evaluations) {
  if (!(decay_rate > 0.0)) throw DomainError("decay rate must be positive");
  if (!(tol > 0.0)) throw DomainError("quadrature tolerance must be positive");
  std::size_t evals = 0;
  const Truncation tr = choose_cutoff(f, decay_rate, 1e-2 * tol, false, evals);
  if (tr.zero) return {0.0, 0.0, evals};
  QuadratureResult r = integrate_interval(f, 0.0, tr.cutoff, 0.99 * tol, max_evaluations);
  r.evaluations += evals;
  r.error_estimate += tr.tail_bound;
  return r;
}

GaussRule gauss_legendre(std::size_t n) {
  if (n == 0) throw DomainError("Gauss rule needs at least one node");
  GaussRule g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    g.nodes[n - 1 - i] = x;
    g.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return g;
}

// ---------------------------------------------------------- linear algebra

LuDecomposition::LuDecomposition(Matrix a) : lu_(std::move(a)) {
  const std::size_t n = lu_.rows();
  if (n != lu_.cols()) throw DomainError("LU needs a square matrix");
  perm_.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;
    if (lu_(piv, k) == 0.0) {
      singular_ = true;
      continue;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
      std::swap(perm_[k], perm_[piv]);
      sign_ = -sign_;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = lu_(i, k) / lu_(k, k);
      lu_(i, k) = m;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= m * lu_(k, j);
    }
  }
}

std::vector<double> LuDecomposition::solve(std::span<const double> b) const {
  const std::size_t n = lu_.rows();
  if (b.size() != n) throw DomainError("LU solve dimension mismatch");
  if (singular_) throw ConvergenceError("LU solve with a singular matrix");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = b[perm_[i]];
    for (std::size_t j = 0; j < i; ++j) v -= lu_(i, j) * x[j];
    x[i] = v;
  }
  for (std::size_t i = n; i-- > 0;) {
    double v = x[i];
    for (std::size_t j = i + 1; j < n; ++j) v -= lu_(i, j) * x[j];
    x[i] = v / lu_(i, i);
  }
  return x;
}

double LuDecomposition::determinant() const {
  if (singular_) return 0.0;
  double d = sign_;
  for (std::size_t i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
  return d;
}

double LuDecomposition::condition_estimate() const {
  if (singular_) return std::numeric_limits<double>::infinity();
  double hi = 0.0, lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lu_.rows(); ++i) {
    hi = std::max(hi, std::abs(lu_(i, i)));
    lo = std::min(lo, std::abs(lu_(i, i)));
  }
  return lo == 0.0 ? std::numeric_limits<double>::infinity() : hi / lo;
}

void orthonormalize_columns(Matrix& a) {
  const std::size_t m = a.rows(), k = a.cols();
  for (std::size_t j = 0; j < k; ++j) {
    double scale = 0.0;
    for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, std::abs(a(i, j)));
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t q = 0; q < j; ++q) {
        double d = 0.0;
        for (std::size_t i = 0; i < m; ++i) d += a(i, q) * a(i, j);
        for (std::size_t i = 0; i < m; ++i) a(i, j) -= d * a(i, q);
      }
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < m; ++i) nrm += a(i, j) * a(i, j);
    nrm = std::sqrt(nrm);
    if (!(nrm > 1e-13 * scale) || !std::isfinite(nrm)) throw ConvergenceError("re-orthonormalization failed: column collapsed");
    for (std::size_t i = 0; i < m; ++i) a(i, j) /= nrm;
  }
}

namespace {

// Hestenes one-sided Jacobi on a tall matrix (m >= n).
SvdResult svd_tall(const Matrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Matrix u = a;
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        if (gamma == 0.0) continue;
        const double denom = std::sqrt(alpha * beta);
        if (denom == 0.0) continue;
        off = std::max(off, std::abs(gamma) / denom);
        if (std::abs(gamma) <= 1e-17 * denom) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t), s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double up = u(i, p), uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (off <= 1e-15) break;
  }
  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double nrm = 0.0;
    for (std::size_t i = 0; i < m; ++i) nrm += u(i, j) * u(i, j);
    sigma[j] = std::sqrt(nrm);
  }
  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < n; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  SvdResult res{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
  const double smax = n > 0 ? sigma[order[0]] : 0.0;
  std::vector<bool> filled(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    res.sigma[k] = sigma[j];
    for (std::size_t i = 0; i < n; ++i) res.v(i, k) = v(i, j);
    if (sigma[j] > 1e-300 && sigma[j] > 1e-15 * smax) {
      for (std::size_t i = 0; i < m; ++i) res.u(i, k) = u(i, j) / sigma[j];
      filled[k] = true;
    }
  }
  // Complete left singular vectors of (numerically) zero singular values.
  for (std::size_t k = 0; k < n; ++k) {
    if (filled[k]) continue;
    for (std::size_t e = 0; e < m; ++e) {
      std::vector<double> cand(m, 0.0);
      cand[e] = 1.0;
      for (std::size_t q = 0; q < n; ++q) {
        if (!filled[q]) continue;
        double d = 0.0;
        for (std::size_t i = 0; i < m; ++i) d += res.u(i, q) * cand[i];
        for (std::size_t i = 0; i < m; ++i) cand[i] -= d * res.u(i, q);
      }
      double nrm = 0.0;
      for (double x : cand) nrm += x * x;
      nrm = std::sqrt(nrm);
      if (nrm > 0.5) {
        for (std::size_t i = 0; i < m; ++i) res.u(i, k) = cand[i] / nrm;
        filled[k] = true;
        break;
      }
    }
  }
  return res;
}

}  // namespace

SvdResult svd_small(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw DomainError("SVD of an empty matrix");
  if (m.rows() > 8 || m.cols() > 8) throw DomainError("svd_small handles at most 8 x 8");
  if (m.rows() >= m.cols()) return svd_tall(m);
  SvdResult t = svd_tall(m.transpose());
  return {t.v, t.sigma, t.u};
}

// ------------------------------------------------------------------ Newton

NewtonReport newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, std::vector<double> x0,
                          const NewtonOptions& opts) {
  NewtonReport rep;
  rep.x = std::move(x0);
  std::vector<double> r = residual(rep.x);
  rep.residual_norm = max_norm(r);
  for (rep.iterations = 0; rep.iterations < opts.max_iter; ++rep.iterations) {
    if (rep.residual_norm < opts.tol) {
      rep.status = NewtonStatus::converged;
      return rep;
    }
    LuDecomposition lu(jacobian(rep.x));
    if (lu.singular() || lu.condition_estimate() > opts.condition_limit) {
      rep.status = NewtonStatus::singular_jacobian;
      return rep;
    }
    std::vector<double> dx = lu.solve(r);
    double lambda = 1.0;
    std::vector<double> trial(rep.x.size());
    double trial_norm = 0.0;
    for (int back = 0; back < 30; ++back) {
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = rep.x[i] - lambda * dx[i];
      r = residual(trial);
      trial_norm = max_norm(r);
      if (!opts.damped || trial_norm < rep.residual_norm || trial_norm < opts.tol) break;
      lambda *= 0.5;
    }
    rep.step_norms.push_back(lambda * max_norm(dx));
    rep.x = trial;
    rep.residual_norm = trial_norm;
  }
  rep.status = rep.residual_norm < opts.tol ? NewtonStatus::converged : NewtonStatus::iteration_cap;
  return rep;
}

Matrix finite_difference_jacobian(const ResidualFn& residual, std::span<const double> x, double h) {
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
  const std::vector<double> r0 = residual(x);
  Matrix j(r0.size(), x.size());
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double step = h * std::max(1.0, std::abs(x[c]));
    xp[c] = x[c] + step;
    xm[c] = x[c] - step;
    const auto rp = residual(xp), rm = residual(xm);
    for (std::size_t i = 0; i < r0.size(); ++i) j(i, c) = (rp[i] - rm[i]) / (2.0 * step);
    xp[c] = xm[c] = x[c];
  }
  return j;
}

}  // namespace hcl::numerics
