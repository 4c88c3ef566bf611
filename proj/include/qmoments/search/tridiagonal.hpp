#pragma once

// Symmetric tridiagonal eigenpairs: Sturm-count bisection for the value,
// shifted inverse iteration for the vector.

#include "qmoments/hilbert.hpp"

#include <limits>

namespace qmoments::search {

/// Number of eigenvalues strictly below x.
inline std::size_t sturm_count(const RVector& d, const RVector& e, double x) {
  const auto n = d.size();
  const double tiny = std::numeric_limits<double>::min();
  std::size_t count = 0;
  double q = d(0) - x;
  for (Eigen::Index i = 0;; ++i) {
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
    if (i + 1 >= n) break;
    q = d(i + 1) - x - e(i) * e(i) / q;
  }
  return count;
}

inline std::pair<double, double> gershgorin_interval(const RVector& d, const RVector& e) {
  const auto n = d.size();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Eigen::Index i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(e(i - 1));
    if (i + 1 < n) r += std::abs(e(i));
    lo = std::min(lo, d(i) - r);
    hi = std::max(hi, d(i) + r);
  }
  return {lo, hi};
}

struct Bisection {
  double lo = 0.0, hi = 0.0;
  std::size_t steps = 0;
};

/// Bracket of the k-th smallest eigenvalue (k from 0), narrowed until the
/// midpoint stops being representable between the ends.
inline Bisection bisect_eigenvalue(const RVector& d, const RVector& e, std::size_t k, std::size_t max_steps = 2000) {
  auto [lo, hi] = gershgorin_interval(d, e);
  const double pad = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  lo -= pad;
  hi += pad;
  Bisection b;
  for (; b.steps < max_steps; ++b.steps) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(d, e, mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  if (b.steps == max_steps) throw NumericalFailure("bisect_eigenvalue: no convergence within the step cap");
  b.lo = lo;
  b.hi = hi;
  return b;
}

/// Solve (T - s I) x = b by Gaussian elimination with partial pivoting on the band.
inline RVector tridiagonal_solve(const RVector& d, const RVector& e, double s, RVector b) {
  const auto n = d.size();
  if (n == 1) {
    double p = d(0) - s;
    if (p == 0.0) p = std::numeric_limits<double>::epsilon();
    b(0) /= p;
    return b;
  }
  // Row i holds (diag, up1, up2) after elimination.
  RVector a0 = d.array() - s, a1 = RVector::Zero(n), a2 = RVector::Zero(n), sub = RVector::Zero(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    a1(i) = e(i);
    sub(i + 1) = e(i);
  }
  const double floor = std::numeric_limits<double>::epsilon() * std::max(1.0, (d.array() - s).abs().maxCoeff());
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    // candidate rows i and i+1, column i
    if (std::abs(sub(i + 1)) > std::abs(a0(i))) {
      // swap row i with row i+1: row i+1 is (sub, a0, a1) in columns i, i+1, i+2
      std::swap(a0(i), sub(i + 1));
      std::swap(a1(i), a0(i + 1));
      std::swap(a2(i), a1(i + 1));
      std::swap(b(i), b(i + 1));
    }
    if (a0(i) == 0.0) a0(i) = floor;
    const double m = sub(i + 1) / a0(i);
    a0(i + 1) -= m * a1(i);
    a1(i + 1) -= m * a2(i);
    b(i + 1) -= m * b(i);
    sub(i + 1) = 0.0;
  }
  if (a0(n - 1) == 0.0) a0(n - 1) = floor;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double v = b(i);
    if (i + 1 < n) v -= a1(i) * b(i + 1);
    if (i + 2 < n) v -= a2(i) * b(i + 2);
    b(i) = v / a0(i);
  }
  return b;
}

inline RVector tridiagonal_apply(const RVector& d, const RVector& e, const RVector& v) {
  RVector r = d.cwiseProduct(v);
  for (Eigen::Index i = 0; i + 1 < d.size(); ++i) {
    r(i) += e(i) * v(i + 1);
    r(i + 1) += e(i) * v(i);
  }
  return r;
}

inline void fix_sign(RVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) != 0.0) {
      if (v(i) < 0.0) v = -v;
      return;
    }
}

struct TridiagonalEigenpair {
  double value = 0.0;
  RVector vector;
  std::size_t bisection_steps = 0;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// k-th smallest eigenpair; residual ||Tv - lambda v|| <= tol_rel * ||T||_inf.
inline TridiagonalEigenpair tridiagonal_eigenpair(const RVector& d, const RVector& e, std::size_t k = 0,
                                                  double tol_rel = 1e-10, std::size_t max_iter = 50) {
  const auto n = d.size();
  if (n == 0) throw std::invalid_argument("tridiagonal_eigenpair: empty matrix");
  if (e.size() != n - 1) throw std::invalid_argument("tridiagonal_eigenpair: off-diagonal length must be n-1");
  if (k >= static_cast<std::size_t>(n)) throw std::invalid_argument("tridiagonal_eigenpair: index out of range");
  const auto [glo, ghi] = gershgorin_interval(d, e);
  const double norm = std::max(std::abs(glo), std::abs(ghi));
  const Bisection b = bisect_eigenvalue(d, e, k);
  TridiagonalEigenpair r;
  r.bisection_steps = b.steps;
  r.value = 0.5 * (b.lo + b.hi);
  // Deterministic start with weight on every component.
  RVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * std::sin(1.0 + double(i));
  v.normalize();
  const double shift = r.value;
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    RVector w = tridiagonal_solve(d, e, shift, v);
    const double wn = w.norm();
    if (!std::isfinite(wn) || wn == 0.0) throw NumericalFailure("tridiagonal_eigenpair: inverse iteration broke down");
    v = w / wn;
    const RVector tv = tridiagonal_apply(d, e, v);
    const double rq = v.dot(tv);
    r.residual = (tv - rq * v).norm();
    if (r.residual <= tol_rel * std::max(norm, 1e-300)) {
      fix_sign(v);
      r.vector = v;
      return r;
    }
  }
  throw NumericalFailure("tridiagonal_eigenpair: inverse iteration did not reach residual " + std::to_string(tol_rel) +
                         "*||T|| after " + std::to_string(max_iter) + " steps");
}

}  // namespace qmoments::search
