#pragma once

// Quadratic form of <|AB|^2> - <ABCD> on sum_n z_n |nnnn>:
//   M_nn = (n + 1/2)^2,  M_{n,n+1} = -(n + 1)^2 / 2.
// 4M is integral: diagonal (2n+1)^2, off-diagonal -2(n+1)^2.

#include "qmoments/hilbert.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <vector>

namespace qmoments::catalog {

using BigInt = boost::multiprecision::cpp_int;

/// Largest tridiagonal order accepted by the search path.
inline constexpr std::size_t kMaxTridiagonalDim = 20000;
/// Bareiss is cubic in bignum operations; beyond this the continuant is used.
inline constexpr std::size_t kBareissMaxCutoff = 64;

/// Fraction-free elimination; every intermediate is an exact minor.
inline BigInt bareiss_determinant(std::vector<std::vector<BigInt>> a) {
  const std::size_t n = a.size();
  if (n == 0) return 1;
  for (const auto& row : a)
    if (row.size() != n) throw std::invalid_argument("bareiss_determinant: matrix is not square");
  int sign = 1;
  BigInt prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t p = k + 1;
      while (p < n && a[p][k] == 0) ++p;
      if (p == n) return 0;
      std::swap(a[k], a[p]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
      a[i][k] = 0;
    }
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

struct MMatrix {
  std::size_t cutoff = 0;
  RVector diag;     // N+1 entries
  RVector offdiag;  // N entries
  BigInt det4m;

  std::size_t size() const { return cutoff + 1; }

  RMatrix dense() const {
    if (size() > kMaxDenseDim) throw std::invalid_argument("MMatrix::dense: order exceeds dense cap");
    const auto n = static_cast<Eigen::Index>(size());
    RMatrix m = RMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) = diag(i);
    for (Eigen::Index i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = offdiag(i);
    return m;
  }

  /// Row-sum bound on the spectral norm.
  double norm_bound() const {
    double w = 0.0;
    const auto n = static_cast<Eigen::Index>(size());
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = std::abs(diag(i));
      if (i > 0) r += std::abs(offdiag(i - 1));
      if (i + 1 < n) r += std::abs(offdiag(i));
      w = std::max(w, r);
    }
    return w;
  }

  std::string det4m_string() const { return det4m.str(); }
  int det4m_sign() const { return det4m.sign(); }
};

inline BigInt m4_diag(std::size_t n) { return BigInt(2 * n + 1) * BigInt(2 * n + 1); }
inline BigInt m4_off(std::size_t n) { return -2 * BigInt(n + 1) * BigInt(n + 1); }

/// det(4M) for cutoffs 0..n_max via D_k = d_k D_{k-1} - e_{k-1}^2 D_{k-2}.
inline std::vector<BigInt> det4m_continuants(std::size_t n_max) {
  std::vector<BigInt> d;
  d.reserve(n_max + 1);
  BigInt prev2 = 1, prev1 = m4_diag(0);
  d.push_back(prev1);
  for (std::size_t k = 1; k <= n_max; ++k) {
    const BigInt e = m4_off(k - 1);
    BigInt cur = m4_diag(k) * prev1 - e * e * prev2;
    prev2 = std::move(prev1);
    prev1 = cur;
    d.push_back(std::move(cur));
  }
  return d;
}

inline std::vector<std::vector<BigInt>> m4_integer_matrix(std::size_t cutoff) {
  const std::size_t n = cutoff + 1;
  std::vector<std::vector<BigInt>> a(n, std::vector<BigInt>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = m4_diag(i);
    if (i + 1 < n) a[i][i + 1] = a[i + 1][i] = m4_off(i);
  }
  return a;
}

/// Bands only; det4m is left at zero.
inline MMatrix m_bands(std::size_t cutoff) {
  if (cutoff + 1 > kMaxTridiagonalDim) throw std::invalid_argument("m_matrix: cutoff exceeds the tridiagonal cap");
  MMatrix m;
  m.cutoff = cutoff;
  const auto n = static_cast<Eigen::Index>(cutoff + 1);
  m.diag.resize(n);
  m.offdiag.resize(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) m.diag(i) = (i + 0.5) * (i + 0.5);
  for (Eigen::Index i = 0; i + 1 < n; ++i) m.offdiag(i) = -0.5 * double(i + 1) * double(i + 1);
  return m;
}

inline MMatrix m_matrix(std::size_t cutoff) {
  MMatrix m = m_bands(cutoff);
  m.det4m = cutoff <= kBareissMaxCutoff ? bareiss_determinant(m4_integer_matrix(cutoff)) : det4m_continuants(cutoff).back();
  return m;
}

}  // namespace qmoments::catalog
