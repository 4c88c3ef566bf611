#pragma once

#include "qmoments/catalog/m_matrix.hpp"
#include "qmoments/search/tridiagonal.hpp"

#include <json.hpp>

#include <iomanip>
#include <sstream>

namespace qmoments::search {

struct EigenResult {
  std::size_t cutoff = 0;
  double lambda_min = 0.0;
  RVector vector;
  std::size_t iterations = 0;
  std::size_t bisection_steps = 0;
  double residual = 0.0;
  double matrix_norm = 0.0;

  nlohmann::json to_json() const {
    std::vector<double> z(vector.data(), vector.data() + vector.size());
    return {{"cutoff", cutoff},     {"lambda_min", lambda_min}, {"vector", z},
            {"iterations", iterations}, {"bisection_steps", bisection_steps},
            {"residual", residual}, {"matrix_norm", matrix_norm}};
  }
};

/// Lowest eigenpair of M for cutoff N.
inline EigenResult min_eigenpair(std::size_t cutoff) {
  const catalog::MMatrix m = catalog::m_bands(cutoff);
  const auto p = tridiagonal_eigenpair(m.diag, m.offdiag);
  EigenResult r;
  r.cutoff = cutoff;
  r.lambda_min = p.value;
  r.vector = p.vector;
  r.iterations = p.iterations;
  r.bisection_steps = p.bisection_steps;
  r.residual = p.residual;
  r.matrix_norm = m.norm_bound();
  return r;
}

/// z^T M z for the cutoff len(z) - 1.
inline double violation_margin(const std::vector<double>& z) {
  if (z.empty()) throw std::invalid_argument("violation_margin: z must be non-empty");
  double s = 0.0;
  for (std::size_t n = 0; n < z.size(); ++n) {
    s += (n + 0.5) * (n + 0.5) * z[n] * z[n];
    if (n + 1 < z.size()) s -= double(n + 1) * double(n + 1) * z[n] * z[n + 1];
  }
  return s;
}

struct SweepRow {
  std::size_t cutoff = 0;
  int det4m_sign = 0;
  double lambda_min = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;

  /// Smallest N with det(4M) < 0, or -1.
  long first_negative_determinant() const {
    for (const auto& r : rows)
      if (r.det4m_sign < 0) return static_cast<long>(r.cutoff);
    return -1;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "N,det4M_sign,lambda_min\n" << std::setprecision(17);
    for (const auto& r : rows) os << r.cutoff << ',' << r.det4m_sign << ',' << r.lambda_min << '\n';
    return os.str();
  }

  nlohmann::json to_json() const {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : rows) a.push_back({{"N", r.cutoff}, {"det4M_sign", r.det4m_sign}, {"lambda_min", r.lambda_min}});
    return {{"rows", a}, {"first_negative_determinant", first_negative_determinant()}};
  }
};

inline SweepTable cutoff_sweep(std::size_t n_max) {
  if (n_max + 1 > catalog::kMaxTridiagonalDim) throw std::invalid_argument("cutoff_sweep: n_max exceeds the tridiagonal cap");
  const auto dets = catalog::det4m_continuants(n_max);
  SweepTable t;
  for (std::size_t n = 0; n <= n_max; ++n) {
    const auto e = min_eigenpair(n);
    t.rows.push_back({n, dets[n].sign(), e.lambda_min});
  }
  return t;
}

}  // namespace qmoments::search
