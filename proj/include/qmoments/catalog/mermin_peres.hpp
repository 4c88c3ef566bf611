#pragma once

// Mermin-Peres square and the fourth-moment inequality
//   |<S>| <= sum_ij sqrt(<M_ij^2><M_ij^4>/3),  S = sum_i (C_i - R_i) = det N.

#include "qmoments/catalog/report.hpp"
#include "qmoments/moments.hpp"
#include "qmoments/random.hpp"

#include <array>

namespace qmoments::catalog {

using Grid3 = std::array<std::array<double, 3>, 3>;

struct MerminPeresSquare {
  std::array<std::array<Operator, 3>, 3> m;

  Operator row_product(std::size_t i) const { return m[i][0] * m[i][1] * m[i][2]; }
  Operator column_product(std::size_t j) const { return m[0][j] * m[1][j] * m[2][j]; }

  /// Largest commutator among row-mates and column-mates.
  double commutation_residual() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = j + 1; k < 3; ++k) {
          worst = std::max(worst, max_abs(commutator(m[i][j], m[i][k]).matrix()));
          worst = std::max(worst, max_abs(commutator(m[j][i], m[k][i]).matrix()));
        }
    return worst;
  }

  void validate(double tol = kExactTol) const {
    const HilbertSpace& s = m[0][0].space();
    for (const auto& row : m)
      for (const auto& x : row) {
        if (!(x.space() == s)) throw std::invalid_argument("MerminPeresSquare: entries on different spaces");
        if (!x.is_hermitian(tol)) throw std::invalid_argument("MerminPeresSquare: entry not Hermitian");
      }
    if (commutation_residual() > tol) throw std::invalid_argument("MerminPeresSquare: row or column mates do not commute");
  }
};

inline MerminPeresSquare mermin_peres_square() {
  const HilbertSpace s = HilbertSpace::qubits(2);
  auto a = [&](int k) { return embed(pauli(k), 0, s); };
  auto b = [&](int k) { return embed(pauli(k), 1, s); };
  MerminPeresSquare q{{{{a(1), a(1) * b(1), b(1)}, {-(a(1) * b(3)), a(2) * b(2), -(a(3) * b(1))}, {b(3), a(3) * b(3), a(3)}}}};
  q.validate();
  const Operator id = Operator::identity(s);
  for (std::size_t i = 0; i < 3; ++i) {
    if (max_abs((q.row_product(i) - id).matrix()) > kExactTol) throw std::logic_error("mermin_peres_square: row product is not +1");
    if (max_abs((q.column_product(i) + id).matrix()) > kExactTol)
      throw std::logic_error("mermin_peres_square: column product is not -1");
  }
  return q;
}

/// S from row/column products and det N with N_ij = M_{i+j, i-j} (1-based, mod 3).
struct DetIdentity {
  double s = 0.0;
  double det_n = 0.0;
};

inline DetIdentity det_identity_check(const Grid3& m) {
  DetIdentity r;
  for (std::size_t i = 0; i < 3; ++i) {
    const double c = m[0][i] * m[1][i] * m[2][i];
    const double row = m[i][0] * m[i][1] * m[i][2];
    r.s += c - row;
  }
  Eigen::Matrix3d n;
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) {
      const int p = ((i + j - 1) % 3 + 3) % 3;
      const int q = ((i - j - 1) % 3 + 3) % 3;
      n(i - 1, j - 1) = m[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
    }
  r.det_n = n.determinant();
  return r;
}

inline InequalityReport mp_inequality(const State& state, const MerminPeresSquare& sq) {
  sq.validate();
  if (!(state.space() == sq.m[0][0].space())) throw std::invalid_argument("mp_inequality: space mismatch");
  cplx s = 0.0;
  for (std::size_t i = 0; i < 3; ++i) s += expect(state, sq.column_product(i)) - expect(state, sq.row_product(i));
  double rhs = 0.0;
  double m2_max = 0.0, m4_max = 0.0;
  for (const auto& row : sq.m)
    for (const auto& x : row) {
      const double m2 = fourth_moment(state, x, 2), m4 = fourth_moment(state, x, 4);
      rhs += std::sqrt(m2 * m4 / 3.0);
      m2_max = std::max(m2_max, m2);
      m4_max = std::max(m4_max, m4);
    }
  auto r = InequalityReport::make("mermin-peres", std::abs(s), rhs);
  r.details = {{"S", s.real()}, {"S_imag", s.imag()}, {"max_M2", m2_max}, {"max_M4", m4_max}};
  return r;
}

/// Classical side: random tables with standard normal entries. Checks the
/// identity per table and the inequality for the empirical distribution.
struct ClassicalMpCheck {
  double max_identity_error = 0.0;  // |S - det N| / (1 + |det N|)
  double mean_s = 0.0;
  double bound = 0.0;
  std::size_t trials = 0;
  bool holds = false;
};

inline ClassicalMpCheck mp_classical_check(std::uint64_t seed, std::size_t trials) {
  if (trials < 1) throw std::invalid_argument("mp_classical_check: trials must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  ClassicalMpCheck c;
  c.trials = trials;
  Grid3 m2{}, m4{};
  double s_sum = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Grid3 m;
    for (auto& row : m)
      for (auto& x : row) x = nd(rng);
    const auto id = det_identity_check(m);
    c.max_identity_error = std::max(c.max_identity_error, std::abs(id.s - id.det_n) / (1.0 + std::abs(id.det_n)));
    s_sum += id.s;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        const double sq = m[i][j] * m[i][j];
        m2[i][j] += sq;
        m4[i][j] += sq * sq;
      }
  }
  const auto n = static_cast<double>(trials);
  c.mean_s = s_sum / n;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) c.bound += std::sqrt((m2[i][j] / n) * (m4[i][j] / n) / 3.0);
  c.holds = std::abs(c.mean_s) <= c.bound;
  return c;
}

}  // namespace qmoments::catalog
