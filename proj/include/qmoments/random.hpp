#pragma once

// Seeded random instances: Hermitian operators, unitaries, states.
// All generators take an explicit engine; per-trial engines come from
// derive_seed(root, trial) so sweeps are reproducible in any order.

#include "qmoments/hilbert.hpp"

#include <cstdint>
#include <random>

namespace qmoments {

using Rng = std::mt19937_64;

/// Default root seed for every randomized run.
inline constexpr std::uint64_t kDefaultSeed = 20130611ULL;

/// splitmix64 finalizer applied to (root, stream); a splittable seed contract.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline CMatrix random_ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cplx(n(rng), n(rng));
  return m;
}

inline CMatrix random_hermitian_matrix(Eigen::Index d, Rng& rng) {
  const CMatrix g = random_ginibre(d, d, rng);
  return 0.5 * (g + g.adjoint());
}

inline Operator random_hermitian(std::size_t d, Rng& rng) {
  return Operator(random_hermitian_matrix(static_cast<Eigen::Index>(d), rng));
}

inline CMatrix random_unitary_matrix(Eigen::Index d, Rng& rng) {
  const CMatrix g = random_ginibre(d, d, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < d; ++k) {
    const cplx rk = r(k, k);
    if (std::abs(rk) > 0.0) q.col(k) *= rk / std::abs(rk);
  }
  return q;
}

inline CVector random_unit_vector(Eigen::Index d, Rng& rng) {
  CVector v = random_ginibre(d, 1, rng);
  return v / v.norm();
}

inline State random_pure_state(const HilbertSpace& space, Rng& rng) {
  return State::pure(space, random_unit_vector(static_cast<Eigen::Index>(space.total_dim()), rng));
}

/// Random density matrix G G^dag / Tr with G of shape d x rank.
inline State random_mixed_state(const HilbertSpace& space, Rng& rng, std::size_t rank = 0) {
  const auto d = static_cast<Eigen::Index>(space.total_dim());
  const Eigen::Index k = rank == 0 ? d : static_cast<Eigen::Index>(rank);
  const CMatrix g = random_ginibre(d, k, rng);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return State::mixed(space, std::move(rho));
}

}  // namespace qmoments
