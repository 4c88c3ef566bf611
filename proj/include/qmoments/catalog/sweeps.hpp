#pragma once

// Seeded randomized sweeps. Trial t always uses derive_seed(seed, t), so any
// single trial can be replayed on its own.

#include "qmoments/catalog/cfrd.hpp"
#include "qmoments/catalog/mermin_peres.hpp"
#include "qmoments/random.hpp"

namespace qmoments::catalog {

struct SweepSummary {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  std::size_t worst_trial = 0;
  InequalityReport worst;
};

inline void record(SweepSummary& s, std::size_t t, const InequalityReport& r) {
  ++s.trials;
  if (r.violated) ++s.violations;
  if (r.margin < s.min_margin) {
    s.min_margin = r.margin;
    s.worst_trial = t;
    s.worst = r;
  }
}

/// Report carrying the worst instance plus sweep statistics.
inline InequalityReport summary_report(const std::string& name, const SweepSummary& s, std::uint64_t seed, double tol) {
  auto r = InequalityReport::make(name, s.worst.lhs, s.worst.rhs, tol);
  r.details = s.worst.details;
  r.details["trials"] = static_cast<double>(s.trials);
  r.details["violations"] = static_cast<double>(s.violations);
  r.details["min_margin"] = s.min_margin;
  r.details["worst_trial"] = static_cast<double>(s.worst_trial);
  r.seed = seed;
  return r;
}

/// One random two-party instance: local dimensions 2..max_dim, 1..4 complex
/// settings per side, a random state of random rank.
inline InequalityReport random_two_party_instance(std::uint64_t seed, std::size_t max_dim) {
  if (max_dim < 2) throw std::invalid_argument("two-party sweep: dimension must be at least 2");
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> dim(2, max_dim), count(1, 4), rank_d(1, 4);
  const std::size_t da = dim(rng), db = dim(rng);
  const HilbertSpace s({da, db});
  auto side = [&](std::size_t slot, std::size_t d) {
    std::vector<ComplexObservable> v(count(rng));
    for (auto& x : v) x = {embed(random_hermitian(d, rng), slot, s), embed(random_hermitian(d, rng), slot, s)};
    return v;
  };
  auto a = side(0, da);
  auto b = side(1, db);
  const State st = random_mixed_state(s, rng, std::min(rank_d(rng), da * db));
  return cfrd_two_party(st, std::move(a), std::move(b));
}

/// Qubit pair near saturation: A0 = sigma1 + i sigma2 on each side (up to a
/// small random local rotation) with the singlet-like state |01> + |10> mixed with a
/// random state. Pure, unrotated, the two sides are equal.
inline InequalityReport near_saturating_two_party_instance(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const HilbertSpace s = HilbertSpace::qubits(2);
  std::normal_distribution<double> nd(0.0, 1.0);
  // exp(-i theta n.sigma / 2) with a random axis n
  auto rotated = [&](std::size_t slot, double theta) {
    Eigen::Vector3d n(nd(rng), nd(rng), nd(rng));
    n.normalize();
    const cplx i(0.0, 1.0);
    const CMatrix ns = n(0) * pauli(1).matrix() + n(1) * pauli(2).matrix() + n(2) * pauli(3).matrix();
    const CMatrix v = std::cos(theta / 2.0) * CMatrix::Identity(2, 2) - i * std::sin(theta / 2.0) * ns;
    return ComplexObservable{embed(Operator(CMatrix(v * pauli(1).matrix() * v.adjoint())), slot, s),
                             embed(Operator(CMatrix(v * pauli(2).matrix() * v.adjoint())), slot, s)};
  };
  const double theta = u(rng) < 0.5 ? 0.0 : 0.3 * u(rng);
  std::vector<ComplexObservable> a{rotated(0, theta)}, b{rotated(1, theta)};
  CVector psi = CVector::Zero(4);
  psi(1) = psi(2) = 1.0 / std::sqrt(2.0);
  const double p = u(rng) < 0.5 ? 1.0 : 1.0 - 0.1 * u(rng);
  const State noise = random_mixed_state(s, rng);
  const State st = p == 1.0 ? State::pure(s, psi) : mixture(p, State::pure(s, psi), noise);
  return cfrd_two_party(st, std::move(a), std::move(b));
}

/// Every fourth trial is a near-saturating qubit instance.
inline SweepSummary two_party_sweep(std::uint64_t seed, std::size_t trials, std::size_t max_dim = 4) {
  if (trials < 1) throw std::invalid_argument("two-party sweep: trials must be >= 1");
  SweepSummary s;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto sd = derive_seed(seed, t);
    record(s, t, t % 4 == 3 ? near_saturating_two_party_instance(sd) : random_two_party_instance(sd, max_dim));
  }
  return s;
}

/// Random nonnegative unit vector of length 1..max_len, often sparse.
inline std::vector<double> random_oscillator_z(std::uint64_t seed, std::size_t max_len = 50) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = len(rng);
  const double keep = u(rng);
  std::vector<double> z(n);
  double n2 = 0.0;
  for (auto& v : z) {
    v = u(rng) < keep ? std::abs(std::normal_distribution<double>(0.0, 1.0)(rng)) : 0.0;
    n2 += v * v;
  }
  if (n2 == 0.0) {
    z[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] = 1.0;
    n2 = 1.0;
  }
  for (auto& v : z) v /= std::sqrt(n2);
  return z;
}

inline SweepSummary oscillator_sweep(std::uint64_t seed, std::size_t trials, std::size_t max_len = 50) {
  if (trials < 1) throw std::invalid_argument("oscillator sweep: trials must be >= 1");
  SweepSummary s;
  for (std::size_t t = 0; t < trials; ++t) record(s, t, oscillator_tripartite_bound(random_oscillator_z(derive_seed(seed, t), max_len)));
  return s;
}

struct StateIndependence {
  std::size_t states = 0;
  double lhs_mean = 0.0;
  double lhs_std = 0.0;
  double max_lhs_error = 0.0;  // |lhs - 6|
  double max_rhs_error = 0.0;  // |rhs - 3 sqrt 3|
};

/// Mermin-Peres report over random pure two-qubit states.
inline StateIndependence mp_state_independence(std::uint64_t seed, std::size_t states) {
  if (states < 1) throw std::invalid_argument("mp_state_independence: states must be >= 1");
  const auto sq = mermin_peres_square();
  StateIndependence r;
  r.states = states;
  std::vector<double> lhs;
  for (std::size_t t = 0; t < states; ++t) {
    Rng rng(derive_seed(seed, t));
    const auto rep = mp_inequality(random_pure_state(HilbertSpace::qubits(2), rng), sq);
    lhs.push_back(rep.lhs);
    r.max_lhs_error = std::max(r.max_lhs_error, std::abs(rep.lhs - 6.0));
    r.max_rhs_error = std::max(r.max_rhs_error, std::abs(rep.rhs - 3.0 * std::sqrt(3.0)));
  }
  for (double v : lhs) r.lhs_mean += v;
  r.lhs_mean /= double(states);
  for (double v : lhs) r.lhs_std += (v - r.lhs_mean) * (v - r.lhs_mean);
  r.lhs_std = std::sqrt(r.lhs_std / double(states));
  return r;
}

}  // namespace qmoments::catalog
