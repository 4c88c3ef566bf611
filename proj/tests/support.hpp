#pragma once

// Random instance builders shared by the unit tests and the acceptance run.

#include "qmoments/moments.hpp"
#include "qmoments/random.hpp"
#include "qmoments/lhv/factor_model.hpp"

#include <optional>

namespace qmtest {

using namespace qmoments;

/// Observables on a two-party space where each (observer, setting) shares an
/// eigenbasis, so every jointly measurable pair commutes by construction.
struct Instance {
  HilbertSpace space{std::vector<std::size_t>{2, 2}};
  State state = State::maximally_mixed(HilbertSpace::qubits(2));
  std::optional<ObservableSet> obs;
};

inline Instance random_setting_instance(std::uint64_t seed, std::size_t max_obs = 5) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> dim(2, 3), count(2, max_obs), pick2(0, 1);
  std::normal_distribution<double> nd(0.0, 1.0);
  Instance in;
  in.space = HilbertSpace({dim(rng), dim(rng)});
  const std::size_t n = count(rng);
  std::map<std::pair<std::size_t, int>, CMatrix> bases;
  std::map<std::pair<std::size_t, int>, int> used;
  std::vector<Observable> obs;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t party = pick2(rng);
    const int setting = 1 + static_cast<int>(pick2(rng));
    const auto key = std::make_pair(party, setting);
    const auto d = static_cast<Eigen::Index>(in.space.factor_dim(party));
    if (!bases.count(key)) bases[key] = random_unitary_matrix(d, rng);
    RVector ev(d);
    for (Eigen::Index i = 0; i < d; ++i) ev(i) = nd(rng);
    const CMatrix& u = bases[key];
    const CMatrix local = u * ev.cast<cplx>().asDiagonal() * u.adjoint();
    const Label l{party == 0 ? "A" : "B", setting, ++used[key]};
    obs.push_back({l, embed(Operator(CMatrix(0.5 * (local + local.adjoint()))), party, in.space)});
  }
  in.state = random_mixed_state(in.space, rng);
  in.obs.emplace(in.space, std::move(obs));
  return in;
}

/// Appends to one party a setting-3 observable that is a combination of that
/// party's observables from settings 1 and 2, so the covariance kernel gains a
/// cross-setting vector. Returns false (instance unchanged) when no party has both.
inline bool add_cross_setting_dependency(Instance& in, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  for (const std::string who : {"A", "B"}) {
    std::optional<std::size_t> s1, s2;
    for (std::size_t i = 0; i < in.obs->size(); ++i) {
      const Label& l = in.obs->label(i);
      if (l.observer != who) continue;
      if (l.setting == 1 && !s1) s1 = i;
      if (l.setting == 2 && !s2) s2 = i;
    }
    if (!s1 || !s2) continue;
    const Operator mix = nd(rng) * in.obs->op(*s1) + nd(rng) * in.obs->op(*s2) +
                         nd(rng) * Operator::identity(in.space);
    std::vector<Observable> obs = in.obs->entries();
    obs.push_back({Label{who, 3, 1}, mix});
    in.obs.emplace(in.space, std::move(obs));
    return true;
  }
  return false;
}

/// Two-qubit Pauli string with index p in 1..15 (p = 4a + b, a, b in 0..3).
inline Operator pauli_string(int p) {
  const HilbertSpace s = HilbertSpace::qubits(2);
  auto local = [](int k) { return k == 0 ? Operator::identity(HilbertSpace::single(2)) : pauli(k); };
  return kron(local(p / 4), local(p % 4));
}

/// Commutation pattern of Pauli strings from the symplectic form.
inline bool paulis_commute(int p, int q) {
  auto anti = [](int a, int b) { return a != 0 && b != 0 && a != b; };
  return (anti(p / 4, q / 4) + anti(p % 4, q % 4)) % 2 == 0;
}

/// Pauli tuples (with repeats) realizing a commutation graph with the given
/// degree key, e.g. "4:2211". Empty when none exists.
inline std::vector<int> paulis_for_graph(const std::string& key) {
  const std::size_t n = static_cast<std::size_t>(key[0] - '0');
  std::vector<int> p(n, 1);
  while (true) {
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, true));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) adj[i][j] = paulis_commute(p[i], p[j]);
    if (lhv::detail::degree_key(n, adj) == key) return p;
    std::size_t k = 0;
    while (k < n && ++p[k] > 15) p[k++] = 1;
    if (k == n) return {};
  }
}

/// Random affine images a U P U^dag + b of the given Pauli strings, with a
/// random full-rank state. Commutation relations are those of the strings.
inline std::pair<State, ObservableSet> graph_instance(const std::vector<int>& paulis, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> scale(0.5, 2.0), shift(-1.0, 1.0);
  const HilbertSpace s = HilbertSpace::qubits(2);
  const CMatrix u = random_unitary_matrix(4, rng);
  std::vector<Observable> obs;
  for (std::size_t i = 0; i < paulis.size(); ++i) {
    const CMatrix m = scale(rng) * (u * pauli_string(paulis[i]).matrix() * u.adjoint()) + shift(rng) * CMatrix::Identity(4, 4);
    obs.push_back({Label{"A", static_cast<int>(i) + 1, 1}, Operator(s, CMatrix(0.5 * (m + m.adjoint())))});
  }
  return {random_mixed_state(s, rng), ObservableSet(s, std::move(obs))};
}

/// Largest deviation between model and quantum moments over every commuting
/// subset and every power pattern with entries 1..3.
inline double factor_model_error(const State& st, const ObservableSet& obs, const lhv::FactorModel& fm) {
  const std::size_t n = obs.size();
  double worst = 0.0;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::size_t> mem;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1u) mem.push_back(i);
    bool clique = true;
    for (auto i : mem)
      for (auto j : mem) clique = clique && obs.commutes(i, j);
    if (!clique) continue;
    std::vector<int> pw(mem.size(), 1);
    while (true) {
      std::vector<int> powers(n, 0);
      Operator prod = Operator::identity(obs.space());
      for (std::size_t k = 0; k < mem.size(); ++k) {
        powers[mem[k]] = pw[k];
        prod = prod * obs.op(mem[k]).pow(pw[k]);
      }
      worst = std::max(worst, std::abs(fm.moment(powers) - expect(st, prod).real()));
      std::size_t k = 0;
      while (k < pw.size() && ++pw[k] > 3) pw[k++] = 1;
      if (k == pw.size()) break;
    }
  }
  return worst;
}

/// Arbitrary Hermitian observables under one observer with distinct settings;
/// no commutation constraint applies.
inline std::pair<State, ObservableSet> unconstrained_instance(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> dim(2, 4), count(1, 5);
  const HilbertSpace s = HilbertSpace::single(dim(rng));
  const std::size_t n = count(rng);
  std::vector<Observable> obs;
  for (std::size_t i = 0; i < n; ++i) obs.push_back({Label{"A", static_cast<int>(i) + 1, 1}, random_hermitian(s.total_dim(), rng)});
  std::uniform_int_distribution<std::size_t> rank(1, s.total_dim());
  return {random_mixed_state(s, rng, rank(rng)), ObservableSet(s, std::move(obs))};
}

}  // namespace qmtest
