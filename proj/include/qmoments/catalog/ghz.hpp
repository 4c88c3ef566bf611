#pragma once

// Three-qubit third-moment contextuality test.
//
// A_a = sigma1 on qubit a, B_a = C sigma2 on qubit a with C = sigma2 x sigma2 x sigma2.
// On GHZ, <(A_a + B_a)^2> = 0 forces A_a = -B_a for noncontextual values,
// hence <A1 A2 A3> = -<B1 B2 B3>, while quantum mechanics gives 1 and 1.

#include "qmoments/catalog/report.hpp"
#include "qmoments/moments.hpp"

#include <array>

namespace qmoments::catalog {

inline State ghz_state(std::size_t qubits) {
  if (qubits < 1) throw std::invalid_argument("ghz_state: need at least one qubit");
  const HilbertSpace s = HilbertSpace::qubits(qubits);
  CVector psi = CVector::Zero(static_cast<Eigen::Index>(s.total_dim()));
  psi(0) = psi(psi.size() - 1) = 1.0 / std::sqrt(2.0);
  return State::pure(s, psi);
}

struct GhzOperators {
  std::array<Operator, 3> a;
  std::array<Operator, 3> b;
};

/// b_sign = -1 builds the deliberately wrong B operators.
inline GhzOperators ghz_operators(double b_sign = 1.0) {
  const HilbertSpace s = HilbertSpace::qubits(3);
  const Operator c = embed(pauli(2), 0, s) * embed(pauli(2), 1, s) * embed(pauli(2), 2, s);
  GhzOperators g;
  for (std::size_t k = 0; k < 3; ++k) {
    g.a[k] = embed(pauli(1), k, s);
    g.b[k] = b_sign * (c * embed(pauli(2), k, s));
  }
  return g;
}

inline InequalityReport ghz_test(const State& state, const GhzOperators& g, double premise_tol = 1e-12) {
  if (!(state.space() == HilbertSpace::qubits(3))) throw std::invalid_argument("ghz_test: state must live on three qubits");
  InequalityReport tmp;
  bool premise = true;
  for (std::size_t k = 0; k < 3; ++k) {
    const Operator s = g.a[k] + g.b[k];
    const double v = expect(state, s * s).real();
    tmp.details["sum_sq_" + std::to_string(k + 1)] = v;
    tmp.details["commutator_AB_" + std::to_string(k + 1)] = max_abs(commutator(g.a[k], g.b[k]).matrix());
    if (std::abs(v) > premise_tol) premise = false;
  }
  const cplx aaa = expect(state, g.a[0] * g.a[1] * g.a[2]);
  const cplx bbb = expect(state, g.b[0] * g.b[1] * g.b[2]);
  const double imag = std::max(std::abs(aaa.imag()), std::abs(bbb.imag()));
  if (imag > 1e-12) throw std::runtime_error("ghz_test: correlator has imaginary part " + std::to_string(imag));
  const double lhs = std::abs(aaa.real() + bbb.real());
  auto r = InequalityReport::make("ghz", lhs, premise ? 0.0 : lhs);
  r.details = std::move(tmp.details);
  r.details["A1A2A3"] = aaa.real();
  r.details["B1B2B3"] = bbb.real();
  r.details["premise_met"] = premise ? 1.0 : 0.0;
  r.params = {{"constraint", "<A1A2A3> + <B1B2B3> = 0 when <(A+B)^2> = 0"}};
  return r;
}

inline InequalityReport ghz_test(double b_sign = 1.0) {
  auto r = ghz_test(ghz_state(3), ghz_operators(b_sign));
  r.params["state"] = "ghz";
  r.params["b_sign"] = b_sign;
  return r;
}

/// Twelve labels for the model-fitting view: one observer, settings
/// 1 = {A1,A2,A3}, 2 = {B1,B2,B3}, 2+a = {A_a, B_a}.
inline ObservableSet ghz_fit_set() {
  const GhzOperators g = ghz_operators();
  std::vector<Observable> obs;
  for (int k = 0; k < 3; ++k) obs.push_back({Label{"Q", 1, k + 1}, g.a[static_cast<std::size_t>(k)]});
  for (int k = 0; k < 3; ++k) obs.push_back({Label{"Q", 2, k + 1}, g.b[static_cast<std::size_t>(k)]});
  for (int k = 0; k < 3; ++k) {
    obs.push_back({Label{"Q", 3 + k, 1}, g.a[static_cast<std::size_t>(k)]});
    obs.push_back({Label{"Q", 3 + k, 2}, g.b[static_cast<std::size_t>(k)]});
  }
  return ObservableSet(HilbertSpace::qubits(3), std::move(obs));
}

}  // namespace qmoments::catalog
