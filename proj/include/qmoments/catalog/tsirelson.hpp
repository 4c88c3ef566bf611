#pragma once

// CHSH combination against its weak-positivity bound sum <X^2> / sqrt(2).

#include "qmoments/catalog/report.hpp"
#include "qmoments/hilbert.hpp"

namespace qmoments::catalog {

inline InequalityReport tsirelson_check(const State& state, const Operator& a1, const Operator& a2, const Operator& b1,
                                        const Operator& b2) {
  for (const Operator* a : {&a1, &a2})
    for (const Operator* b : {&b1, &b2})
      if (!commute(*a, *b)) throw std::invalid_argument("tsirelson_check: A and B operators must commute");
  for (const Operator* x : {&a1, &a2, &b1, &b2})
    if (!x->is_hermitian()) throw std::invalid_argument("tsirelson_check: operators must be Hermitian");
  auto e = [&](const Operator& x, const Operator& y) { return expect(state, x * y).real(); };
  const double a1b1 = e(a1, b1), a1b2 = e(a1, b2), a2b1 = e(a2, b1), a2b2 = e(a2, b2);
  const double lhs = a1b1 + a1b2 + a2b1 - a2b2;
  const double sq = e(a1, a1) + e(a2, a2) + e(b1, b1) + e(b2, b2);
  auto r = InequalityReport::make("tsirelson", lhs, sq / std::sqrt(2.0));
  r.details = {{"A1B1", a1b1}, {"A1B2", a1b2}, {"A2B1", a2b1}, {"A2B2", a2b2}, {"sum_second_moments", sq}};
  return r;
}

/// Bell state (|00> + |11>)/sqrt(2) with the settings that saturate the bound.
inline InequalityReport tsirelson_canonical() {
  const HilbertSpace s = HilbertSpace::qubits(2);
  CVector psi = CVector::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  const State st = State::pure(s, psi);
  const Operator x = pauli(1), z = pauli(3);
  const double h = 1.0 / std::sqrt(2.0);
  auto r = tsirelson_check(st, embed(z, 0, s), embed(x, 0, s), embed(h * (z + x), 1, s), embed(h * (z - x), 1, s));
  r.params = {{"state", "bell-phi-plus"}, {"settings", "A1=Z, A2=X, B1=(Z+X)/sqrt2, B2=(Z-X)/sqrt2"}};
  return r;
}

}  // namespace qmoments::catalog
