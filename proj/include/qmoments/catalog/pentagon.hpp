#pragma once

// Five observables on a qutrit, A_a commuting with A_{a+2} (indices mod 5).
// S = 0 on |0><0| forces Q = 25 sum <A_a^3> = 0 for noncontextual values;
// quantum mechanics gives Q = 8(sqrt5 - 1).

#include "qmoments/catalog/report.hpp"
#include "qmoments/moments.hpp"
#include "qmoments/random.hpp"

#include <array>
#include <numbers>

namespace qmoments::catalog {

struct PentagonModel {
  double a = 0.0;
  cplx b, c;
  std::array<CMatrix, 5> fourier;  // A(q), q = 0..4
  std::array<Operator, 5> ops;     // A_alpha for alpha = 1..5 at index alpha-1

  const Operator& op(int alpha) const { return ops[static_cast<std::size_t>(((alpha - 1) % 5 + 5) % 5)]; }

  /// |c|^2 - 4|b|^2 cos(pi/5) and b c* + a c cos(pi/5).
  std::pair<double, double> constraint_residuals() const {
    const double cp5 = std::cos(std::numbers::pi / 5.0);
    return {std::abs(std::norm(c) - 4.0 * std::norm(b) * cp5), std::abs(b * std::conj(c) + a * c * cp5)};
  }

  /// The three independent commutator combinations fixed by [A_a, A_{a+2}] = 0.
  std::array<double, 3> fourier_commutation_residuals() const {
    const double s1 = std::sin(std::numbers::pi / 5.0), s2 = std::sin(2.0 * std::numbers::pi / 5.0);
    auto com = [](const CMatrix& x, const CMatrix& y) { return CMatrix(x * y - y * x); };
    const CMatrix& a0 = fourier[0];
    const CMatrix& a1 = fourier[1];
    const CMatrix& a2 = fourier[2];
    const CMatrix a1d = a1.adjoint(), a2d = a2.adjoint();
    return {max_abs(com(a1, a1d) * s1 - com(a2, a2d) * s2), max_abs(com(a1, a0) * s2 - com(a2, a1d) * s1),
            max_abs(com(a2, a0) * s1 - com(a2d, a1d) * s2)};
  }

  double direct_commutation_residual() const {
    double w = 0.0;
    for (int al = 1; al <= 5; ++al) w = std::max(w, max_abs(commutator(op(al), op(al + 2)).matrix()));
    return w;
  }
};

inline PentagonModel pentagon_model(double a, cplx b, cplx c) {
  const cplx i(0.0, 1.0);
  PentagonModel m;
  m.a = a;
  m.b = b;
  m.c = c;
  CMatrix f0 = CMatrix::Zero(3, 3), f1 = CMatrix::Zero(3, 3), f2 = CMatrix::Zero(3, 3);
  f0(1, 1) = f0(2, 2) = a;
  f2(1, 1) = b;
  f2(1, 2) = f2(2, 1) = i * b;
  f2(2, 2) = -b;
  f1(0, 1) = f1(1, 0) = c;
  f1(0, 2) = f1(2, 0) = i * c;
  m.fourier = {f0, f1, f2, CMatrix(f2.adjoint()), CMatrix(f1.adjoint())};
  const HilbertSpace s = HilbertSpace::single(3);
  for (int al = 1; al <= 5; ++al) {
    CMatrix x = CMatrix::Zero(3, 3);
    for (int q = 0; q < 5; ++q) x += m.fourier[static_cast<std::size_t>(q)] * std::exp(-2.0 * std::numbers::pi * i * double(al * q) / 5.0);
    x /= 5.0;
    m.ops[static_cast<std::size_t>(al - 1)] = Operator(s, x);
  }
  return m;
}

inline PentagonModel pentagon_model() {
  const double cp5 = std::cos(std::numbers::pi / 5.0);
  return pentagon_model(-1.0 / cp5, 1.0, 2.0 * std::sqrt(cp5));
}

/// sum <A_a^2>(1 + cos pi/5) + sum 2<A_a A_{a+2}>(cos pi/5 + cos 2pi/5).
inline double pentagon_s(const State& st, const PentagonModel& m) {
  const double cp5 = std::cos(std::numbers::pi / 5.0), c2p5 = std::cos(2.0 * std::numbers::pi / 5.0);
  double s = 0.0;
  for (int al = 1; al <= 5; ++al) {
    s += expect(st, m.op(al) * m.op(al)).real() * (1.0 + cp5);
    s += 2.0 * expect(st, m.op(al) * m.op(al + 2)).real() * (cp5 + c2p5);
  }
  return s;
}

inline double pentagon_q(const State& st, const PentagonModel& m) {
  double q = 0.0;
  for (int al = 1; al <= 5; ++al) q += expect(st, m.op(al).pow(3)).real();
  return 25.0 * q;
}

inline InequalityReport pentagon_test() {
  const PentagonModel m = pentagon_model();
  const auto [r1, r2] = m.constraint_residuals();
  if (r1 > 1e-12 || r2 > 1e-12) throw std::logic_error("pentagon_test: parameter constraints not met");
  const State st = State::basis(HilbertSpace::single(3), 0);
  const double s = pentagon_s(st, m);
  const double q = pentagon_q(st, m);
  const auto fc = m.fourier_commutation_residuals();
  double herm = 0.0;
  for (const auto& o : m.ops) herm = std::max(herm, o.hermiticity_residual());
  // Classical values with S = 0 have Q = 0; lhs is |Q|, rhs is that prediction.
  auto r = InequalityReport::make("qutrit-pentagon", std::abs(q), 0.0);
  r.details = {{"S", s},
               {"Q", q},
               {"Q_expected", 8.0 * (std::sqrt(5.0) - 1.0)},
               {"commutation_residual_1", fc[0]},
               {"commutation_residual_2", fc[1]},
               {"commutation_residual_3", fc[2]},
               {"direct_commutation_residual", m.direct_commutation_residual()},
               {"hermiticity_residual", herm},
               {"constraint_residual_modulus", r1},
               {"constraint_residual_phase", r2}};
  r.params = {{"a", m.a}, {"b", m.b.real()}, {"c", m.c.real()}, {"state", "|0><0|"}};
  return r;
}

/// Classical values in the span of cos(2 pi a/5 + phi) (A(0) = A(2) = 0) have sum x^3 = 0.
inline double pentagon_classical_max_q(std::uint64_t seed, std::size_t trials) {
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const double u = nd(rng), v = nd(rng);
    double q = 0.0;
    for (int al = 1; al <= 5; ++al) {
      const double th = 2.0 * std::numbers::pi * al / 5.0;
      const double x = u * std::cos(th) + v * std::sin(th);
      q += x * x * x;
    }
    worst = std::max(worst, std::abs(25.0 * q));
  }
  return worst;
}

}  // namespace qmoments::catalog
