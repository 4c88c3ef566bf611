#pragma once

// CFRD-type moment inequalities with complex observables A = A^r + i A^i.
// Every correlator is expanded into products of one real component per
// party, so each average only involves jointly measurable operators.

#include "qmoments/catalog/report.hpp"
#include "qmoments/hilbert.hpp"

#include <array>
#include <vector>

namespace qmoments::catalog {

struct ComplexObservable {
  Operator re;
  Operator im;

  static ComplexObservable zero(const HilbertSpace& s) { return {Operator::zero(s), Operator::zero(s)}; }
  /// |X|^2 = (X X^dag + X^dag X) / 2 = re^2 + im^2
  Operator modulus_squared() const { return re * re + im * im; }
};

/// sigma1 + i sigma2 on one qubit slot, i.e. 2|0><1|.
inline ComplexObservable raising_observable(std::size_t slot, const HilbertSpace& s) {
  return {embed(pauli(1), slot, s), embed(pauli(2), slot, s)};
}

struct Factor {
  const ComplexObservable* x;
  bool dagger = false;
};

/// <prod_k x_k^(dagger_k)> through the real expansion.
inline cplx expanded_correlator(const State& state, const std::vector<Factor>& fs) {
  const std::size_t k = fs.size();
  const HilbertSpace& s = state.space();
  cplx total = 0.0;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    cplx coef = 1.0;
    Operator prod = Operator::identity(s);
    for (std::size_t t = 0; t < k; ++t) {
      if (mask >> t & 1u) {
        coef *= fs[t].dagger ? cplx(0.0, -1.0) : cplx(0.0, 1.0);
        prod = prod * fs[t].x->im;
      } else {
        prod = prod * fs[t].x->re;
      }
    }
    const cplx e = expect(state, prod);
    if (std::abs(e.imag()) > 1e-10 * std::max(1.0, std::abs(e.real())))
      throw std::runtime_error("expanded_correlator: measurable term has imaginary expectation " + std::to_string(e.imag()));
    total += coef * e.real();
  }
  return total;
}

inline void require_cross_commuting(const std::vector<const ComplexObservable*>& x, const std::vector<const ComplexObservable*>& y,
                                    const char* who) {
  for (const auto* a : x)
    for (const auto* b : y)
      for (const Operator* p : {&a->re, &a->im})
        for (const Operator* q : {&b->re, &b->im})
          if (!commute(*p, *q)) throw std::invalid_argument(std::string(who) + ": operators of different observers must commute");
}

/// Eight-setting two-party form with up to four complex settings per side.
inline InequalityReport cfrd_two_party(const State& state, std::vector<ComplexObservable> a, std::vector<ComplexObservable> b) {
  if (a.size() > 4 || b.size() > 4) throw std::invalid_argument("cfrd_two_party: at most four complex settings per side");
  while (a.size() < 4) a.push_back(ComplexObservable::zero(state.space()));
  while (b.size() < 4) b.push_back(ComplexObservable::zero(state.space()));
  std::vector<const ComplexObservable*> pa, pb;
  for (const auto& x : a) pa.push_back(&x);
  for (const auto& x : b) pb.push_back(&x);
  require_cross_commuting(pa, pb, "cfrd_two_party");

  struct Term {
    double sign;
    int al;
    bool da;
    int be;
    bool db;
  };
  const std::array<std::vector<Term>, 4> correlators{{
      {{1, 0, false, 0, true}, {1, 1, false, 1, true}, {1, 2, false, 2, true}, {1, 3, false, 3, true}},
      {{1, 0, false, 1, false}, {-1, 1, false, 0, false}, {1, 2, true, 3, true}, {-1, 3, true, 2, true}},
      {{1, 0, false, 2, false}, {-1, 2, false, 0, false}, {1, 3, true, 1, true}, {-1, 1, true, 3, true}},
      {{1, 0, false, 3, false}, {-1, 3, false, 0, false}, {1, 1, true, 2, true}, {-1, 2, true, 1, true}},
  }};
  double lhs = 0.0;
  std::map<std::string, double> details;
  for (std::size_t c = 0; c < 4; ++c) {
    cplx v = 0.0;
    for (const auto& t : correlators[c])
      v += t.sign * expanded_correlator(state, {{&a[static_cast<std::size_t>(t.al)], t.da}, {&b[static_cast<std::size_t>(t.be)], t.db}});
    details["correlator_" + std::to_string(c) + "_abs2"] = std::norm(v);
    lhs += std::norm(v);
  }
  Operator sa = Operator::zero(state.space()), sb = Operator::zero(state.space());
  for (const auto& x : a) sa = sa + x.modulus_squared();
  for (const auto& x : b) sb = sb + x.modulus_squared();
  const double rhs = expect(state, sa * sb).real();
  auto r = InequalityReport::make("cfrd-two-party", lhs, rhs);
  r.details = std::move(details);
  return r;
}

/// <A1B1 - A2B2>^2 + <A1B2 + A2B1>^2 <= <(A1^2 + A2^2)(B1^2 + B2^2)> for real observables.
inline InequalityReport cfrd_real_pair(const State& state, const Operator& a1, const Operator& a2, const Operator& b1,
                                       const Operator& b2) {
  for (const Operator* x : {&a1, &a2})
    for (const Operator* y : {&b1, &b2})
      if (!commute(*x, *y)) throw std::invalid_argument("cfrd_real_pair: A and B operators must commute");
  auto e = [&](const Operator& x) { return expect(state, x).real(); };
  const double t1 = e(a1 * b1) - e(a2 * b2);
  const double t2 = e(a1 * b2) + e(a2 * b1);
  const double rhs = e((a1 * a1 + a2 * a2) * (b1 * b1 + b2 * b2));
  auto r = InequalityReport::make("cfrd-real-pair", t1 * t1 + t2 * t2, rhs);
  r.details = {{"term_1", t1}, {"term_2", t2}};
  return r;
}

/// |<ABC>|^2 <= <|AB|^2><|C|^2>
inline InequalityReport tripartite_cfrd(const State& state, const ComplexObservable& a, const ComplexObservable& b,
                                        const ComplexObservable& c) {
  require_cross_commuting({&a}, {&b, &c}, "tripartite_cfrd");
  require_cross_commuting({&b}, {&c}, "tripartite_cfrd");
  const cplx abc = expanded_correlator(state, {{&a, false}, {&b, false}, {&c, false}});
  const double ab2 = expect(state, a.modulus_squared() * b.modulus_squared()).real();
  const double c2 = expect(state, c.modulus_squared()).real();
  auto r = InequalityReport::make("cfrd-tripartite", std::norm(abc), ab2 * c2);
  r.details = {{"ABC_re", abc.real()}, {"ABC_im", abc.imag()}, {"AB_mod2", ab2}, {"C_mod2", c2}};
  return r;
}

/// |<ABCD>|^2 <= <|AB|^2><|CD|^2>
inline InequalityReport quadripartite_cfrd(const State& state, const ComplexObservable& a, const ComplexObservable& b,
                                           const ComplexObservable& c, const ComplexObservable& d) {
  require_cross_commuting({&a}, {&b, &c, &d}, "quadripartite_cfrd");
  require_cross_commuting({&b}, {&c, &d}, "quadripartite_cfrd");
  require_cross_commuting({&c}, {&d}, "quadripartite_cfrd");
  const cplx abcd = expanded_correlator(state, {{&a, false}, {&b, false}, {&c, false}, {&d, false}});
  const double ab2 = expect(state, a.modulus_squared() * b.modulus_squared()).real();
  const double cd2 = expect(state, c.modulus_squared() * d.modulus_squared()).real();
  auto r = InequalityReport::make("cfrd-quadripartite", std::norm(abcd), ab2 * cd2);
  r.details = {{"ABCD_re", abcd.real()}, {"ABCD_im", abcd.imag()}, {"AB_mod2", ab2}, {"CD_mod2", cd2}};
  return r;
}

inline InequalityReport ghz_tripartite_cfrd() {
  const State st = [] {
    const HilbertSpace s = HilbertSpace::qubits(3);
    CVector v = CVector::Zero(8);
    v(0) = v(7) = 1.0 / std::sqrt(2.0);
    return State::pure(s, v);
  }();
  const HilbertSpace& s = st.space();
  auto r = tripartite_cfrd(st, raising_observable(0, s), raising_observable(1, s), raising_observable(2, s));
  r.params = {{"state", "ghz-3"}, {"observables", "sigma1 + i sigma2"}};
  return r;
}

inline InequalityReport ghz_quadripartite_cfrd() {
  const HilbertSpace s = HilbertSpace::qubits(4);
  CVector v = CVector::Zero(16);
  v(0) = v(15) = 1.0 / std::sqrt(2.0);
  const State st = State::pure(s, v);
  auto r = quadripartite_cfrd(st, raising_observable(0, s), raising_observable(1, s), raising_observable(2, s),
                              raising_observable(3, s));
  r.params = {{"state", "ghz-4"}, {"observables", "sigma1 + i sigma2"}};
  return r;
}

// ---------------------------------------------------------------------------
// Oscillator states sum_n z_n |n...n>

/// Reference coefficients (six significant figures) of the violating state at cutoff 10.
inline const std::vector<double>& reference_z() {
  static const std::vector<double> z{0.828979, 0.419264, 0.26503,   0.181928,  0.129563,  0.0934879,
                                     0.0671523, 0.0471264, 0.0314302, 0.0188364, 0.00854237};
  return z;
}

struct NormalizedZ {
  std::vector<double> z;
  double norm_residual = 0.0;  // |norm - 1| before rescaling
  bool rescaled = false;
};

inline NormalizedZ normalize_z(const std::vector<double>& z) {
  if (z.empty()) throw std::invalid_argument("z must be non-empty");
  double n2 = 0.0;
  for (double v : z) {
    if (!std::isfinite(v)) throw std::invalid_argument("z has non-finite entries");
    n2 += v * v;
  }
  if (n2 == 0.0) throw std::invalid_argument("z is the zero vector");
  NormalizedZ r;
  const double n = std::sqrt(n2);
  r.norm_residual = std::abs(n - 1.0);
  r.rescaled = r.norm_residual > 1e-12;
  r.z = z;
  if (r.rescaled)
    for (double& v : r.z) v /= n;
  return r;
}

/// sum n^2 z_n z_{n-1}
inline double fock_abcd_closed(const std::vector<double>& z) {
  double s = 0.0;
  for (std::size_t n = 1; n < z.size(); ++n) s += double(n * n) * z[n] * z[n - 1];
  return s;
}

/// sum z_n^2 (n + 1/2)^2
inline double fock_ab_mod2_closed(const std::vector<double>& z) {
  double s = 0.0;
  for (std::size_t n = 0; n < z.size(); ++n) s += z[n] * z[n] * (n + 0.5) * (n + 0.5);
  return s;
}

/// Position-like and momentum-like parts of the annihilation operator: a = q1 + i q2.
inline std::pair<CMatrix, CMatrix> fock_quadratures(std::size_t cutoff) {
  const CMatrix a = ladder(cutoff).matrix();
  const CMatrix ad = a.adjoint();
  return {(a + ad) / 2.0, (a - ad) / cplx(0.0, 2.0)};
}

struct FockRoute {
  cplx abcd;
  double ab_mod2 = 0.0;
  double cd_mod2 = 0.0;
};

/// Matrix-free evaluation on `modes` truncated oscillators with the given cutoff.
inline FockRoute fock_operator_route(const std::vector<double>& z, std::size_t cutoff, std::size_t modes = 4) {
  if (cutoff + 1 < z.size() + 1) throw std::invalid_argument("fock_operator_route: cutoff below len(z) leaves no guard level");
  const HilbertSpace s(std::vector<std::size_t>(modes, cutoff + 1));
  CVector psi = CVector::Zero(static_cast<Eigen::Index>(s.total_dim()));
  std::size_t diag_stride = 0;
  for (std::size_t k = 0, p = 1; k < modes; ++k, p *= cutoff + 1) diag_stride += p;
  for (std::size_t n = 0; n < z.size(); ++n) psi(static_cast<Eigen::Index>(n * diag_stride)) = z[n];
  const auto [q1, q2] = fock_quadratures(cutoff);
  FockRoute r;
  r.abcd = 0.0;
  for (unsigned mask = 0; mask < (1u << modes); ++mask) {
    std::vector<std::pair<std::size_t, CMatrix>> locals;
    cplx coef = 1.0;
    for (std::size_t k = 0; k < modes; ++k) {
      const bool im = mask >> k & 1u;
      locals.emplace_back(k, im ? q2 : q1);
      if (im) coef *= cplx(0.0, 1.0);
    }
    r.abcd += coef * expect_local_product(s, psi, locals).real();
  }
  const CMatrix mod2 = q1 * q1 + q2 * q2;
  std::vector<std::pair<std::size_t, CMatrix>> ab{{0, mod2}, {1, mod2}};
  r.ab_mod2 = expect_local_product(s, psi, ab).real();
  if (modes >= 4) {
    std::vector<std::pair<std::size_t, CMatrix>> cd{{2, mod2}, {3, mod2}};
    r.cd_mod2 = expect_local_product(s, psi, cd).real();
  }
  return r;
}

/// Symmetric reduction <ABCD> <= <|AB|^2> for sum z_n |nnnn>; margin = z^T M z.
inline InequalityReport quadripartite_cfrd_fock(const std::vector<double>& z_in, std::size_t cutoff = 0) {
  const NormalizedZ nz = normalize_z(z_in);
  const auto& z = nz.z;
  if (cutoff == 0) cutoff = z.size();
  if (cutoff < z.size()) throw std::invalid_argument("quadripartite_cfrd_fock: cutoff must be at least len(z)");
  const double abcd = fock_abcd_closed(z);
  const double ab2 = fock_ab_mod2_closed(z);
  const FockRoute op = fock_operator_route(z, cutoff);
  auto r = InequalityReport::make("cfrd-quadripartite-fock", abcd, ab2);
  r.details = {{"ABCD_closed", abcd},
               {"ABCD_operator", op.abcd.real()},
               {"ABCD_operator_imag", op.abcd.imag()},
               {"AB_mod2_closed", ab2},
               {"AB_mod2_operator", op.ab_mod2},
               {"CD_mod2_operator", op.cd_mod2},
               {"route_difference", std::max({std::abs(abcd - op.abcd.real()), std::abs(op.abcd.imag()),
                                              std::abs(ab2 - op.ab_mod2), std::abs(ab2 - op.cd_mod2)})},
               {"full_lhs", abcd * abcd},
               {"full_rhs", op.ab_mod2 * op.cd_mod2},
               {"z_norm_residual", nz.norm_residual},
               {"normalized_input", nz.rescaled ? 1.0 : 0.0}};
  r.params = {{"length", z.size()}, {"cutoff", cutoff}};
  return r;
}

/// (sum z_n z_{n-1} n^{3/2})^2 <= sum z_n^2 (n+1/2)^2 * sum z_n^2 (n+1/2)
inline InequalityReport oscillator_tripartite_bound(const std::vector<double>& z_in) {
  for (double v : z_in)
    if (v < 0.0) throw std::invalid_argument("oscillator_tripartite_bound: entries must be nonnegative");
  const NormalizedZ nz = normalize_z(z_in);
  const auto& z = nz.z;
  double s = 0.0, r2 = 0.0, r1 = 0.0;
  for (std::size_t n = 0; n < z.size(); ++n) {
    if (n > 0) s += z[n] * z[n - 1] * std::pow(double(n), 1.5);
    r2 += z[n] * z[n] * (n + 0.5) * (n + 0.5);
    r1 += z[n] * z[n] * (n + 0.5);
  }
  auto r = InequalityReport::make("cfrd-tripartite-oscillator", s * s, r2 * r1, 1e-12);
  r.details = {{"ABC", s}, {"AB_mod2", r2}, {"C_mod2", r1}, {"z_norm_residual", nz.norm_residual}};
  return r;
}

}  // namespace qmoments::catalog
