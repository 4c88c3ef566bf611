// Operator algebra, moment tables, the M matrix and its eigen-search, moment files.

#include "support.hpp"

#include "qmoments/catalog/cfrd.hpp"
#include "qmoments/io/moment_file.hpp"
#include "qmoments/search/search.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <numeric>

using namespace qmoments;
using catalog::BigInt;

namespace {

double dist(const CMatrix& a, const CMatrix& b) { return max_abs(a - b); }

}  // namespace

// ---------------------------------------------------------------- hilbert

TEST(Hilbert, PauliAlgebra) {
  const cplx i(0.0, 1.0);
  EXPECT_LT(dist((pauli(1) * pauli(2)).matrix(), (i * pauli(3)).matrix()), 1e-15);
  EXPECT_LT(dist((pauli(2) * pauli(3)).matrix(), (i * pauli(1)).matrix()), 1e-15);
  for (int k = 1; k <= 3; ++k) {
    EXPECT_TRUE(pauli(k).is_hermitian());
    EXPECT_LT(dist(pauli(k).pow(2).matrix(), CMatrix::Identity(2, 2)), 1e-15);
  }
  EXPECT_THROW(pauli(4), std::invalid_argument);
}

TEST(Hilbert, SpaceRejectsBadDims) {
  EXPECT_THROW(HilbertSpace(std::vector<std::size_t>{}), std::invalid_argument);
  EXPECT_THROW(HilbertSpace(std::vector<std::size_t>{2, 0}), std::invalid_argument);
  EXPECT_EQ(HilbertSpace({2, 3, 4}).total_dim(), 24u);
}

TEST(Hilbert, LadderCommutator) {
  const std::size_t n = 7;
  const Operator a = ladder(n);
  const CMatrix num = (a.dagger() * a).matrix();
  for (std::size_t k = 0; k <= n; ++k) EXPECT_NEAR(num(k, k).real(), double(k), 1e-14);
  // [a, a^dag] = 1 except on the top level, which carries -n.
  const CMatrix c = commutator(a, a.dagger()).matrix();
  for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(c(k, k).real(), 1.0, 1e-14);
  EXPECT_NEAR(c(n, n).real(), -double(n), 1e-14);
  EXPECT_EQ(ladder(0).dim(), 1u);
}

TEST(Hilbert, EmbeddedOperatorsOnDifferentSlotsCommute) {
  Rng rng(7);
  const HilbertSpace s({2, 3, 2});
  for (int t = 0; t < 20; ++t) {
    const Operator x = embed(random_hermitian(2, rng), 0, s);
    const Operator y = embed(random_hermitian(3, rng), 1, s);
    const Operator z = embed(random_hermitian(2, rng), 2, s);
    EXPECT_TRUE(commute(x, y));
    EXPECT_TRUE(commute(y, z));
    EXPECT_TRUE(commute(x, z));
  }
  EXPECT_THROW(embed(pauli(1), 1, HilbertSpace({2, 3})), std::invalid_argument);
  EXPECT_THROW(embed(pauli(1), 5, HilbertSpace({2, 2})), std::exception);
}

TEST(Hilbert, KronMatchesEmbedProduct) {
  Rng rng(11);
  const Operator a = random_hermitian(2, rng), b = random_hermitian(3, rng);
  const HilbertSpace s({2, 3});
  EXPECT_LT(dist(kron(a, b).matrix(), (embed(a, 0, s) * embed(b, 1, s)).matrix()), 1e-13);
}

TEST(Hilbert, SymProductAveragesAllOrderings) {
  Rng rng(3);
  const Operator a = random_hermitian(3, rng), b = random_hermitian(3, rng), c = random_hermitian(3, rng);
  std::vector<const Operator*> v{&a, &b, &c};
  std::vector<int> perm{0, 1, 2};
  CMatrix sum = CMatrix::Zero(3, 3);
  int count = 0;
  do {
    sum += (*v[perm[0]] * *v[perm[1]] * *v[perm[2]]).matrix();
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  EXPECT_EQ(count, 6);
  const Operator s = sym_product({a, b, c});
  EXPECT_LT(dist(s.matrix(), sum / 6.0), 1e-13);
  EXPECT_TRUE(s.is_hermitian());
  // Order two reduces to the anticommutator.
  EXPECT_LT(dist(sym_product({a, b}).matrix(), anticommutator(a, b).matrix() / 2.0), 1e-13);
}

TEST(Hilbert, PureAndDensityExpectationsAgree) {
  Rng rng(5);
  const HilbertSpace s({2, 2});
  for (int t = 0; t < 20; ++t) {
    const State p = random_pure_state(s, rng);
    const State m = State::mixed(s, p.density());
    const Operator o = random_hermitian(4, rng);
    const Operator op(s, o.matrix());
    EXPECT_NEAR(std::abs(expect(p, op) - expect(m, op)), 0.0, 1e-13);
  }
}

TEST(Hilbert, StateValidation) {
  const HilbertSpace s = HilbertSpace::qubits(1);
  CVector v(2);
  v << 1.0, 1.0;
  EXPECT_THROW(State::pure(s, v), std::invalid_argument);
  EXPECT_NO_THROW(State::normalized(s, v));
  CMatrix rho(2, 2);
  rho << 1.2, 0.0, 0.0, -0.2;
  EXPECT_THROW(State::mixed(s, rho), std::invalid_argument);
  rho << 0.5, 0.0, 0.0, 0.4;
  EXPECT_THROW(State::mixed(s, rho), std::invalid_argument);
  EXPECT_THROW(State::normalized(s, CVector::Zero(2)), std::invalid_argument);
}

TEST(Hilbert, MixtureIsConvex) {
  Rng rng(9);
  const HilbertSpace s = HilbertSpace::qubits(2);
  const State a = random_pure_state(s, rng), b = random_mixed_state(s, rng);
  const State m = mixture(0.3, a, b);
  EXPECT_NEAR(m.density().trace().real(), 1.0, 1e-14);
  const Operator o(s, random_hermitian(4, rng).matrix());
  EXPECT_NEAR(expect(m, o).real(), 0.3 * expect(a, o).real() + 0.7 * expect(b, o).real(), 1e-13);
  EXPECT_THROW(mixture(1.5, a, b), std::invalid_argument);
}

TEST(Hilbert, LocalProductMatchesDense) {
  Rng rng(21);
  const HilbertSpace s({3, 2, 3});
  const CVector psi = random_unit_vector(18, rng);
  const Operator x = random_hermitian(3, rng), y = random_hermitian(2, rng), z = random_hermitian(3, rng);
  std::vector<std::pair<std::size_t, CMatrix>> f{{0, x.matrix()}, {1, y.matrix()}, {2, z.matrix()}};
  const cplx fast = expect_local_product(s, psi, f);
  const cplx dense = psi.dot((embed(x, 0, s) * embed(y, 1, s) * embed(z, 2, s)).matrix() * psi);
  EXPECT_LT(std::abs(fast - dense), 1e-13);
}

TEST(Hilbert, DenseCapEnforced) {
  EXPECT_THROW(Operator(HilbertSpace({65, 65}), CMatrix::Zero(1, 1)), std::invalid_argument);
}

// ---------------------------------------------------------------- moments

TEST(Moments, LabelParse) {
  EXPECT_EQ(Label::parse("A:2:3"), (Label{"A", 2, 3}));
  EXPECT_EQ(Label::parse("B"), (Label{"B", 1, 1}));
  EXPECT_EQ(Label::parse("C:4"), (Label{"C", 4, 1}));
  EXPECT_THROW(Label::parse(":1:1"), std::invalid_argument);
  EXPECT_THROW(Label::parse("A:x"), std::invalid_argument);
}

TEST(Moments, ObservableSetRejectsNoncommutingMeasurablePair) {
  const HilbertSpace s = HilbertSpace::single(2);
  // Same observer and setting: must commute.
  EXPECT_THROW(ObservableSet(s, {{{"A", 1, 1}, pauli(1)}, {{"A", 1, 2}, pauli(3)}}), std::invalid_argument);
  // Different observers: must commute.
  EXPECT_THROW(ObservableSet(s, {{{"A", 1, 1}, pauli(1)}, {{"B", 1, 1}, pauli(3)}}), std::invalid_argument);
  // Different settings of one observer: fine.
  const ObservableSet ok(s, {{{"A", 1, 1}, pauli(1)}, {{"A", 2, 1}, pauli(3)}});
  EXPECT_FALSE(ok.commutes(0, 1));
  EXPECT_FALSE(ok.jointly_measurable(0, 1));
  EXPECT_THROW(ObservableSet(s, {{{"A", 1, 1}, pauli(1)}, {{"A", 1, 1}, pauli(1)}}), std::invalid_argument);
  CMatrix up = CMatrix::Zero(2, 2);
  up(0, 1) = 1.0;
  const Operator nonherm(s, up);
  EXPECT_THROW(ObservableSet(s, {{{"A", 1, 1}, nonherm}}), std::invalid_argument);
}

TEST(Moments, CorrelationMatrixMatchesDefinition) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto [st, obs] = qmtest::unconstrained_instance(seed);
    const MomentTensor c = correlation_matrix(st, obs);
    const auto n = obs.size();
    const CMatrix rho = st.density();
    for (std::size_t i = 0; i < n; ++i) {
      const double mi = (rho * obs.op(i).matrix()).trace().real();
      EXPECT_NEAR(c.means().at(obs.label(i)), mi, 1e-13);
      for (std::size_t j = 0; j < n; ++j) {
        const double mj = (rho * obs.op(j).matrix()).trace().real();
        const CMatrix prod = obs.op(i).matrix() * obs.op(j).matrix();
        const double sym = 0.5 * (rho * (prod + prod.adjoint())).trace().real();
        EXPECT_NEAR(c(i, j), sym - mi * mj, 1e-12);
      }
    }
  }
}

TEST(Moments, WeakPositivityProperty) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto [st, obs] = qmtest::unconstrained_instance(derive_seed(99, seed));
    const auto psd = psd_check(correlation_matrix(st, obs));
    EXPECT_TRUE(psd.is_psd) << "seed " << seed << " min eigenvalue " << psd.eigenvalues.front();
  }
}

TEST(Moments, ThirdMomentsAreSymmetricAndMatchBruteForce) {
  const auto in = qmtest::random_setting_instance(17);
  const auto& obs = *in.obs;
  const MomentTensor t = third_moments(in.state, obs);
  const auto means = first_moments(in.state, obs);
  const std::size_t n = obs.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        EXPECT_DOUBLE_EQ(t(i, j, k), t(k, i, j));
        const Operator xi = obs.op(i) - means[i] * Operator::identity(obs.space());
        const Operator xj = obs.op(j) - means[j] * Operator::identity(obs.space());
        const Operator xk = obs.op(k) - means[k] * Operator::identity(obs.space());
        const Operator sum = xi * xj * xk + xi * xk * xj + xj * xi * xk + xj * xk * xi + xk * xi * xj + xk * xj * xi;
        EXPECT_NEAR(t(i, j, k), expect(in.state, sum).real() / 6.0, 1e-12);
      }
}

TEST(Moments, KernelSplitWithoutKernelVariablesIsFullSymmetrization) {
  const auto in = qmtest::random_setting_instance(23);
  const std::vector<bool> none(in.obs->size(), false);
  const MomentTensor a = third_moments(in.state, *in.obs);
  const MomentTensor b = third_moments(in.state, *in.obs, Convention::kernel_split, &none);
  for (const auto& [k, v] : a.table()) EXPECT_NEAR(v, b.get(k), 1e-13);
  EXPECT_THROW(third_moments(in.state, *in.obs, Convention::kernel_split), std::invalid_argument);
}

TEST(Moments, KernelSplitSingleVariable) {
  // One V among commuting operators: {V, {Y, Y'}}/4 equals the full symmetrization.
  const HilbertSpace s = HilbertSpace::single(3);
  Rng rng(4);
  const CMatrix u = random_unitary_matrix(3, rng);
  auto diag_op = [&](double a, double b, double c) {
    RVector d(3);
    d << a, b, c;
    return Operator(s, CMatrix(u * d.cast<cplx>().asDiagonal() * u.adjoint()));
  };
  const ObservableSet obs(s, {{{"A", 1, 1}, diag_op(1, 2, 3)}, {{"A", 1, 2}, diag_op(-1, 0.5, 2)}, {{"A", 1, 3}, diag_op(0, 1, -2)}});
  const State st = random_mixed_state(s, rng);
  const std::vector<bool> v{true, false, false};
  const auto a = third_moments(st, obs);
  const auto b = third_moments(st, obs, Convention::kernel_split, &v);
  for (const auto& [k, val] : a.table()) EXPECT_NEAR(val, b.get(k), 1e-12);
}

TEST(Moments, FourthMomentOfPaulis) {
  const State st = State::maximally_mixed(HilbertSpace::single(2));
  EXPECT_NEAR(fourth_moment(st, pauli(3), 4), 1.0, 1e-15);
  EXPECT_NEAR(fourth_moment(st, 2.0 * pauli(3), 2), 4.0, 1e-15);
  EXPECT_THROW(fourth_moment(st, pauli(3), 3), std::invalid_argument);
}

TEST(Moments, TensorJsonRoundTrip) {
  const auto in = qmtest::random_setting_instance(31);
  for (const MomentTensor& t : {correlation_matrix(in.state, *in.obs), third_moments(in.state, *in.obs)}) {
    const MomentTensor back = MomentTensor::from_json(t.to_json());
    EXPECT_EQ(back.order(), t.order());
    EXPECT_EQ(back.labels(), t.labels());
    for (const auto& [k, v] : t.table()) EXPECT_DOUBLE_EQ(back.get(k), v);
    for (const auto& [l, m] : t.means()) EXPECT_DOUBLE_EQ(back.means().at(l), m);
  }
  EXPECT_EQ(convention_from_string(to_string(Convention::kernel_split)), Convention::kernel_split);
  EXPECT_THROW(convention_from_string("other"), std::invalid_argument);
}

TEST(Moments, KernelBasisFindsLinearDependence) {
  // A1 = A2 = sigma3 on an eigenstate of sigma1: C = [[1, 1], [1, 1]].
  const HilbertSpace s = HilbertSpace::single(2);
  const ObservableSet obs(s, {{{"A", 1, 1}, pauli(3)}, {{"A", 2, 1}, pauli(3)}});
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto k = kernel_basis(correlation_matrix(State::pure(s, plus), obs));
  ASSERT_EQ(k.size(), 1u);
  EXPECT_NEAR(std::abs(k[0](0) + k[0](1)), 0.0, 1e-12);
  RMatrix neg(2, 2);
  neg << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(kernel_basis(neg), std::invalid_argument);
}

// ---------------------------------------------------------------- M matrix

TEST(MMatrix, BareissMatchesContinuant) {
  const auto cont = catalog::det4m_continuants(40);
  for (std::size_t n = 0; n <= 40; ++n) EXPECT_EQ(catalog::bareiss_determinant(catalog::m4_integer_matrix(n)), cont[n]) << "N = " << n;
}

TEST(MMatrix, BareissOnKnownMatrices) {
  std::vector<std::vector<BigInt>> a{{2, -1, 0}, {-1, 2, -1}, {0, -1, 2}};
  EXPECT_EQ(catalog::bareiss_determinant(a), BigInt(4));
  // A zero leading pivot forces a row swap.
  std::vector<std::vector<BigInt>> b{{0, 1}, {1, 0}};
  EXPECT_EQ(catalog::bareiss_determinant(b), BigInt(-1));
  std::vector<std::vector<BigInt>> c{{1, 2}, {2, 4}};
  EXPECT_EQ(catalog::bareiss_determinant(c), BigInt(0));
}

TEST(MMatrix, ExactDeterminantAtTen) {
  const auto m = catalog::m_matrix(10);
  EXPECT_EQ(m.det4m_string(), "-21772303951061875");
  for (std::size_t n = 0; n <= 9; ++n) EXPECT_GT(catalog::m_matrix(n).det4m_sign(), 0) << "N = " << n;
}

TEST(MMatrix, DeterminantSignMatchesEigenvalueParity) {
  // sign det = (-1)^(number of negative eigenvalues)
  for (std::size_t n = 0; n <= 60; ++n) {
    const auto m = catalog::m_matrix(n);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(m.dense(), Eigen::EigenvaluesOnly);
    const auto negatives = (es.eigenvalues().array() < 0.0).count();
    EXPECT_EQ(m.det4m_sign(), negatives % 2 ? -1 : 1) << "N = " << n;
  }
}

TEST(MMatrix, EntriesAndSmallCases) {
  const auto m = catalog::m_matrix(0);
  EXPECT_EQ(m.size(), 1u);
  EXPECT_DOUBLE_EQ(m.diag(0), 0.25);
  const auto m3 = catalog::m_matrix(3);
  EXPECT_DOUBLE_EQ(m3.diag(3), 12.25);
  EXPECT_DOUBLE_EQ(m3.offdiag(2), -4.5);
  EXPECT_THROW(catalog::m_bands(catalog::kMaxTridiagonalDim), std::invalid_argument);
}

// ---------------------------------------------------------------- search

TEST(Tridiagonal, SturmCountMatchesDenseSpectrum) {
  Rng rng(13);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index n = 2 + t;
    RVector d(n), e(n - 1);
    for (auto& x : d) x = nd(rng);
    for (auto& x : e) x = nd(rng);
    RMatrix dense = d.asDiagonal();
    for (Eigen::Index i = 0; i + 1 < n; ++i) dense(i, i + 1) = dense(i + 1, i) = e(i);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(dense, Eigen::EigenvaluesOnly);
    for (double x : {-1.0, 0.0, 0.37, 2.0}) {
      const auto expected = static_cast<std::size_t>((es.eigenvalues().array() < x).count());
      EXPECT_EQ(search::sturm_count(d, e, x), expected);
    }
  }
}

TEST(Tridiagonal, EigenpairsMatchDenseSolver) {
  Rng rng(17);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index n = 1 + t;
    RVector d(n), e(std::max<Eigen::Index>(n - 1, 0));
    for (auto& x : d) x = nd(rng);
    for (auto& x : e) x = nd(rng);
    RMatrix dense = d.asDiagonal();
    for (Eigen::Index i = 0; i + 1 < n; ++i) dense(i, i + 1) = dense(i + 1, i) = e(i);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(dense);
    const std::size_t k = static_cast<std::size_t>(t) % static_cast<std::size_t>(n);
    const auto p = search::tridiagonal_eigenpair(d, e, k);
    EXPECT_NEAR(p.value, es.eigenvalues()(static_cast<Eigen::Index>(k)), 1e-12 * std::max(1.0, dense.norm()));
    EXPECT_NEAR(p.vector.norm(), 1.0, 1e-12);
    EXPECT_LT((dense * p.vector - p.value * p.vector).norm(), 1e-10 * dense.norm());
  }
}

TEST(Tridiagonal, SolveAgainstDense) {
  Rng rng(29);
  std::normal_distribution<double> nd(0.0, 1.0);
  const Eigen::Index n = 12;
  RVector d(n), e(n - 1), b(n);
  for (auto& x : d) x = nd(rng);
  for (auto& x : e) x = nd(rng);
  for (auto& x : b) x = nd(rng);
  RMatrix dense = d.asDiagonal();
  for (Eigen::Index i = 0; i + 1 < n; ++i) dense(i, i + 1) = dense(i + 1, i) = e(i);
  dense.diagonal().array() -= 0.3;
  const RVector x = search::tridiagonal_solve(d, e, 0.3, b);
  EXPECT_LT((dense * x - b).norm(), 1e-10 * b.norm());
}

TEST(Search, MinEigenpairAgainstDenseSolver) {
  for (std::size_t n : {0u, 1u, 5u, 10u, 37u, 150u, 400u}) {
    const auto r = search::min_eigenpair(n);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(catalog::m_matrix(n).dense());
    EXPECT_NEAR(r.lambda_min, es.eigenvalues()(0), 1e-11 * std::max(1.0, r.matrix_norm)) << "N = " << n;
    RVector v = es.eigenvectors().col(0);
    search::fix_sign(v);
    EXPECT_LT((r.vector - v).norm(), 1e-6) << "N = " << n;
    EXPECT_LE(r.residual, 1e-10 * r.matrix_norm);
  }
}

TEST(Search, CutoffTenValues) {
  const auto r = search::min_eigenpair(10);
  EXPECT_NEAR(r.lambda_min, -0.00287931, 1e-8);
  const auto& z = catalog::reference_z();
  ASSERT_EQ(r.vector.size(), 11);
  for (Eigen::Index i = 0; i < 11; ++i) EXPECT_NEAR(r.vector(i), z[static_cast<std::size_t>(i)], 1e-5);
  EXPECT_NEAR(search::violation_margin(std::vector<double>(r.vector.data(), r.vector.data() + 11)), r.lambda_min, 1e-14);
}

TEST(Search, ViolationMarginIsQuadraticForm) {
  Rng rng(37);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (std::size_t len = 1; len < 15; ++len) {
    std::vector<double> z(len);
    for (auto& v : z) v = nd(rng);
    const RMatrix m = catalog::m_matrix(len - 1).dense();
    const RVector zv = Eigen::Map<const RVector>(z.data(), static_cast<Eigen::Index>(len));
    EXPECT_NEAR(search::violation_margin(z), zv.dot(m * zv), 1e-12 * (1.0 + zv.squaredNorm() * m.norm()));
  }
  EXPECT_THROW(search::violation_margin({}), std::invalid_argument);
}

TEST(Search, SweepIsMonotoneAndFlipsAtTen) {
  const auto t = search::cutoff_sweep(60);
  EXPECT_EQ(t.first_negative_determinant(), 10);
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LE(t.rows[i].lambda_min, t.rows[i - 1].lambda_min + 1e-12);
  // Interlacing: lambda_min < 0 from the first negative determinant on.
  for (const auto& r : t.rows) EXPECT_EQ(r.lambda_min < 0.0, r.cutoff >= 10) << "N = " << r.cutoff;
  EXPECT_EQ(t.to_csv().substr(0, 23), "N,det4M_sign,lambda_min");
}

TEST(Search, LargeCutoff) {
  const auto r = search::min_eigenpair(3000);
  EXPECT_NEAR(r.lambda_min, -0.093, 1e-3);
  EXPECT_LE(r.residual, 1e-10 * r.matrix_norm);
}

// ---------------------------------------------------------------- moment files

TEST(MomentFile, RoundTripPreservesEverything) {
  const auto in = qmtest::random_setting_instance(41);
  const auto j = io::moment_file_json(in.state, *in.obs);
  const auto f = io::parse_moment_file(nlohmann::json::parse(j.dump()));
  ASSERT_TRUE(f.has_operators());
  ASSERT_TRUE(f.state.has_value());
  const ObservableSet back = f.observable_set();
  ASSERT_EQ(back.size(), in.obs->size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back.label(i), in.obs->label(i));
    EXPECT_LT(dist(back.op(i).matrix(), in.obs->op(i).matrix()), 1e-15);
  }
  EXPECT_LT(dist(f.state->density(), in.state.density()), 1e-15);
  ASSERT_TRUE(f.second && f.third);
  const auto c = correlation_matrix(in.state, *in.obs);
  for (const auto& [k, v] : c.table()) EXPECT_DOUBLE_EQ(f.second->get(k), v);
}

TEST(MomentFile, MalformedInputsAreRejected) {
  using nlohmann::json;
  const std::vector<std::string> bad = {
      R"([1, 2])",
      R"({})",
      R"({"observables": [{"setting": 1}]})",
      R"({"observables": [{"observer": "A", "matrix": [[1, 0], [0]]}]})",
      R"({"observables": [{"observer": "A", "matrix": [[[1, 0, 0], 0], [0, 1]]}]})",
      R"({"space": [2], "observables": [{"observer": "A", "matrix": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}]})",
      R"({"observables": [{"observer": "A"}, {"observer": "A"}]})",
      R"({"space": [2, -1], "observables": [{"observer": "A"}]})",
      R"({"observables": [{"observer": "A", "matrix": [[1, 0], [0, -1]]}], "state": {"vector": [1, 0, 0]}})",
      R"({"observables": [{"observer": "A", "matrix": [[1, 0], [0, -1]]}], "state": {"weird": 1}})",
  };
  for (const auto& s : bad) EXPECT_THROW(io::parse_moment_file(json::parse(s)), io::InputError) << s;
  EXPECT_THROW(io::read_moment_file("/nonexistent/file.json"), io::InputError);
}

TEST(MomentFile, ComplexEntriesAndObservableSet) {
  const auto f = io::parse_moment_file(nlohmann::json::parse(
      R"({"observables": [{"observer": "A", "setting": 1, "index": 1, "matrix": [[0, [0, -1]], [[0, 1], 0]]}],
          "state": {"vector": [1, [0, 1]]}})"));
  const auto obs = f.observable_set();
  EXPECT_LT(dist(obs.op(0).matrix(), pauli(2).matrix()), 1e-15);
  // (|0> + i|1>)/sqrt2 is the +1 eigenstate of sigma2.
  EXPECT_NEAR(expect(*f.state, obs.op(0)).real(), 1.0, 1e-14);
}
