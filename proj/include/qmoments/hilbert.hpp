#pragma once

// Dense operator algebra on finite tensor-product Hilbert spaces.
//
// Operators and states are immutable value types wrapping Eigen matrices.
// Basis convention: the computational basis of a qubit is (|+>, |->) =
// (index 0, index 1), so sigma_1 = [[0,1],[1,0]], sigma_2 = [[0,-i],[i,0]],
// sigma_3 = diag(1,-1). Tensor factors are ordered slowest-index first, i.e.
// kron(a, b) has the index of `a` as the outer index.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qmoments {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Largest total dimension for which a dense Operator may be built.
inline constexpr std::size_t kMaxDenseDim = 4096;

/// Default absolute tolerance for Hermiticity / commutation checks,
/// measured relative to the largest absolute matrix entry.
inline constexpr double kExactTol = 1e-12;

/// Raised when a numerical procedure cannot reach its contract.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HilbertSpace {
 public:
  HilbertSpace() : dims_{1}, total_{1} {}

  explicit HilbertSpace(std::vector<std::size_t> factor_dims)
      : dims_(std::move(factor_dims)) {
    if (dims_.empty()) throw std::invalid_argument("HilbertSpace: no tensor factors");
    total_ = 1;
    for (std::size_t d : dims_) {
      if (d < 1) throw std::invalid_argument("HilbertSpace: factor dimension must be positive");
      total_ *= d;
    }
  }

  static HilbertSpace qubits(std::size_t n) { return HilbertSpace(std::vector<std::size_t>(n, 2)); }
  static HilbertSpace single(std::size_t d) { return HilbertSpace(std::vector<std::size_t>{d}); }

  const std::vector<std::size_t>& factor_dims() const noexcept { return dims_; }
  std::size_t factor_count() const noexcept { return dims_.size(); }
  std::size_t total_dim() const noexcept { return total_; }
  std::size_t factor_dim(std::size_t slot) const { return dims_.at(slot); }

  friend bool operator==(const HilbertSpace& a, const HilbertSpace& b) { return a.dims_ == b.dims_; }

  std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(dims_[i]);
    }
    return s;
  }

 private:
  std::vector<std::size_t> dims_;
  std::size_t total_;
};

inline double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

class Operator {
 public:
  Operator() : space_(), m_(CMatrix::Zero(1, 1)) {}

  Operator(HilbertSpace space, CMatrix entries) : space_(std::move(space)), m_(std::move(entries)) {
    const auto n = static_cast<Eigen::Index>(space_.total_dim());
    if (space_.total_dim() > kMaxDenseDim)
      throw std::invalid_argument("Operator: total dimension " + std::to_string(space_.total_dim()) +
                                  " exceeds dense cap " + std::to_string(kMaxDenseDim));
    if (m_.rows() != n || m_.cols() != n)
      throw std::invalid_argument("Operator: matrix shape does not match space " + space_.str());
  }

  /// Single-factor operator on C^d.
  explicit Operator(const CMatrix& entries) : Operator(HilbertSpace::single(static_cast<std::size_t>(entries.rows())), entries) {}

  static Operator identity(const HilbertSpace& s) {
    const auto n = static_cast<Eigen::Index>(s.total_dim());
    return Operator(s, CMatrix::Identity(n, n));
  }
  static Operator zero(const HilbertSpace& s) {
    const auto n = static_cast<Eigen::Index>(s.total_dim());
    return Operator(s, CMatrix::Zero(n, n));
  }

  const HilbertSpace& space() const noexcept { return space_; }
  const CMatrix& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return space_.total_dim(); }
  cplx operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  Operator dagger() const { return Operator(space_, m_.adjoint()); }

  bool is_hermitian(double tol = kExactTol) const {
    const double scale = std::max(1.0, max_abs(m_));
    return max_abs(m_ - m_.adjoint()) <= tol * scale;
  }

  /// Largest deviation from Hermiticity, relative to max(1, max |entry|).
  double hermiticity_residual() const { return max_abs(m_ - m_.adjoint()) / std::max(1.0, max_abs(m_)); }

  Operator operator+(const Operator& o) const { return Operator(space_, m_ + same(o).m_); }
  Operator operator-(const Operator& o) const { return Operator(space_, m_ - same(o).m_); }
  Operator operator-() const { return Operator(space_, -m_); }
  Operator operator*(const Operator& o) const { return Operator(space_, m_ * same(o).m_); }
  friend Operator operator*(cplx s, const Operator& o) { return Operator(o.space_, s * o.m_); }
  friend Operator operator*(double s, const Operator& o) { return Operator(o.space_, s * o.m_); }

  Operator pow(int k) const {
    if (k < 0) throw std::invalid_argument("Operator::pow: negative power");
    CMatrix r = CMatrix::Identity(m_.rows(), m_.cols());
    for (int i = 0; i < k; ++i) r = r * m_;
    return Operator(space_, std::move(r));
  }

 private:
  const Operator& same(const Operator& o) const {
    if (!(o.space_ == space_))
      throw std::invalid_argument("Operator: space mismatch (" + space_.str() + " vs " + o.space_.str() + ")");
    return o;
  }

  HilbertSpace space_;
  CMatrix m_;
};

/// Pure unit vector or density matrix.
class State {
 public:
  static State pure(HilbertSpace space, CVector v) {
    check_dim(space, v.size());
    if (std::abs(v.norm() - 1.0) > kExactTol)
      throw std::invalid_argument("State::pure: vector norm " + std::to_string(v.norm()) + " is not 1");
    return State(std::move(space), std::move(v), std::nullopt);
  }

  /// Pure state from an arbitrary nonzero vector (normalized here).
  static State normalized(HilbertSpace space, CVector v) {
    const double n = v.norm();
    if (!(n > 0.0)) throw std::invalid_argument("State::normalized: zero vector");
    return pure(std::move(space), v / n);
  }

  static State mixed(HilbertSpace space, CMatrix rho) {
    check_dim(space, rho.rows());
    if (rho.rows() != rho.cols()) throw std::invalid_argument("State::mixed: density matrix not square");
    if (max_abs(rho - rho.adjoint()) > kExactTol) throw std::invalid_argument("State::mixed: density matrix not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > kExactTol || std::abs(rho.trace().imag()) > kExactTol)
      throw std::invalid_argument("State::mixed: trace is not 1");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) throw std::invalid_argument("State::mixed: density matrix not PSD");
    return State(std::move(space), std::nullopt, std::move(rho));
  }

  static State maximally_mixed(const HilbertSpace& space) {
    const auto n = static_cast<Eigen::Index>(space.total_dim());
    return mixed(space, CMatrix::Identity(n, n) / static_cast<double>(n));
  }

  static State basis(const HilbertSpace& space, std::size_t index) {
    CVector v = CVector::Zero(static_cast<Eigen::Index>(space.total_dim()));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return pure(space, std::move(v));
  }

  const HilbertSpace& space() const noexcept { return space_; }
  bool is_pure() const noexcept { return vec_.has_value(); }
  const CVector& vector() const {
    if (!vec_) throw std::logic_error("State::vector: state is mixed");
    return *vec_;
  }
  CMatrix density() const { return vec_ ? CMatrix(*vec_ * vec_->adjoint()) : *rho_; }

 private:
  State(HilbertSpace s, std::optional<CVector> v, std::optional<CMatrix> r)
      : space_(std::move(s)), vec_(std::move(v)), rho_(std::move(r)) {}

  static void check_dim(const HilbertSpace& s, Eigen::Index n) {
    if (static_cast<std::size_t>(n) != s.total_dim())
      throw std::invalid_argument("State: dimension does not match space " + s.str());
  }

  HilbertSpace space_;
  std::optional<CVector> vec_;
  std::optional<CMatrix> rho_;
};

/// Convex mixture p*a + (1-p)*b as a density matrix.
inline State mixture(double p, const State& a, const State& b) {
  if (!(a.space() == b.space())) throw std::invalid_argument("mixture: space mismatch");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("mixture: weight outside [0,1]");
  CMatrix rho = p * a.density() + (1.0 - p) * b.density();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return State::mixed(a.space(), std::move(rho));
}

// ---------------------------------------------------------------------------
// Constructors

inline Operator pauli(int axis) {
  CMatrix m(2, 2);
  const cplx i(0.0, 1.0);
  switch (axis) {
    case 1: m << 0.0, 1.0, 1.0, 0.0; break;
    case 2: m << 0.0, -i, i, 0.0; break;
    case 3: m << 1.0, 0.0, 0.0, -1.0; break;
    default: throw std::invalid_argument("pauli: axis must be 1, 2 or 3, got " + std::to_string(axis));
  }
  return Operator(std::move(m));
}

/// Truncated annihilation operator on levels |0>..|cutoff>.
inline Operator ladder(std::size_t cutoff) {
  const auto n = static_cast<Eigen::Index>(cutoff + 1);
  CMatrix m = CMatrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) m(k - 1, k) = std::sqrt(static_cast<double>(k));
  return Operator(std::move(m));
}

inline Operator dagger(const Operator& a) { return a.dagger(); }

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

inline Operator kron(const Operator& a, const Operator& b) {
  std::vector<std::size_t> dims = a.space().factor_dims();
  dims.insert(dims.end(), b.space().factor_dims().begin(), b.space().factor_dims().end());
  return Operator(HilbertSpace(std::move(dims)), kron(a.matrix(), b.matrix()));
}

/// Places a single-factor operator at `slot`, identity elsewhere.
inline Operator embed(const Operator& op, std::size_t slot, const HilbertSpace& space) {
  if (slot >= space.factor_count()) throw std::invalid_argument("embed: slot out of range");
  if (op.dim() != space.factor_dim(slot))
    throw std::invalid_argument("embed: operator dimension " + std::to_string(op.dim()) +
                                " does not match factor " + std::to_string(slot) + " of dimension " +
                                std::to_string(space.factor_dim(slot)));
  if (space.total_dim() > kMaxDenseDim) throw std::invalid_argument("embed: space exceeds dense cap");
  std::size_t left = 1, right = 1;
  for (std::size_t k = 0; k < slot; ++k) left *= space.factor_dim(k);
  for (std::size_t k = slot + 1; k < space.factor_count(); ++k) right *= space.factor_dim(k);
  const auto l = static_cast<Eigen::Index>(left), r = static_cast<Eigen::Index>(right);
  CMatrix m = kron(kron(CMatrix::Identity(l, l), op.matrix()), CMatrix::Identity(r, r));
  return Operator(space, std::move(m));
}

inline Operator commutator(const Operator& a, const Operator& b) {
  if (!(a.space() == b.space())) throw std::invalid_argument("commutator: space mismatch");
  return Operator(a.space(), a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

inline Operator anticommutator(const Operator& a, const Operator& b) {
  if (!(a.space() == b.space())) throw std::invalid_argument("anticommutator: space mismatch");
  return Operator(a.space(), a.matrix() * b.matrix() + b.matrix() * a.matrix());
}

/// True when ||[a,b]|| <= tol * max(1, |a|max * |b|max).
inline bool commute(const Operator& a, const Operator& b, double tol = kExactTol) {
  const CMatrix c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
  const double scale = std::max(1.0, max_abs(a.matrix()) * max_abs(b.matrix()));
  return max_abs(c) <= tol * scale;
}

/// Average of the operator product over all k! orderings (k <= 4).
inline Operator sym_product(std::span<const Operator> ops) {
  if (ops.empty()) throw std::invalid_argument("sym_product: empty list");
  if (ops.size() > 4) throw std::invalid_argument("sym_product: at most 4 factors");
  const HilbertSpace& s = ops.front().space();
  for (const auto& o : ops)
    if (!(o.space() == s)) throw std::invalid_argument("sym_product: space mismatch");
  std::vector<std::size_t> perm(ops.size());
  std::iota(perm.begin(), perm.end(), 0);
  const auto n = static_cast<Eigen::Index>(s.total_dim());
  CMatrix acc = CMatrix::Zero(n, n);
  std::size_t count = 0;
  do {
    CMatrix p = ops[perm[0]].matrix();
    for (std::size_t k = 1; k < perm.size(); ++k) p = p * ops[perm[k]].matrix();
    acc += p;
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return Operator(s, acc / static_cast<double>(count));
}

inline Operator sym_product(std::initializer_list<Operator> ops) {
  std::vector<Operator> v(ops);
  return sym_product(std::span<const Operator>(v));
}

/// Tr(rho * op).
inline cplx expect(const State& state, const Operator& op) {
  if (!(state.space() == op.space())) throw std::invalid_argument("expect: space mismatch");
  if (state.is_pure()) {
    const CVector& v = state.vector();
    return v.dot(op.matrix() * v);  // Eigen dot conjugates the first argument
  }
  return (state.density() * op.matrix()).trace();
}

// ---------------------------------------------------------------------------
// Matrix-free action of local operators on state vectors. Used when the
// tensor-product space is too large for dense embedded operators.

/// Applies `local` to tensor factor `slot` of vector `psi`.
inline CVector apply_local(const CMatrix& local, std::size_t slot, const HilbertSpace& space, const CVector& psi) {
  if (slot >= space.factor_count()) throw std::invalid_argument("apply_local: slot out of range");
  const auto d = static_cast<Eigen::Index>(space.factor_dim(slot));
  if (local.rows() != d || local.cols() != d) throw std::invalid_argument("apply_local: dimension mismatch");
  if (static_cast<std::size_t>(psi.size()) != space.total_dim()) throw std::invalid_argument("apply_local: vector size mismatch");
  Eigen::Index left = 1, right = 1;
  for (std::size_t k = 0; k < slot; ++k) left *= static_cast<Eigen::Index>(space.factor_dim(k));
  for (std::size_t k = slot + 1; k < space.factor_count(); ++k) right *= static_cast<Eigen::Index>(space.factor_dim(k));
  CVector out = CVector::Zero(psi.size());
  for (Eigen::Index l = 0; l < left; ++l) {
    const Eigen::Index base = l * d * right;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        const cplx a = local(i, j);
        if (a == cplx(0.0)) continue;
        for (Eigen::Index r = 0; r < right; ++r) out(base + i * right + r) += a * psi(base + j * right + r);
      }
  }
  return out;
}

/// <psi| prod_k local_k |psi> for local operators on distinct factors.
inline cplx expect_local_product(const HilbertSpace& space, const CVector& psi,
                                 std::span<const std::pair<std::size_t, CMatrix>> factors) {
  CVector v = psi;
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) v = apply_local(it->second, it->first, space, v);
  return psi.dot(v);
}

}  // namespace qmoments
