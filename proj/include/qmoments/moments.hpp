#pragma once

// Symmetrized quantum moments of labeled observable sets.
//
// Observables carry (observer, setting, index) labels. Operators of the same
// observer and setting, and operators of different observers, are jointly
// measurable and must commute. Moments are computed for mean-subtracted
// operators X - <X>; the subtracted means travel with the tensor.

#include "qmoments/hilbert.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <compare>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qmoments {

struct Label {
  std::string observer;
  int setting = 1;
  int index = 1;

  auto operator<=>(const Label&) const = default;

  std::string str() const { return observer + ":" + std::to_string(setting) + ":" + std::to_string(index); }

  /// Parses "A:1:2". A bare observer name means setting 1, index 1.
  static Label parse(std::string_view text) {
    Label l;
    const auto p1 = text.find(':');
    if (p1 == std::string_view::npos) {
      l.observer = std::string(text);
    } else {
      l.observer = std::string(text.substr(0, p1));
      const auto rest = text.substr(p1 + 1);
      const auto p2 = rest.find(':');
      try {
        l.setting = std::stoi(std::string(rest.substr(0, p2)));
        if (p2 != std::string_view::npos) l.index = std::stoi(std::string(rest.substr(p2 + 1)));
      } catch (const std::exception&) {
        throw std::invalid_argument("Label::parse: malformed label '" + std::string(text) + "'");
      }
    }
    if (l.observer.empty()) throw std::invalid_argument("Label::parse: empty observer in '" + std::string(text) + "'");
    return l;
  }
};

struct Observable {
  Label label;
  Operator op;
};

class ObservableSet {
 public:
  ObservableSet(HilbertSpace space, std::vector<Observable> entries, double tol = kExactTol)
      : space_(std::move(space)), entries_(std::move(entries)) {
    const std::size_t n = entries_.size();
    std::set<Label> seen;
    for (const auto& e : entries_) {
      if (!(e.op.space() == space_)) throw std::invalid_argument("ObservableSet: operator " + e.label.str() + " not on shared space");
      if (!e.op.is_hermitian(tol)) throw std::invalid_argument("ObservableSet: operator " + e.label.str() + " is not Hermitian");
      if (!seen.insert(e.label).second) throw std::invalid_argument("ObservableSet: duplicate label " + e.label.str());
    }
    commutes_.assign(n, std::vector<bool>(n, true));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const bool c = commute(entries_[i].op, entries_[j].op, tol);
        commutes_[i][j] = commutes_[j][i] = c;
        if (!c && jointly_measurable(i, j))
          throw std::invalid_argument("ObservableSet: jointly measurable pair " + entries_[i].label.str() + ", " +
                                      entries_[j].label.str() + " does not commute");
      }
  }

  const HilbertSpace& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const Observable& operator[](std::size_t i) const { return entries_.at(i); }
  const Operator& op(std::size_t i) const { return entries_.at(i).op; }
  const Label& label(std::size_t i) const { return entries_.at(i).label; }
  const std::vector<Observable>& entries() const noexcept { return entries_; }

  std::vector<Label> labels() const {
    std::vector<Label> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.label);
    return out;
  }

  std::size_t index_of(const Label& l) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].label == l) return i;
    throw std::invalid_argument("ObservableSet: unknown label " + l.str());
  }

  /// Commutation graph edge (true on the diagonal).
  bool commutes(std::size_t i, std::size_t j) const { return commutes_.at(i).at(j); }

  /// Same observer and setting, or different observers.
  bool jointly_measurable(std::size_t i, std::size_t j) const {
    const Label& a = entries_.at(i).label;
    const Label& b = entries_.at(j).label;
    return a.observer != b.observer || a.setting == b.setting;
  }

 private:
  HilbertSpace space_;
  std::vector<Observable> entries_;
  std::vector<std::vector<bool>> commutes_;
};

enum class Convention { full_symmetrization, kernel_split };

inline std::string to_string(Convention c) {
  return c == Convention::full_symmetrization ? "full-symmetrization" : "kernel-split";
}

inline Convention convention_from_string(std::string_view s) {
  if (s == "full-symmetrization") return Convention::full_symmetrization;
  if (s == "kernel-split") return Convention::kernel_split;
  throw std::invalid_argument("unknown moment convention '" + std::string(s) + "'");
}

/// Symmetric table of order-k moments over an ordered label list.
/// Keys are index tuples sorted ascending, so the table is closed under
/// permutation of its indices by construction.
class MomentTensor {
 public:
  using Key = std::vector<std::size_t>;

  MomentTensor(int order, std::vector<Label> labels, Convention conv = Convention::full_symmetrization)
      : order_(order), conv_(conv), labels_(std::move(labels)) {
    if (order_ < 1 || order_ > 4) throw std::invalid_argument("MomentTensor: order must be 1..4");
    std::set<Label> s(labels_.begin(), labels_.end());
    if (s.size() != labels_.size()) throw std::invalid_argument("MomentTensor: duplicate labels");
  }

  int order() const noexcept { return order_; }
  Convention convention() const noexcept { return conv_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  const std::map<Key, double>& table() const noexcept { return table_; }
  const std::map<Label, double>& means() const noexcept { return means_; }
  void set_means(std::map<Label, double> m) { means_ = std::move(m); }

  std::size_t index_of(const Label& l) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == l) return i;
    throw std::invalid_argument("MomentTensor: unknown label " + l.str());
  }

  double get(Key idx) const {
    normalize(idx);
    const auto it = table_.find(idx);
    return it == table_.end() ? 0.0 : it->second;
  }
  double operator()(std::size_t i, std::size_t j) const { return get({i, j}); }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const { return get({i, j, k}); }

  void set(Key idx, double value) {
    normalize(idx);
    table_[std::move(idx)] = value;
  }

  /// Dense symmetric matrix view of an order-2 tensor.
  RMatrix matrix() const {
    if (order_ != 2) throw std::logic_error("MomentTensor::matrix: order is not 2");
    const auto n = static_cast<Eigen::Index>(labels_.size());
    RMatrix m = RMatrix::Zero(n, n);
    for (const auto& [k, v] : table_) {
      m(static_cast<Eigen::Index>(k[0]), static_cast<Eigen::Index>(k[1])) = v;
      m(static_cast<Eigen::Index>(k[1]), static_cast<Eigen::Index>(k[0])) = v;
    }
    return m;
  }

  static MomentTensor from_matrix(std::vector<Label> labels, const RMatrix& m, double sym_tol = 1e-12) {
    const auto n = static_cast<Eigen::Index>(labels.size());
    if (m.rows() != n || m.cols() != n) throw std::invalid_argument("MomentTensor::from_matrix: shape mismatch");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
      throw std::invalid_argument("MomentTensor::from_matrix: matrix is not symmetric");
    MomentTensor t(2, std::move(labels));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j)
        t.set({static_cast<std::size_t>(i), static_cast<std::size_t>(j)}, m(i, j));
    return t;
  }

  /// Canonical JSON: entries sorted by their (sorted) label tuples.
  nlohmann::json to_json() const {
    using nlohmann::json;
    std::vector<std::pair<std::vector<Label>, double>> rows;
    for (const auto& [k, v] : table_) {
      std::vector<Label> ls;
      for (auto i : k) ls.push_back(labels_[i]);
      std::sort(ls.begin(), ls.end());
      rows.emplace_back(std::move(ls), v);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    json entries = json::array();
    for (const auto& [ls, v] : rows) {
      json jl = json::array();
      for (const auto& l : ls) jl.push_back(l.str());
      entries.push_back({{"labels", jl}, {"value", v}});
    }
    std::vector<Label> sorted = labels_;
    std::sort(sorted.begin(), sorted.end());
    json jl = json::array();
    for (const auto& l : sorted) jl.push_back(l.str());
    json out = {{"schema", "qmoments.moment-tensor/1"},
                {"order", order_},
                {"convention", to_string(conv_)},
                {"labels", jl},
                {"entries", entries}};
    if (!means_.empty()) {
      json m = json::object();
      for (const auto& [l, v] : means_) m[l.str()] = v;
      out["means"] = m;
    }
    return out;
  }

  static MomentTensor from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("order") || !j.contains("entries"))
      throw std::invalid_argument("MomentTensor JSON: missing order/entries");
    const int order = j.at("order").get<int>();
    const Convention conv =
        j.contains("convention") ? convention_from_string(j.at("convention").get<std::string>()) : Convention::full_symmetrization;
    std::vector<Label> labels;
    std::set<Label> seen;
    auto add = [&](const Label& l) {
      if (seen.insert(l).second) labels.push_back(l);
    };
    if (j.contains("labels"))
      for (const auto& s : j.at("labels")) add(Label::parse(s.get<std::string>()));
    for (const auto& e : j.at("entries"))
      for (const auto& s : e.at("labels")) add(Label::parse(s.get<std::string>()));
    MomentTensor t(order, labels, conv);
    for (const auto& e : j.at("entries")) {
      const auto& jl = e.at("labels");
      if (static_cast<int>(jl.size()) != order) throw std::invalid_argument("MomentTensor JSON: entry arity does not match order");
      Key k;
      for (const auto& s : jl) k.push_back(t.index_of(Label::parse(s.get<std::string>())));
      t.set(std::move(k), e.at("value").get<double>());
    }
    if (j.contains("means")) {
      std::map<Label, double> m;
      for (const auto& [k, v] : j.at("means").items()) m[Label::parse(k)] = v.get<double>();
      t.set_means(std::move(m));
    }
    return t;
  }

 private:
  void normalize(Key& idx) const {
    if (static_cast<int>(idx.size()) != order_) throw std::invalid_argument("MomentTensor: index arity does not match order");
    for (auto i : idx)
      if (i >= labels_.size()) throw std::out_of_range("MomentTensor: index out of range");
    std::sort(idx.begin(), idx.end());
  }

  int order_;
  Convention conv_;
  std::vector<Label> labels_;
  std::map<Key, double> table_;
  std::map<Label, double> means_;
};

// ---------------------------------------------------------------------------
// Quantum moments

inline std::vector<double> first_moments(const State& state, const ObservableSet& obs) {
  if (!(state.space() == obs.space())) throw std::invalid_argument("first_moments: space mismatch");
  std::vector<double> m(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) m[i] = expect(state, obs.op(i)).real();
  return m;
}

/// Mean-subtracted operators X_i - <X_i>.
inline std::vector<Operator> centered_operators(const ObservableSet& obs, const std::vector<double>& means) {
  std::vector<Operator> out;
  const Operator id = Operator::identity(obs.space());
  for (std::size_t i = 0; i < obs.size(); ++i) out.push_back(obs.op(i) - means[i] * id);
  return out;
}

inline std::map<Label, double> means_map(const ObservableSet& obs, const std::vector<double>& means) {
  std::map<Label, double> m;
  for (std::size_t i = 0; i < obs.size(); ++i) m[obs.label(i)] = means[i];
  return m;
}

/// C_ij = Tr rho {X_i, X_j} / 2 for the mean-subtracted operators.
inline MomentTensor correlation_matrix(const State& state, const ObservableSet& obs) {
  if (!(state.space() == obs.space())) throw std::invalid_argument("correlation_matrix: space mismatch");
  const auto means = first_moments(state, obs);
  const auto x = centered_operators(obs, means);
  MomentTensor t(2, obs.labels());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i; j < x.size(); ++j) t.set({i, j}, expect(state, anticommutator(x[i], x[j])).real() / 2.0);
  t.set_means(means_map(obs, means));
  return t;
}

namespace detail {

inline double third_full(const State& s, const Operator& a, const Operator& b, const Operator& c) {
  const std::vector<Operator> v{a, b, c};
  return expect(s, sym_product(std::span<const Operator>(v))).real();
}

/// Kernel split: V = kernel variables, Y = the rest.
inline double third_split(const State& s, std::array<const Operator*, 3> ops, std::array<bool, 3> is_v) {
  int nv = static_cast<int>(is_v[0]) + static_cast<int>(is_v[1]) + static_cast<int>(is_v[2]);
  if (nv == 0 || nv == 3) return third_full(s, *ops[0], *ops[1], *ops[2]);
  std::vector<const Operator*> vs, ys;
  for (int k = 0; k < 3; ++k) (is_v[k] ? vs : ys).push_back(ops[k]);
  if (nv == 1) {
    // Tr rho {V, {Y_m, Y_n}} / 4
    const Operator inner = anticommutator(*ys[0], *ys[1]);
    return expect(s, anticommutator(*vs[0], inner)).real() / 4.0;
  }
  // Tr rho (V_j Y V_k + V_k Y V_j) / 2
  const Operator t = (*vs[0]) * (*ys[0]) * (*vs[1]) + (*vs[1]) * (*ys[0]) * (*vs[0]);
  return expect(s, t).real() / 2.0;
}

}  // namespace detail

/// Order-3 moments of the mean-subtracted operators. With the kernel-split
/// convention, `kernel_vars[i]` marks the V family (variables appearing in
/// kernel equations).
inline MomentTensor third_moments(const State& state, const ObservableSet& obs,
                                  Convention conv = Convention::full_symmetrization,
                                  const std::vector<bool>* kernel_vars = nullptr) {
  if (!(state.space() == obs.space())) throw std::invalid_argument("third_moments: space mismatch");
  if (conv == Convention::kernel_split) {
    if (kernel_vars == nullptr) throw std::invalid_argument("third_moments: kernel-split convention needs a kernel-variable designation");
    if (kernel_vars->size() != obs.size()) throw std::invalid_argument("third_moments: kernel designation size mismatch");
  }
  const auto means = first_moments(state, obs);
  const auto x = centered_operators(obs, means);
  const std::size_t n = x.size();
  MomentTensor t(3, obs.labels(), conv);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      for (std::size_t k = j; k < n; ++k) {
        double v;
        if (conv == Convention::full_symmetrization)
          v = detail::third_full(state, x[i], x[j], x[k]);
        else
          v = detail::third_split(state, {&x[i], &x[j], &x[k]}, {(*kernel_vars)[i], (*kernel_vars)[j], (*kernel_vars)[k]});
        t.set({i, j, k}, v);
      }
  t.set_means(means_map(obs, means));
  return t;
}

/// Tr rho O^p for p in {2, 4}.
inline double fourth_moment(const State& state, const Operator& op, int power) {
  if (power != 2 && power != 4) throw std::invalid_argument("fourth_moment: power must be 2 or 4");
  if (!op.is_hermitian()) throw std::invalid_argument("fourth_moment: operator not Hermitian");
  return expect(state, op.pow(power)).real();
}

struct PsdResult {
  std::vector<double> eigenvalues;  // ascending
  bool is_psd = false;
};

inline void require_symmetric(const RMatrix& c, const char* who) {
  if (c.rows() != c.cols()) throw std::invalid_argument(std::string(who) + ": matrix not square");
  const double scale = std::max(1.0, c.size() ? c.cwiseAbs().maxCoeff() : 0.0);
  if (c.size() && (c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument(std::string(who) + ": matrix not symmetric");
}

inline PsdResult psd_check(const RMatrix& c, double tol = 1e-10) {
  require_symmetric(c, "psd_check");
  PsdResult r;
  if (c.size() == 0) {
    r.is_psd = true;
    return r;
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> es(c, Eigen::EigenvaluesOnly);
  const RVector& ev = es.eigenvalues();
  r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  r.is_psd = r.eigenvalues.front() >= -tol;
  return r;
}

inline PsdResult psd_check(const MomentTensor& c, double tol = 1e-10) { return psd_check(c.matrix(), tol); }

/// Default kernel tolerance, applied after scaling to unit max diagonal.
inline constexpr double kKernelTol = 1e-9;

inline double unit_diagonal_scale(const RMatrix& c) {
  const double d = c.size() ? c.diagonal().cwiseAbs().maxCoeff() : 0.0;
  return d > 0.0 ? d : 1.0;
}

/// Orthonormal basis (columns) of the near-null eigenspace.
inline RMatrix kernel_matrix(const RMatrix& c, double tol = kKernelTol) {
  require_symmetric(c, "kernel_basis");
  const auto n = c.rows();
  if (n == 0) return RMatrix(0, 0);
  const double scale = unit_diagonal_scale(c);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(c / scale);
  const RVector& ev = es.eigenvalues();
  if (ev(0) < -tol)
    throw std::invalid_argument("kernel_basis: matrix has eigenvalue " + std::to_string(ev(0) * scale) + " below -tol");
  Eigen::Index k = 0;
  while (k < n && std::abs(ev(k)) <= tol) ++k;
  return es.eigenvectors().leftCols(k);
}

inline std::vector<RVector> kernel_basis(const RMatrix& c, double tol = kKernelTol) {
  const RMatrix k = kernel_matrix(c, tol);
  std::vector<RVector> out;
  for (Eigen::Index j = 0; j < k.cols(); ++j) out.emplace_back(k.col(j));
  return out;
}

inline std::vector<RVector> kernel_basis(const MomentTensor& c, double tol = kKernelTol) { return kernel_basis(c.matrix(), tol); }

}  // namespace qmoments
