#pragma once

// Noncontextual models for small observable sets built from joint
// distributions of commuting subsets.
//
// For every commutation graph on at most four vertices except the 4-cycle
// the graph is chordal, and the density is the junction-tree product
//   prod rho(clique) / prod rho(separator),  with 0 where a separator vanishes.
// On a qubit, observables with parallel Bloch vectors are grouped instead.

#include "qmoments/moments.hpp"

#include <functional>

namespace qmoments::lhv {

/// Atom: joint outcome distribution of a commuting subset.
struct JointTable {
  std::vector<std::size_t> members;  // observable indices, ascending
  std::vector<double> prob;          // row-major over members' outcome lists
};

struct FactorModel {
  std::string structure;
  std::string formula;
  std::vector<Label> labels;
  std::vector<std::vector<double>> outcomes;  // per observable
  std::vector<JointTable> cliques;
  std::vector<JointTable> separators;
  std::vector<double> density;                // row-major over all outcome lists

  std::size_t size() const noexcept { return labels.size(); }

  double total_mass() const {
    double s = 0.0;
    for (double v : density) s += v;
    return s;
  }

  double min_density() const { return density.empty() ? 0.0 : *std::min_element(density.begin(), density.end()); }

  /// E[prod X_i^powers[i]] under the composite density.
  double moment(const std::vector<int>& powers) const {
    if (powers.size() != size()) throw std::invalid_argument("FactorModel::moment: power count mismatch");
    double total = 0.0;
    std::vector<std::size_t> idx(size(), 0);
    for (double p : density) {
      if (p != 0.0) {
        double term = p;
        for (std::size_t i = 0; i < size(); ++i)
          for (int k = 0; k < powers[i]; ++k) term *= outcomes[i][idx[i]];
        total += term;
      }
      for (std::size_t i = size(); i-- > 0;) {
        if (++idx[i] < outcomes[i].size()) break;
        idx[i] = 0;
      }
    }
    return total;
  }
};

struct Spectral {
  std::vector<double> values;
  std::vector<CMatrix> projectors;
};

/// Eigen-decomposition with eigenvalues closer than `merge` treated as one outcome.
inline Spectral spectral_projectors(const Operator& op, double merge = 1e-8) {
  if (!op.is_hermitian()) throw std::invalid_argument("spectral_projectors: operator not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(op.matrix());
  const RVector& ev = es.eigenvalues();
  const CMatrix& v = es.eigenvectors();
  Spectral s;
  Eigen::Index start = 0;
  const Eigen::Index n = ev.size();
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && ev(end) - ev(end - 1) <= merge) ++end;
    const CMatrix block = v.middleCols(start, end - start);
    s.values.push_back(ev.segment(start, end - start).mean());
    s.projectors.push_back(block * block.adjoint());
    start = end;
  }
  return s;
}

namespace detail {

inline JointTable joint_table(const State& state, const std::vector<Spectral>& spec, std::vector<std::size_t> members) {
  std::sort(members.begin(), members.end());
  JointTable t;
  t.members = members;
  std::size_t total = 1;
  for (auto m : members) total *= spec[m].values.size();
  t.prob.assign(total, 0.0);
  const CMatrix rho = state.density();
  const auto d = rho.rows();
  std::vector<std::size_t> idx(members.size(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    CMatrix p = CMatrix::Identity(d, d);
    for (std::size_t k = 0; k < members.size(); ++k) p = p * spec[members[k]].projectors[idx[k]];
    double v = (rho * p).trace().real();
    if (v < 0.0) {
      if (v < -1e-12) throw NumericalFailure("factor_model: negative joint probability " + std::to_string(v));
      v = 0.0;
    }
    t.prob[flat] = v;
    for (std::size_t k = members.size(); k-- > 0;) {
      if (++idx[k] < spec[members[k]].values.size()) break;
      idx[k] = 0;
    }
  }
  return t;
}

inline double table_at(const JointTable& t, const std::vector<Spectral>& spec, const std::vector<std::size_t>& full_idx) {
  std::size_t flat = 0;
  for (auto m : t.members) flat = flat * spec[m].values.size() + full_idx[m];
  return t.prob[flat];
}

inline std::string degree_key(std::size_t n, const std::vector<std::vector<bool>>& adj) {
  std::vector<int> deg(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && adj[i][j]) ++deg[i];
  std::sort(deg.rbegin(), deg.rend());
  std::string k = std::to_string(n) + ":";
  for (int d : deg) k += std::to_string(d);
  return k;
}

// Up to four vertices the degree sequence fixes the graph.
inline std::string case_name(const std::string& key) {
  static const std::map<std::string, std::string> names = {
      {"1:0", "single"},
      {"2:00", "no edges"},
      {"2:11", "one edge"},
      {"3:000", "no edges"},
      {"3:110", "one edge"},
      {"3:211", "path"},
      {"3:222", "triangle"},
      {"4:0000", "no edges"},
      {"4:1100", "one edge"},
      {"4:2110", "path of three + isolated"},
      {"4:1111", "two disjoint edges"},
      {"4:2220", "triangle + isolated"},
      {"4:3111", "star"},
      {"4:2211", "chain"},
      {"4:2222", "4-cycle"},
      {"4:3221", "triangle with pendant"},
      {"4:3322", "two triangles sharing an edge"},
      {"4:3333", "complete"},
  };
  const auto it = names.find(key);
  if (it == names.end()) throw std::logic_error("factor_model: graph " + key + " matches no table case");
  return it->second;
}

inline std::string rho_string(const std::vector<Label>& labels, const std::vector<std::size_t>& members) {
  std::string s = "rho(";
  for (std::size_t k = 0; k < members.size(); ++k) s += (k ? "," : "") + labels[members[k]].str();
  return s + ")";
}

inline FactorModel assemble(const State& state, const ObservableSet& obs, const std::vector<Spectral>& spec,
                            const std::vector<std::vector<std::size_t>>& cliques,
                            const std::vector<std::vector<std::size_t>>& seps, std::string structure) {
  FactorModel m;
  m.structure = std::move(structure);
  m.labels = obs.labels();
  for (const auto& s : spec) m.outcomes.push_back(s.values);
  for (const auto& c : cliques) m.cliques.push_back(joint_table(state, spec, c));
  for (const auto& s : seps) m.separators.push_back(joint_table(state, spec, s));
  std::string num, den;
  for (const auto& c : m.cliques) num += rho_string(m.labels, c.members);
  for (const auto& s : m.separators) den += rho_string(m.labels, s.members);
  m.formula = den.empty() ? num : num + "/" + den;

  const std::size_t n = obs.size();
  std::size_t total = 1;
  for (const auto& s : spec) total *= s.values.size();
  m.density.assign(total, 0.0);
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    double v = 1.0;
    for (const auto& c : m.cliques) v *= table_at(c, spec, idx);
    for (const auto& s : m.separators) {
      const double d = table_at(s, spec, idx);
      if (d <= 1e-15) {
        v = 0.0;
        break;
      }
      v /= d;
    }
    m.density[flat] = v;
    for (std::size_t k = n; k-- > 0;) {
      if (++idx[k] < spec[k].values.size()) break;
      idx[k] = 0;
    }
  }
  return m;
}

}  // namespace detail

inline FactorModel factor_model(const State& state, const ObservableSet& obs) {
  const std::size_t n = obs.size();
  if (n < 1 || n > 4) throw std::invalid_argument("factor_model: need 1..4 observables");
  if (!(state.space() == obs.space())) throw std::invalid_argument("factor_model: space mismatch");
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) adj[i][j] = i == j || obs.commutes(i, j);
  const std::string name = detail::case_name(detail::degree_key(n, adj));
  if (name == "4-cycle")
    throw std::invalid_argument("factor_model: 4-cycle commutation graph has no product form; use kernel_reduce + peaked_model (fit)");

  // Maximal cliques by subset enumeration.
  auto is_clique = [&](unsigned mask) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if ((mask >> i & 1u) && (mask >> j & 1u) && !adj[i][j]) return false;
    return true;
  };
  std::vector<unsigned> maximal;
  const unsigned full = (1u << n) - 1;
  for (unsigned mask = full; mask > 0; --mask) {
    if (!is_clique(mask)) continue;
    bool covered = false;
    for (unsigned m : maximal)
      if ((m & mask) == mask) covered = true;
    if (!covered) maximal.push_back(mask);
  }
  std::sort(maximal.begin(), maximal.end());

  // Junction tree: maximum-weight spanning tree on clique intersections.
  struct Edge {
    int w;
    std::size_t a, b;
  };
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < maximal.size(); ++a)
    for (std::size_t b = a + 1; b < maximal.size(); ++b)
      edges.push_back({__builtin_popcount(maximal[a] & maximal[b]), a, b});
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.w > y.w; });
  std::vector<std::size_t> parent(maximal.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> root = [&](std::size_t x) { return parent[x] == x ? x : parent[x] = root(parent[x]); };
  auto members = [&](unsigned mask) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1u) out.push_back(i);
    return out;
  };
  std::vector<std::vector<std::size_t>> cliques, seps;
  for (unsigned m : maximal) cliques.push_back(members(m));
  for (const auto& e : edges) {
    const auto ra = root(e.a), rb = root(e.b);
    if (ra == rb) continue;
    parent[ra] = rb;
    if (e.w > 0) seps.push_back(members(maximal[e.a] & maximal[e.b]));
  }

  std::vector<Spectral> spec;
  for (std::size_t i = 0; i < n; ++i) spec.push_back(spectral_projectors(obs.op(i)));
  return detail::assemble(state, obs, spec, cliques, seps, name);
}

/// Qubit construction for any number of observables: observables with
/// parallel Bloch vectors share a joint distribution; groups are independent.
inline FactorModel qubit_grouping_model(const State& state, const ObservableSet& obs, double tol = 1e-10) {
  if (obs.space().total_dim() != 2) throw std::invalid_argument("qubit_grouping_model: needs a two-dimensional space");
  if (!(state.space() == obs.space())) throw std::invalid_argument("qubit_grouping_model: space mismatch");
  const std::size_t n = obs.size();
  std::vector<Eigen::Vector3d> bloch(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 1; k <= 3; ++k) bloch[i](k - 1) = (obs.op(i).matrix() * pauli(k).matrix()).trace().real() / 2.0;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    bool placed = false;
    const double ni = bloch[i].norm();
    if (ni > tol) {
      for (auto& g : groups) {
        const auto& b = bloch[g.front()];
        if (b.norm() > tol && bloch[i].cross(b).norm() <= tol * ni * b.norm()) {
          g.push_back(i);
          placed = true;
          break;
        }
      }
    }
    if (!placed) groups.push_back({i});
  }
  std::vector<Spectral> spec;
  for (std::size_t i = 0; i < n; ++i) spec.push_back(spectral_projectors(obs.op(i)));
  if (n > 16) throw std::invalid_argument("qubit_grouping_model: outcome grid too large");
  return detail::assemble(state, obs, spec, groups, {}, "qubit grouping");
}

}  // namespace qmoments::lhv
