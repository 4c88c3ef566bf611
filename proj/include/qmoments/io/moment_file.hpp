#pragma once

// Moment files: observables (with optional matrices), an optional state and
// optional precomputed tables.
//
// {
//   "schema": "qmoments.moment-file/1",
//   "space": [2, 2, 2],
//   "observables": [{"observer": "A", "setting": 1, "index": 1, "matrix": [[[re, im], ...], ...]}],
//   "state": {"vector": [[re, im], ...]}  or  {"density": [[[re, im], ...], ...]},
//   "tensors": {"second": <moment tensor>, "third": <moment tensor>}
// }

#include "qmoments/moments.hpp"

#include <fstream>
#include <optional>

namespace qmoments::io {

/// Bad or inconsistent input file.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct MomentFile {
  std::optional<HilbertSpace> space;
  std::vector<Label> labels;
  std::vector<std::optional<CMatrix>> matrices;
  std::optional<State> state;
  std::optional<MomentTensor> second;
  std::optional<MomentTensor> third;

  bool has_operators() const {
    if (labels.empty()) return false;
    for (const auto& m : matrices)
      if (!m) return false;
    return true;
  }

  ObservableSet observable_set() const {
    if (!has_operators() || !space) throw InputError("moment file: every observable needs a matrix");
    std::vector<Observable> obs;
    for (std::size_t i = 0; i < labels.size(); ++i) obs.push_back({labels[i], Operator(*space, *matrices[i])});
    return ObservableSet(*space, std::move(obs));
  }
};

namespace detail {

inline cplx read_complex(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw InputError("moment file: complex entries must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline CMatrix read_cmatrix(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw InputError("moment file: matrix must be a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  CMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) throw InputError("moment file: matrix must be square");
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = read_complex(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

inline CVector read_cvector(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw InputError("moment file: state vector must be a non-empty array");
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = read_complex(j[i]);
  return v;
}

inline nlohmann::json complex_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline nlohmann::json cmatrix_json(const CMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace detail

inline MomentFile parse_moment_file(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("moment file: top level must be an object");
  MomentFile f;
  try {
    if (j.contains("space")) {
      std::vector<std::size_t> dims;
      for (const auto& d : j.at("space")) {
        if (!d.is_number_integer() || d.get<long long>() < 1) throw InputError("moment file: space entries must be positive integers");
        dims.push_back(d.get<std::size_t>());
      }
      f.space = HilbertSpace(dims);
    }
    if (j.contains("observables")) {
      std::set<Label> seen;
      for (const auto& o : j.at("observables")) {
        if (!o.is_object() || !o.contains("observer")) throw InputError("moment file: observable needs an observer");
        Label l{o.at("observer").get<std::string>(), o.value("setting", 1), o.value("index", 1)};
        if (l.observer.empty()) throw InputError("moment file: empty observer name");
        if (!seen.insert(l).second) throw InputError("moment file: duplicate observable " + l.str());
        f.labels.push_back(l);
        if (o.contains("matrix")) {
          CMatrix m = detail::read_cmatrix(o.at("matrix"));
          if (!f.space) f.space = HilbertSpace::single(static_cast<std::size_t>(m.rows()));
          if (static_cast<std::size_t>(m.rows()) != f.space->total_dim())
            throw InputError("moment file: matrix of " + l.str() + " does not match the space dimension");
          f.matrices.emplace_back(std::move(m));
        } else {
          f.matrices.emplace_back(std::nullopt);
        }
      }
    }
    if (j.contains("state")) {
      const auto& s = j.at("state");
      if (s.contains("vector")) {
        CVector v = detail::read_cvector(s.at("vector"));
        if (!f.space) f.space = HilbertSpace::single(static_cast<std::size_t>(v.size()));
        if (static_cast<std::size_t>(v.size()) != f.space->total_dim()) throw InputError("moment file: state vector dimension mismatch");
        f.state = State::normalized(*f.space, v);
      } else if (s.contains("density")) {
        CMatrix rho = detail::read_cmatrix(s.at("density"));
        if (!f.space) f.space = HilbertSpace::single(static_cast<std::size_t>(rho.rows()));
        if (static_cast<std::size_t>(rho.rows()) != f.space->total_dim()) throw InputError("moment file: density dimension mismatch");
        f.state = State::mixed(*f.space, rho);
      } else {
        throw InputError("moment file: state needs 'vector' or 'density'");
      }
    }
    if (j.contains("tensors")) {
      const auto& t = j.at("tensors");
      if (t.contains("second")) f.second = MomentTensor::from_json(t.at("second"));
      if (t.contains("third")) f.third = MomentTensor::from_json(t.at("third"));
    }
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(std::string("moment file: ") + e.what());
  }
  if (f.labels.empty() && !f.second) throw InputError("moment file: no observables and no tensors");
  return f;
}

inline MomentFile read_moment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open moment file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("moment file " + path + " is not valid JSON: " + e.what());
  }
  return parse_moment_file(j);
}

/// Serializes observables, state and (optionally) their centered tables.
inline nlohmann::json moment_file_json(const State& state, const ObservableSet& obs, bool with_tensors = true) {
  using nlohmann::json;
  json j;
  j["schema"] = "qmoments.moment-file/1";
  j["space"] = obs.space().factor_dims();
  json jo = json::array();
  for (const auto& e : obs.entries())
    jo.push_back({{"observer", e.label.observer}, {"setting", e.label.setting}, {"index", e.label.index},
                  {"matrix", detail::cmatrix_json(e.op.matrix())}});
  j["observables"] = jo;
  if (state.is_pure()) {
    json v = json::array();
    const CVector& psi = state.vector();
    for (Eigen::Index i = 0; i < psi.size(); ++i) v.push_back(detail::complex_json(psi(i)));
    j["state"] = {{"vector", v}};
  } else {
    j["state"] = {{"density", detail::cmatrix_json(state.density())}};
  }
  if (with_tensors) {
    j["tensors"] = {{"second", correlation_matrix(state, obs).to_json()},
                    {"third", third_moments(state, obs, Convention::full_symmetrization).to_json()}};
  }
  return j;
}

}  // namespace qmoments::io
