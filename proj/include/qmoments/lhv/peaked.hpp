#pragma once

// Gaussian base plus delta peaks reproducing prescribed third moments.
//
// Each peak family puts three (or six) peaks of weight lambda^-3 at
// multiples q in {3, -1, -2} of a common direction; sum q = 0 keeps the
// mean at zero and 27 - 1 - 8 = 18 fixes the third moment. The Gaussian
// covariance is then shrunk so the mixture keeps the target second moments.

#include "qmoments/lhv/gaussian.hpp"

#include <cmath>
#include <optional>

namespace qmoments::lhv {

struct Peak {
  RVector position;
  double weight = 0.0;
  std::string tag;
};

/// X = offset + map * Y, where Y are the model's internal variables.
struct AffineOutput {
  std::vector<Label> labels;
  RVector offset;
  RMatrix map;
};

struct PeakedLHV {
  GaussianLHV gaussian;  // covariance is the adjusted C'
  double gaussian_weight = 1.0;
  std::vector<Peak> peaks;
  double lambda = 1.0;
  std::size_t label_count = 0;
  AffineOutput output;
  RMatrix target_covariance;
  double calibration_residual = 0.0;

  std::size_t internal_size() const noexcept { return gaussian.size(); }
};

inline constexpr std::array<int, 3> kPeakMultipliers{3, -1, -2};

namespace detail {

// Cube amplitudes, one per peak family.
struct PeakAmplitudes {
  std::map<std::array<std::size_t, 3>, double> triple;  // i < j < k
  std::map<std::array<std::size_t, 2>, double> pair;    // ordered (i, j), i != j: <X_i^2 X_j>
  std::vector<double> single;
};

inline std::size_t peak_label_count(std::size_t n) {
  const std::size_t triples = n >= 3 ? n * (n - 1) * (n - 2) / 6 : 0;
  return 3 * triples + 6 * n * (n - 1) + 3 * n;
}

inline PeakAmplitudes initial_amplitudes(const MomentTensor& t) {
  const std::size_t n = t.size();
  PeakAmplitudes a;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) a.triple[{i, j, k}] = t(i, j, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double v = t(i, i, j);
      for (std::size_t k = 0; k < n; ++k)
        if (k != i && k != j) v -= t(i, j, k);
      a.pair[{i, j}] = v;
    }
  a.single.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double v = t(i, i, i);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) v -= t(j, j, i) / 2.0;
    a.single[i] = v;
  }
  return a;
}

inline std::vector<Peak> build_peaks(const PeakAmplitudes& a, std::size_t n, double lambda, const std::vector<Label>& labels) {
  std::vector<Peak> peaks;
  peaks.reserve(peak_label_count(n));
  const double w = 1.0 / (lambda * lambda * lambda);
  const double c18 = std::cbrt(18.0);
  auto tag = [&](std::string_view kind, std::initializer_list<std::size_t> idx, int q, std::string_view branch = "") {
    std::string s(kind);
    s += "(";
    bool first = true;
    for (auto i : idx) {
      if (!first) s += ",";
      s += labels[i].str();
      first = false;
    }
    s += ") q=" + std::to_string(q);
    s += branch;
    return s;
  };
  for (const auto& [ijk, amp] : a.triple) {
    const double base = lambda * std::cbrt(amp) / c18;
    for (int q : kPeakMultipliers) {
      RVector p = RVector::Zero(static_cast<Eigen::Index>(n));
      for (auto i : ijk) p(static_cast<Eigen::Index>(i)) = q * base;
      peaks.push_back({std::move(p), w, tag("triple", {ijk[0], ijk[1], ijk[2]}, q)});
    }
  }
  for (const auto& [ij, amp] : a.pair) {
    const double big_q = lambda * std::cbrt(amp / 4.0);
    for (int q : kPeakMultipliers)
      for (int sign : {1, -1}) {
        RVector p = RVector::Zero(static_cast<Eigen::Index>(n));
        p(static_cast<Eigen::Index>(ij[0])) = sign * std::sqrt(2.0) * q * big_q / c18;
        p(static_cast<Eigen::Index>(ij[1])) = q * big_q / c18;
        peaks.push_back({std::move(p), w, tag("pair", {ij[0], ij[1]}, q, sign > 0 ? "+" : "-")});
      }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double base = lambda * std::cbrt(a.single[i]) / c18;
    for (int q : kPeakMultipliers) {
      RVector p = RVector::Zero(static_cast<Eigen::Index>(n));
      p(static_cast<Eigen::Index>(i)) = q * base;
      peaks.push_back({std::move(p), w, tag("single", {i}, q)});
    }
  }
  return peaks;
}

/// Exact third moments of the peak part (the Gaussian part has none).
inline double peak_third(const std::vector<Peak>& peaks, std::size_t i, std::size_t j, std::size_t k) {
  double s = 0.0;
  const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j), c = static_cast<Eigen::Index>(k);
  for (const auto& p : peaks) s += p.weight * p.position(a) * p.position(b) * p.position(c);
  return s;
}

inline RMatrix peak_second(const std::vector<Peak>& peaks, std::size_t n) {
  RMatrix m = RMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& p : peaks) m.noalias() += p.weight * p.position * p.position.transpose();
  return m;
}

// Triangular correction in the cube amplitudes: triples touch only their
// own (ijk) entry among distinct triples, pairs fix (iij) given the triples,
// singles fix (iii) given everything else.
inline double calibrate(PeakAmplitudes& a, const MomentTensor& t, double lambda, const std::vector<Label>& labels,
                        std::vector<Peak>& peaks) {
  const std::size_t n = t.size();
  for (int sweep = 0; sweep < 2; ++sweep) {
    peaks = build_peaks(a, n, lambda, labels);
    for (auto& [ijk, amp] : a.triple) amp += t(ijk[0], ijk[1], ijk[2]) - peak_third(peaks, ijk[0], ijk[1], ijk[2]);
    peaks = build_peaks(a, n, lambda, labels);
    for (auto& [ij, amp] : a.pair) amp += t(ij[0], ij[0], ij[1]) - peak_third(peaks, ij[0], ij[0], ij[1]);
    peaks = build_peaks(a, n, lambda, labels);
    for (std::size_t i = 0; i < n; ++i) a.single[i] += t(i, i, i) - peak_third(peaks, i, i, i);
  }
  peaks = build_peaks(a, n, lambda, labels);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      for (std::size_t k = j; k < n; ++k) worst = std::max(worst, std::abs(t(i, j, k) - peak_third(peaks, i, j, k)));
  return worst;
}

inline double min_eigenvalue(const RMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace detail

inline constexpr double kLambdaCap = 1099511627776.0;  // 2^40

/// lambda <= 0 selects the automatic schedule.
inline PeakedLHV peaked_model(const MomentTensor& c, const MomentTensor& t, double lambda = 0.0) {
  if (c.order() != 2 || t.order() != 3) throw std::invalid_argument("peaked_model: need order-2 C and order-3 T");
  if (c.labels() != t.labels()) throw std::invalid_argument("peaked_model: C and T label lists differ");
  const RMatrix cm = c.matrix();
  require_symmetric(cm, "peaked_model");
  const std::size_t n = c.size();
  const auto& labels = c.labels();
  const double scale = unit_diagonal_scale(cm);
  const double cmin = n ? detail::min_eigenvalue(cm) : 1.0;
  if (n == 0 || cmin <= 1e-9 * scale)
    throw std::invalid_argument("peaked_model: correlation matrix must be strictly positive definite (min eigenvalue " +
                                std::to_string(cmin) + ")");

  const std::size_t count = detail::peak_label_count(n);
  detail::PeakAmplitudes amps = detail::initial_amplitudes(t);

  double wscale = 0.0;
  for (const auto& [k, v] : amps.triple) wscale = std::max(wscale, std::cbrt(std::abs(v)));
  for (const auto& [k, v] : amps.pair) wscale = std::max(wscale, std::cbrt(std::abs(v)));
  for (double v : amps.single) wscale = std::max(wscale, std::cbrt(std::abs(v)));
  wscale /= std::sqrt(scale);

  auto attempt = [&](double lam, PeakedLHV& out) {
    const double peak_mass = static_cast<double>(count) / (lam * lam * lam);
    if (!(peak_mass < 1.0)) return false;
    std::vector<Peak> peaks;
    const double resid = detail::calibrate(amps, t, lam, labels, peaks);
    const RMatrix p = detail::peak_second(peaks, n);
    RMatrix cp = (cm - p) / (1.0 - peak_mass);
    cp = 0.5 * (cp + cp.transpose()).eval();
    if (detail::min_eigenvalue(cp) <= 0.0) return false;
    out.gaussian = gaussian_model(labels, cp);
    out.gaussian_weight = 1.0 - peak_mass;
    out.peaks = std::move(peaks);
    out.lambda = lam;
    out.label_count = count;
    out.target_covariance = cm;
    out.calibration_residual = resid;
    return true;
  };

  PeakedLHV model;
  if (lambda > 0.0) {
    if (!attempt(lambda, model))
      throw NumericalFailure("peaked_model: lambda " + std::to_string(lambda) + " does not give a positive definite adjusted covariance");
  } else {
    double lam = std::max({10.0, std::cbrt(4.0 * static_cast<double>(count)), 10.0 * wscale});
    bool ok = false;
    for (; lam <= kLambdaCap; lam *= 2.0) {
      const double peak_mass = static_cast<double>(count) / (lam * lam * lam);
      if (peak_mass >= 0.5) continue;
      if (!attempt(lam, model)) continue;
      if (detail::min_eigenvalue(model.gaussian.covariance) > 0.5 * cmin) {
        ok = true;
        break;
      }
    }
    if (!ok) throw NumericalFailure("peaked_model: lambda schedule exhausted at 2^40");
  }
  const double tscale = std::max(1.0, [&] {
    double m = 0.0;
    for (const auto& [k, v] : t.table()) m = std::max(m, std::abs(v));
    return m;
  }());
  if (model.calibration_residual > 1e-10 * tscale)
    throw NumericalFailure("peaked_model: calibration residual " + std::to_string(model.calibration_residual));

  model.output.labels = labels;
  model.output.offset = RVector::Zero(static_cast<Eigen::Index>(n));
  model.output.map = RMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  return model;
}

/// Raw moment E[prod X_l] of the output variables.
inline double model_moment(const PeakedLHV& m, std::span<const Label> labels) {
  if (labels.empty() || labels.size() > 4) throw std::invalid_argument("model_moment: need 1..4 labels");
  const auto idx = indices_of(m.output.labels, labels);
  const std::size_t k = idx.size();
  RMatrix rows(static_cast<Eigen::Index>(k), m.output.map.cols());
  RVector off(static_cast<Eigen::Index>(k));
  for (std::size_t t = 0; t < k; ++t) {
    rows.row(static_cast<Eigen::Index>(t)) = m.output.map.row(static_cast<Eigen::Index>(idx[t]));
    off(static_cast<Eigen::Index>(t)) = m.output.offset(static_cast<Eigen::Index>(idx[t]));
  }
  const RMatrix cov = rows * m.gaussian.covariance * rows.transpose();
  std::vector<std::size_t> seq(k);
  for (std::size_t t = 0; t < k; ++t) seq[t] = t;
  double total = m.gaussian_weight * gaussian_moment(off, cov, seq);
  for (const auto& p : m.peaks) {
    const RVector x = off + rows * p.position;
    total += p.weight * x.prod();
  }
  return total;
}

inline double model_moment(const PeakedLHV& m, std::initializer_list<Label> labels) {
  std::vector<Label> v(labels);
  return model_moment(m, std::span<const Label>(v));
}

inline Samples sample(const PeakedLHV& m, std::uint64_t seed, std::size_t n_draws) {
  if (n_draws < 1) throw std::invalid_argument("sample: n_draws must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  const auto r = m.gaussian.factor.cols();
  const auto n_out = static_cast<Eigen::Index>(m.output.labels.size());
  const double peak_mass = 1.0 - m.gaussian_weight;
  Samples s;
  s.draws.resize(static_cast<Eigen::Index>(n_draws), n_out);
  s.component.assign(n_draws, -1);
  RVector z(r);
  for (std::size_t t = 0; t < n_draws; ++t) {
    const double u = ud(rng);
    RVector y;
    if (u < peak_mass && !m.peaks.empty()) {
      auto p = static_cast<std::size_t>(u / peak_mass * static_cast<double>(m.peaks.size()));
      p = std::min(p, m.peaks.size() - 1);
      s.component[t] = static_cast<int>(p);
      y = m.peaks[p].position;
    } else {
      for (Eigen::Index k = 0; k < r; ++k) z(k) = nd(rng);
      y = m.gaussian.factor * z;
    }
    s.draws.row(static_cast<Eigen::Index>(t)) = (m.output.offset + m.output.map * y).transpose();
  }
  return s;
}

namespace detail {

inline nlohmann::json matrix_json(const RMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

inline nlohmann::json vector_json(const RVector& v) {
  nlohmann::json r = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) r.push_back(v(i));
  return r;
}

inline nlohmann::json labels_json(const std::vector<Label>& ls) {
  nlohmann::json r = nlohmann::json::array();
  for (const auto& l : ls) r.push_back(l.str());
  return r;
}

}  // namespace detail

inline nlohmann::json to_json(const PeakedLHV& m) {
  nlohmann::json peaks = nlohmann::json::array();
  for (const auto& p : m.peaks)
    peaks.push_back({{"position", detail::vector_json(p.position)}, {"weight", p.weight}, {"tag", p.tag}});
  return {{"schema", "qmoments.model/1"},
          {"type", "peaked"},
          {"labels", detail::labels_json(m.gaussian.labels)},
          {"covariance", detail::matrix_json(m.gaussian.covariance)},
          {"peaks", peaks},
          {"lambda", m.lambda},
          {"gaussian_weight", m.gaussian_weight},
          {"label_count", m.label_count},
          {"calibration_residual", m.calibration_residual},
          {"output",
           {{"labels", detail::labels_json(m.output.labels)},
            {"offset", detail::vector_json(m.output.offset)},
            {"map", detail::matrix_json(m.output.map)}}}};
}

inline nlohmann::json to_json(const GaussianLHV& g) {
  return {{"schema", "qmoments.model/1"},
          {"type", "gaussian"},
          {"labels", detail::labels_json(g.labels)},
          {"covariance", detail::matrix_json(g.covariance)},
          {"peaks", nlohmann::json::array()},
          {"lambda", nullptr}};
}

}  // namespace qmoments::lhv
