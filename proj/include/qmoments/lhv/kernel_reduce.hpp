#pragma once

// Kernel reduction for contextual models.
//
// A kernel vector is acceptable for observer X when its X-part lies in a
// single setting of X. For each observer the acceptable part of the kernel
// is G = sum_s (K ∩ U_s), with U_s the vectors vanishing on X's other
// settings. The remainder is pushed out of the kernel by shifting only the
// cross-setting entries <X_s X_t>, s != t, which no experiment measures.

#include "qmoments/moments.hpp"

namespace qmoments::lhv {

struct KernelReduceResult {
  MomentTensor tensor;                 // C'' (order 2)
  RMatrix kernel;                      // orthonormal columns, all acceptable
  std::vector<double> epsilons;        // one per accepted step
  std::vector<std::string> observers;  // observer reduced at each step
  double tolerance = kKernelTol;
  int retries = 0;
};

namespace detail {

inline RMatrix orth(const RMatrix& a, double tol = 1e-10) {
  if (a.cols() == 0 || a.rows() == 0) return RMatrix(a.rows(), 0);
  Eigen::JacobiSVD<RMatrix> svd(a, Eigen::ComputeThinU);
  const RVector& s = svd.singularValues();
  const double top = s.size() ? s(0) : 0.0;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tol * std::max(1.0, top)) ++r;
  return svd.matrixU().leftCols(r);
}

/// Orthonormal basis of {x : a x = 0}.
inline RMatrix null_space(const RMatrix& a, Eigen::Index cols, double tol = 1e-10) {
  if (a.rows() == 0) return RMatrix::Identity(cols, cols);
  Eigen::JacobiSVD<RMatrix> svd(a, Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  const double top = s.size() ? s(0) : 0.0;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tol * std::max(1.0, top)) ++r;
  return svd.matrixV().rightCols(cols - r);
}

inline RMatrix take_rows(const RMatrix& m, const std::vector<Eigen::Index>& rows) {
  RMatrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

struct ObserverPlan {
  std::vector<std::vector<Eigen::Index>> settings;  // coordinates per setting
  RMatrix good;                                     // basis of G
  RMatrix delta;                                    // cross-setting perturbation
};

inline ObserverPlan plan_observer(const std::vector<Label>& labels, const std::string& observer, const RMatrix& k) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  std::map<int, std::vector<Eigen::Index>> by_setting;
  for (Eigen::Index i = 0; i < n; ++i)
    if (labels[static_cast<std::size_t>(i)].observer == observer) by_setting[labels[static_cast<std::size_t>(i)].setting].push_back(i);
  ObserverPlan p;
  for (auto& [s, idx] : by_setting) p.settings.push_back(idx);
  p.delta = RMatrix::Zero(n, n);
  const std::size_t ns = p.settings.size();
  if (ns < 2 || k.cols() == 0) {
    p.good = k;
    return p;
  }
  // G = sum_s K ∩ U_s
  RMatrix gcat(n, 0);
  for (std::size_t s = 0; s < ns; ++s) {
    std::vector<Eigen::Index> other;
    for (std::size_t t = 0; t < ns; ++t)
      if (t != s) other.insert(other.end(), p.settings[t].begin(), p.settings[t].end());
    const RMatrix coeff = null_space(take_rows(k, other), k.cols());
    if (coeff.cols() == 0) continue;
    RMatrix grown(n, gcat.cols() + coeff.cols());
    grown << gcat, k * coeff;
    gcat = std::move(grown);
  }
  p.good = orth(gcat);
  if (p.good.cols() == k.cols()) return p;

  // E_s: complement of P_s(G) inside setting s; Y: K -> concat E_s^T P_s K.
  std::vector<RMatrix> e(ns);
  Eigen::Index ytotal = 0;
  for (std::size_t s = 0; s < ns; ++s) {
    const RMatrix ts = orth(take_rows(p.good, p.settings[s]));
    const auto dim = static_cast<Eigen::Index>(p.settings[s].size());
    e[s] = ts.cols() == 0 ? RMatrix(RMatrix::Identity(dim, dim)) : null_space(ts.transpose(), dim);
    ytotal += e[s].cols();
  }
  RMatrix y(ytotal, k.cols());
  std::vector<Eigen::Index> offs(ns);
  Eigen::Index at = 0;
  for (std::size_t s = 0; s < ns; ++s) {
    offs[s] = at;
    if (e[s].cols()) y.middleRows(at, e[s].cols()) = e[s].transpose() * take_rows(k, p.settings[s]);
    at += e[s].cols();
  }
  const RMatrix q = orth(y);
  RMatrix m = q * q.transpose();
  for (std::size_t s = 0; s < ns; ++s)
    if (e[s].cols()) m.block(offs[s], offs[s], e[s].cols(), e[s].cols()).setZero();
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t t = 0; t < ns; ++t) {
      if (s == t || !e[s].cols() || !e[t].cols()) continue;
      const RMatrix blk = e[s] * m.block(offs[s], offs[t], e[s].cols(), e[t].cols()) * e[t].transpose();
      for (std::size_t a = 0; a < p.settings[s].size(); ++a)
        for (std::size_t b = 0; b < p.settings[t].size(); ++b)
          p.delta(p.settings[s][a], p.settings[t][b]) = blk(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  return p;
}

}  // namespace detail

/// True when every kernel vector can be written with one setting per observer.
inline bool kernel_is_reduced(const std::vector<Label>& labels, const RMatrix& kernel) {
  std::set<std::string> observers;
  for (const auto& l : labels) observers.insert(l.observer);
  for (const auto& o : observers)
    if (detail::plan_observer(labels, o, kernel).good.cols() != kernel.cols()) return false;
  return true;
}

/// epsilon0 <= 0 selects 1e-3 * max diagonal.
inline KernelReduceResult kernel_reduce(const MomentTensor& c, double epsilon0 = 0.0, double tol = kKernelTol) {
  if (c.order() != 2) throw std::invalid_argument("kernel_reduce: need an order-2 tensor");
  const auto& labels = c.labels();
  RMatrix cm = c.matrix();
  const PsdResult psd = psd_check(cm, 1e-10 * unit_diagonal_scale(cm));
  if (!psd.is_psd) throw std::invalid_argument("kernel_reduce: input is not positive semidefinite");

  KernelReduceResult r{c, kernel_matrix(cm, tol), {}, {}, tol, 0};
  std::set<std::string> observer_set;
  for (const auto& l : labels) observer_set.insert(l.observer);
  const std::vector<std::string> observers(observer_set.begin(), observer_set.end());

  double eps = epsilon0 > 0.0 ? epsilon0 : 1e-3 * unit_diagonal_scale(cm);
  const double floor = -1e-10 * unit_diagonal_scale(cm);
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& obs : observers) {
      const auto plan = detail::plan_observer(labels, obs, r.kernel);
      if (plan.good.cols() == r.kernel.cols()) continue;
      bool accepted = false;
      for (int attempt = 0; attempt < 12 && !accepted; ++attempt, eps /= 10.0) {
        RMatrix trial = cm + eps * plan.delta;
        trial = 0.5 * (trial + trial.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<RMatrix> es(trial, Eigen::EigenvaluesOnly);
        if (es.eigenvalues()(0) < floor) {
          ++r.retries;
          continue;
        }
        const RMatrix k2 = kernel_matrix(trial, tol);
        if (k2.cols() != plan.good.cols()) {
          ++r.retries;
          continue;
        }
        cm = trial;
        r.kernel = k2;
        r.epsilons.push_back(eps);
        r.observers.push_back(obs);
        accepted = true;
      }
      if (!accepted) throw NumericalFailure("kernel_reduce: epsilon schedule exhausted for observer " + obs);
      progress = true;
    }
  }
  MomentTensor out = MomentTensor::from_matrix(labels, cm);
  out.set_means(c.means());
  // Measurable entries are copied back verbatim so they stay bit-identical.
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i; j < labels.size(); ++j)
      if (labels[i].observer != labels[j].observer || labels[i].setting == labels[j].setting) out.set({i, j}, c(i, j));
  r.tensor = std::move(out);
  return r;
}

}  // namespace qmoments::lhv
