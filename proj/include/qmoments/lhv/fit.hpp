#pragma once

// End-to-end classical model for the measurable moments of an observable set.
//
// correlation matrix -> kernel reduction (contextual only) -> elimination of
// one variable per kernel equation -> peaked model on the remaining,
// strictly positive definite system -> affine re-expression of every label.

#include "qmoments/lhv/kernel_reduce.hpp"
#include "qmoments/lhv/peaked.hpp"

#include <functional>

namespace qmoments::lhv {

enum class FitMode { contextual, noncontextual };

struct FitOptions {
  FitMode mode = FitMode::contextual;
  double lambda = 0.0;  // <= 0: automatic
  double tolerance = 1e-9;
};

struct FitResult {
  PeakedLHV model;
  std::vector<Label> eliminated;
  std::size_t kernel_dim = 0;         // after reduction
  std::size_t removed_kernel_dim = 0;
  double max_residual = 0.0;
  std::vector<Label> worst;           // multiset with the largest residual
  double worst_model = 0.0;
  double worst_quantum = 0.0;
  std::size_t checked = 0;
  bool success = false;
};

namespace detail {

struct Elimination {
  std::vector<std::size_t> pivots;  // eliminated variables
  std::vector<std::size_t> free;
  RMatrix coeff;                    // x_pivot[r] = sum_f coeff(r, f) x_free[f]
};

/// Gauss-Jordan on kernel rows with the largest remaining entry as pivot.
inline Elimination eliminate(const RMatrix& kernel, std::size_t n) {
  RMatrix a = kernel.transpose();  // rows = equations
  const Eigen::Index rows = a.rows(), cols = a.cols();
  std::vector<bool> used_row(static_cast<std::size_t>(rows), false), is_pivot(n, false);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> order;
  for (Eigen::Index step = 0; step < rows; ++step) {
    double best = -1.0;
    Eigen::Index br = -1, bc = -1;
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (used_row[static_cast<std::size_t>(r)]) continue;
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (is_pivot[static_cast<std::size_t>(c)]) continue;
        if (std::abs(a(r, c)) > best) {
          best = std::abs(a(r, c));
          br = r;
          bc = c;
        }
      }
    }
    if (br < 0 || best <= 1e-12) break;
    a.row(br) /= a(br, bc);
    for (Eigen::Index r = 0; r < rows; ++r)
      if (r != br) a.row(r) -= a(r, bc) * a.row(br);
    used_row[static_cast<std::size_t>(br)] = true;
    is_pivot[static_cast<std::size_t>(bc)] = true;
    order.emplace_back(br, bc);
  }
  Elimination e;
  for (std::size_t i = 0; i < n; ++i)
    if (!is_pivot[i]) e.free.push_back(i);
  std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.second < y.second; });
  e.coeff.resize(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(e.free.size()));
  for (std::size_t r = 0; r < order.size(); ++r) {
    e.pivots.push_back(static_cast<std::size_t>(order[r].second));
    for (std::size_t f = 0; f < e.free.size(); ++f)
      e.coeff(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) = -a(order[r].first, static_cast<Eigen::Index>(e.free[f]));
  }
  return e;
}

/// Every multiset of size 1..3 from `n` items whose members pairwise satisfy `ok`.
inline std::vector<std::vector<std::size_t>> measurable_multisets(std::size_t n,
                                                                   const std::function<bool(std::size_t, std::size_t)>& ok) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({i});
    for (std::size_t j = i; j < n; ++j) {
      if (!ok(i, j)) continue;
      out.push_back({i, j});
      for (std::size_t k = j; k < n; ++k)
        if (ok(i, k) && ok(j, k)) out.push_back({i, j, k});
    }
  }
  return out;
}

struct Variables {
  ObservableSet set;                 // one entry per classical variable
  std::vector<std::size_t> of_label;  // label -> variable
};

inline Variables make_variables(const ObservableSet& obs, FitMode mode) {
  if (mode == FitMode::contextual) {
    std::vector<std::size_t> id(obs.size());
    for (std::size_t i = 0; i < id.size(); ++i) id[i] = i;
    return {obs, id};
  }
  // Noncontextual: identical operators share a variable. Each variable gets
  // its own setting so that no commutation is demanded among them.
  std::vector<Observable> vars;
  std::vector<std::size_t> of(obs.size());
  std::vector<std::size_t> rep;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    std::size_t v = rep.size();
    for (std::size_t r = 0; r < rep.size(); ++r) {
      const CMatrix d = obs.op(i).matrix() - obs.op(rep[r]).matrix();
      if (max_abs(d) <= kExactTol * std::max(1.0, max_abs(obs.op(i).matrix()))) {
        v = r;
        break;
      }
    }
    if (v == rep.size()) {
      rep.push_back(i);
      vars.push_back({Label{"N", static_cast<int>(v + 1), 1}, obs.op(i)});
    }
    of[i] = v;
  }
  return {ObservableSet(obs.space(), std::move(vars)), of};
}

}  // namespace detail

inline FitResult fit(const State& state, const ObservableSet& obs, const FitOptions& opt = {}) {
  if (!(state.space() == obs.space())) throw std::invalid_argument("fit: space mismatch");
  if (obs.size() == 0) throw std::invalid_argument("fit: empty observable set");
  const detail::Variables vars = detail::make_variables(obs, opt.mode);
  const std::size_t nv = vars.set.size();

  const MomentTensor c0 = correlation_matrix(state, vars.set);
  FitResult res{};
  MomentTensor c = c0;
  RMatrix kernel;
  if (opt.mode == FitMode::contextual) {
    const std::size_t before = kernel_matrix(c0.matrix()).cols();
    KernelReduceResult kr = kernel_reduce(c0);
    c = kr.tensor;
    kernel = kr.kernel;
    res.removed_kernel_dim = before - static_cast<std::size_t>(kernel.cols());
  } else {
    kernel = kernel_matrix(c0.matrix());
  }
  res.kernel_dim = static_cast<std::size_t>(kernel.cols());

  const detail::Elimination elim = detail::eliminate(kernel, nv);
  std::vector<bool> vmask(nv, false);
  for (Eigen::Index j = 0; j < kernel.cols(); ++j)
    for (std::size_t i = 0; i < nv; ++i)
      if (std::abs(kernel(static_cast<Eigen::Index>(i), j)) > 1e-9) vmask[i] = true;

  // Reduced system on the free variables.
  std::vector<Observable> free_obs;
  std::vector<bool> free_v;
  for (auto f : elim.free) {
    free_obs.push_back(vars.set[f]);
    free_v.push_back(vmask[f]);
  }
  const ObservableSet free_set(obs.space(), free_obs);
  const auto nf = static_cast<Eigen::Index>(elim.free.size());
  const RMatrix cfull = c.matrix();
  RMatrix cf(nf, nf);
  for (Eigen::Index a = 0; a < nf; ++a)
    for (Eigen::Index b = 0; b < nf; ++b) cf(a, b) = cfull(static_cast<Eigen::Index>(elim.free[a]), static_cast<Eigen::Index>(elim.free[b]));
  const MomentTensor cft = MomentTensor::from_matrix(free_set.labels(), cf);
  const MomentTensor tft = third_moments(state, free_set, Convention::kernel_split, &free_v);
  PeakedLHV model = peaked_model(cft, tft, opt.lambda);

  // Variable map: x_var = M_var * y_free.
  RMatrix var_map = RMatrix::Zero(static_cast<Eigen::Index>(nv), nf);
  for (Eigen::Index f = 0; f < nf; ++f) var_map(static_cast<Eigen::Index>(elim.free[static_cast<std::size_t>(f)]), f) = 1.0;
  for (std::size_t r = 0; r < elim.pivots.size(); ++r)
    var_map.row(static_cast<Eigen::Index>(elim.pivots[r])) = elim.coeff.row(static_cast<Eigen::Index>(r));
  const auto means = first_moments(state, obs);
  model.output.labels = obs.labels();
  model.output.offset.resize(static_cast<Eigen::Index>(obs.size()));
  model.output.map.resize(static_cast<Eigen::Index>(obs.size()), nf);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    model.output.offset(static_cast<Eigen::Index>(i)) = means[i];
    model.output.map.row(static_cast<Eigen::Index>(i)) = var_map.row(static_cast<Eigen::Index>(vars.of_label[i]));
  }
  for (auto p : elim.pivots)
    for (std::size_t i = 0; i < obs.size(); ++i)
      if (vars.of_label[i] == p) res.eliminated.push_back(obs.label(i));

  // Check every measurable multiset against the quantum value.
  auto measurable = [&](std::size_t i, std::size_t j) {
    return opt.mode == FitMode::contextual ? obs.jointly_measurable(i, j) : obs.commutes(i, j);
  };
  const auto sets = detail::measurable_multisets(obs.size(), measurable);
  for (const auto& ms : sets) {
    std::vector<Operator> ops;
    std::vector<Label> ls;
    for (auto i : ms) {
      ops.push_back(obs.op(i));
      ls.push_back(obs.label(i));
    }
    const double q = expect(state, sym_product(std::span<const Operator>(ops))).real();
    const double m = model_moment(model, std::span<const Label>(ls));
    const double d = std::abs(q - m);
    if (res.worst.empty() || d > res.max_residual) {
      res.max_residual = d;
      res.worst = ls;
      res.worst_model = m;
      res.worst_quantum = q;
    }
  }
  res.checked = sets.size();
  res.success = res.max_residual <= opt.tolerance;
  res.model = std::move(model);
  return res;
}

/// Same pipeline from tabulated (centered) moments when no operators are
/// available. Only the contextual mode makes sense here; the check runs
/// over measurable entries present in the tables.
inline FitResult fit(const MomentTensor& c, const MomentTensor& t, const FitOptions& opt = {}) {
  if (c.order() != 2 || t.order() != 3) throw std::invalid_argument("fit: need order-2 and order-3 tables");
  if (c.labels() != t.labels()) throw std::invalid_argument("fit: tables use different label lists");
  if (opt.mode != FitMode::contextual) throw std::invalid_argument("fit: noncontextual mode needs operator matrices");
  const auto& labels = c.labels();
  const std::size_t n = labels.size();
  FitResult res{};
  const std::size_t before = kernel_matrix(c.matrix()).cols();
  const KernelReduceResult kr = kernel_reduce(c);
  res.kernel_dim = static_cast<std::size_t>(kr.kernel.cols());
  res.removed_kernel_dim = before - res.kernel_dim;
  const detail::Elimination elim = detail::eliminate(kr.kernel, n);

  std::vector<Label> fl;
  for (auto f : elim.free) fl.push_back(labels[f]);
  const auto nf = static_cast<Eigen::Index>(fl.size());
  const RMatrix cfull = kr.tensor.matrix();
  RMatrix cf(nf, nf);
  for (Eigen::Index a = 0; a < nf; ++a)
    for (Eigen::Index b = 0; b < nf; ++b) cf(a, b) = cfull(static_cast<Eigen::Index>(elim.free[a]), static_cast<Eigen::Index>(elim.free[b]));
  MomentTensor tf(3, fl, t.convention());
  for (std::size_t a = 0; a < fl.size(); ++a)
    for (std::size_t b = a; b < fl.size(); ++b)
      for (std::size_t d = b; d < fl.size(); ++d) tf.set({a, b, d}, t(elim.free[a], elim.free[b], elim.free[d]));
  PeakedLHV model = peaked_model(MomentTensor::from_matrix(fl, cf), tf, opt.lambda);

  model.output.labels = labels;
  model.output.offset = RVector::Zero(static_cast<Eigen::Index>(n));
  model.output.map = RMatrix::Zero(static_cast<Eigen::Index>(n), nf);
  for (Eigen::Index f = 0; f < nf; ++f) model.output.map(static_cast<Eigen::Index>(elim.free[static_cast<std::size_t>(f)]), f) = 1.0;
  for (std::size_t r = 0; r < elim.pivots.size(); ++r) {
    model.output.map.row(static_cast<Eigen::Index>(elim.pivots[r])) = elim.coeff.row(static_cast<Eigen::Index>(r));
    res.eliminated.push_back(labels[elim.pivots[r]]);
  }

  auto measurable = [&](std::size_t i, std::size_t j) {
    return labels[i].observer != labels[j].observer || labels[i].setting == labels[j].setting;
  };
  const auto sets = detail::measurable_multisets(n, measurable);
  for (const auto& ms : sets) {
    if (ms.size() == 1) continue;  // centered tables: first moments are zero by construction
    std::vector<Label> ls;
    for (auto i : ms) ls.push_back(labels[i]);
    const double q = ms.size() == 2 ? c(ms[0], ms[1]) : t(ms[0], ms[1], ms[2]);
    const double m = model_moment(model, std::span<const Label>(ls));
    const double d = std::abs(q - m);
    if (res.worst.empty() || d > res.max_residual) {
      res.max_residual = d;
      res.worst = ls;
      res.worst_model = m;
      res.worst_quantum = q;
    }
    ++res.checked;
  }
  res.success = res.max_residual <= opt.tolerance;
  res.model = std::move(model);
  return res;
}

}  // namespace qmoments::lhv
