#pragma once

// Gaussian classical model reproducing a PSD correlation matrix.

#include "qmoments/moments.hpp"
#include "qmoments/random.hpp"

#include <span>

namespace qmoments::lhv {

struct GaussianLHV {
  std::vector<Label> labels;
  RMatrix covariance;     // analytic second moments
  RMatrix support_basis;  // orthonormal basis of range(covariance), n x r
  RMatrix factor;         // n x r with factor * factor^T == covariance (up to rounding)

  std::size_t size() const noexcept { return labels.size(); }
  bool singular() const noexcept { return support_basis.cols() < covariance.rows(); }
};

inline GaussianLHV gaussian_model(std::vector<Label> labels, const RMatrix& c) {
  require_symmetric(c, "gaussian_model");
  if (static_cast<std::size_t>(c.rows()) != labels.size()) throw std::invalid_argument("gaussian_model: label count mismatch");
  GaussianLHV g;
  g.labels = std::move(labels);
  g.covariance = c;
  const auto n = c.rows();
  if (n == 0) return g;
  const double scale = unit_diagonal_scale(c);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(c);
  const RVector& ev = es.eigenvalues();
  if (ev(0) < -1e-10 * scale) throw std::invalid_argument("gaussian_model: covariance has eigenvalue " + std::to_string(ev(0)));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < n; ++k)
    if (ev(k) > kKernelTol * scale) keep.push_back(k);
  g.support_basis.resize(n, static_cast<Eigen::Index>(keep.size()));
  g.factor.resize(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    g.support_basis.col(col) = es.eigenvectors().col(keep[j]);
    g.factor.col(col) = es.eigenvectors().col(keep[j]) * std::sqrt(ev(keep[j]));
  }
  return g;
}

inline GaussianLHV gaussian_model(const MomentTensor& c) {
  if (c.order() != 2) throw std::invalid_argument("gaussian_model: need an order-2 tensor");
  return gaussian_model(c.labels(), c.matrix());
}

/// E[prod_i X_idx[i]] for X ~ N(mean, cov), |idx| <= 4.
inline double gaussian_moment(const RVector& mean, const RMatrix& cov, std::span<const std::size_t> idx) {
  const std::size_t k = idx.size();
  if (k > 4) throw std::invalid_argument("gaussian_moment: order above 4");
  auto c = [&](std::size_t a, std::size_t b) {
    return cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  };
  // Expand prod (m_i + Z_i) over subsets S of centered factors.
  double total = 0.0;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    std::vector<std::size_t> z;
    double mprod = 1.0;
    for (std::size_t t = 0; t < k; ++t) {
      if (mask & (1u << t))
        z.push_back(idx[t]);
      else
        mprod *= mean(static_cast<Eigen::Index>(idx[t]));
    }
    if (mprod == 0.0) continue;
    double centered = 0.0;
    switch (z.size()) {
      case 0: centered = 1.0; break;
      case 2: centered = c(z[0], z[1]); break;
      case 4:
        centered = c(z[0], z[1]) * c(z[2], z[3]) + c(z[0], z[2]) * c(z[1], z[3]) + c(z[0], z[3]) * c(z[1], z[2]);
        break;
      default: centered = 0.0;  // odd orders vanish
    }
    total += mprod * centered;
  }
  return total;
}

inline std::vector<std::size_t> indices_of(const std::vector<Label>& all, std::span<const Label> wanted) {
  std::vector<std::size_t> out;
  for (const auto& w : wanted) {
    auto it = std::find(all.begin(), all.end(), w);
    if (it == all.end()) throw std::invalid_argument("model_moment: unknown label " + w.str());
    out.push_back(static_cast<std::size_t>(it - all.begin()));
  }
  return out;
}

inline double model_moment(const GaussianLHV& g, std::span<const Label> labels) {
  if (labels.empty() || labels.size() > 4) throw std::invalid_argument("model_moment: need 1..4 labels");
  const auto idx = indices_of(g.labels, labels);
  return gaussian_moment(RVector::Zero(g.covariance.rows()), g.covariance, idx);
}

inline double model_moment(const GaussianLHV& g, std::initializer_list<Label> labels) {
  std::vector<Label> v(labels);
  return model_moment(g, std::span<const Label>(v));
}

struct Samples {
  RMatrix draws;                 // n_draws x n_variables
  std::vector<int> component;    // -1 = Gaussian part, otherwise peak index
};

inline Samples sample(const GaussianLHV& g, std::uint64_t seed, std::size_t n_draws) {
  if (n_draws < 1) throw std::invalid_argument("sample: n_draws must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto r = g.factor.cols();
  Samples s;
  s.draws.resize(static_cast<Eigen::Index>(n_draws), n);
  s.component.assign(n_draws, -1);
  RVector z(r);
  for (std::size_t t = 0; t < n_draws; ++t) {
    for (Eigen::Index k = 0; k < r; ++k) z(k) = nd(rng);
    s.draws.row(static_cast<Eigen::Index>(t)) = (g.factor * z).transpose();
  }
  return s;
}

}  // namespace qmoments::lhv
