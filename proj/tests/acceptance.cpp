// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "support.hpp"

#include "qmoments/catalog/cfrd.hpp"
#include "qmoments/catalog/ghz.hpp"
#include "qmoments/catalog/mermin_peres.hpp"
#include "qmoments/catalog/pentagon.hpp"
#include "qmoments/catalog/sweeps.hpp"
#include "qmoments/lhv/factor_model.hpp"
#include "qmoments/lhv/fit.hpp"
#include "qmoments/search/search.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace qmoments;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream note;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      note << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.note << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0.0 && secs >= limit_s) {
    c.ok = false;
    c.note << " [runtime " << secs << " s over " << limit_s << " s]";
  }
  if (!c.ok) ++failures;
  std::printf("%s  criterion %2d  %-34s %8.3f s %s\n", c.ok ? "PASS" : "FAIL", id, title, secs, c.note.str().c_str());
  std::fflush(stdout);
}

std::string g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

int main() {
  criterion(1, "mermin-peres fourth moments", 1.0, [](Check& c) {
    const auto sq = catalog::mermin_peres_square();
    const auto mixed = catalog::mp_inequality(State::maximally_mixed(HilbertSpace::qubits(2)), sq);
    c.require(std::abs(mixed.lhs - 6.0) <= 1e-10, "mixed lhs " + g(mixed.lhs));
    c.require(std::abs(mixed.rhs - 3.0 * std::sqrt(3.0)) <= 1e-10, "mixed rhs " + g(mixed.rhs));
    const auto si = catalog::mp_state_independence(kDefaultSeed, 100);
    c.require(si.max_lhs_error <= 1e-10, "pure-state lhs error " + g(si.max_lhs_error));
    c.require(si.max_rhs_error <= 1e-10, "pure-state rhs error " + g(si.max_rhs_error));
    c.note << "lhs " << g(mixed.lhs) << " rhs " << g(mixed.rhs) << " pure-state max err " << g(std::max(si.max_lhs_error, si.max_rhs_error));
  });

  criterion(2, "ghz third moments", 1.0, [](Check& c) {
    const auto r = catalog::ghz_test();
    for (int k = 1; k <= 3; ++k) {
      const double v = r.details.at("sum_sq_" + std::to_string(k));
      c.require(std::abs(v) <= 1e-12, "<(A+B)^2> = " + g(v));
    }
    c.require(std::abs(r.details.at("A1A2A3") - 1.0) <= 1e-12, "A1A2A3 " + g(r.details.at("A1A2A3")));
    c.require(std::abs(r.details.at("B1B2B3") - 1.0) <= 1e-12, "B1B2B3 " + g(r.details.at("B1B2B3")));
    c.note << "A1A2A3 " << g(r.details.at("A1A2A3")) << " B1B2B3 " << g(r.details.at("B1B2B3"));
  });

  criterion(3, "qutrit pentagon", 1.0, [](Check& c) {
    const auto m = catalog::pentagon_model();
    double worst = m.direct_commutation_residual();
    for (double r : m.fourier_commutation_residuals()) worst = std::max(worst, r);
    const auto r = catalog::pentagon_test();
    const double s = r.details.at("S"), q = r.details.at("Q");
    c.require(worst <= 1e-12, "commutation residual " + g(worst));
    c.require(std::abs(s) <= 1e-12, "S " + g(s));
    c.require(std::abs(q - 8.0 * (std::sqrt(5.0) - 1.0)) <= 1e-10, "Q " + g(q));
    c.note << "Q " << g(q) << " S " << g(s) << " residual " << g(worst);
  });

  criterion(4, "exact det(4M)", 1.0, [](Check& c) {
    const auto m = catalog::m_matrix(10);
    c.require(m.det4m_string() == "-21772303951061875", "det " + m.det4m_string());
    for (std::size_t n = 0; n <= 9; ++n) c.require(catalog::m_matrix(n).det4m_sign() > 0, "N = " + std::to_string(n));
    c.note << "det(4M) at N=10: " << m.det4m_string();
  });

  criterion(5, "eigenpair search", 10.0, [](Check& c) {
    const auto r = search::min_eigenpair(10);
    c.require(std::abs(r.lambda_min + 0.00287931) <= 1e-8, "lambda_min(10) " + g(r.lambda_min));
    const auto& z = catalog::reference_z();
    double dev = 0.0;
    for (Eigen::Index i = 0; i < r.vector.size(); ++i) dev = std::max(dev, std::abs(r.vector(i) - z[static_cast<std::size_t>(i)]));
    c.require(r.vector.size() == 11 && dev <= 1e-5, "eigenvector deviation " + g(dev));
    const auto big = search::min_eigenpair(3000);
    c.require(std::abs(big.lambda_min + 0.093) <= 1e-3, "lambda_min(3000) " + g(big.lambda_min));
    c.note << "lambda_min(10) " << g(r.lambda_min) << " max |z dev| " << g(dev) << " lambda_min(3000) " << g(big.lambda_min);
  });

  criterion(6, "quadripartite oscillator violation", 0.0, [](Check& c) {
    const auto r = catalog::quadripartite_cfrd_fock(catalog::reference_z());
    const double diff = r.details.at("route_difference");
    c.require(r.violated, "not violated, margin " + g(r.margin));
    c.require(diff <= 1e-12, "route difference " + g(diff));
    c.note << "margin " << g(r.margin) << " route difference " << g(diff);
  });

  criterion(7, "ghz cfrd values", 0.0, [](Check& c) {
    const auto tri = catalog::ghz_tripartite_cfrd();
    const auto quad = catalog::ghz_quadripartite_cfrd();
    c.require(std::abs(tri.lhs - 16.0) <= 1e-10 && std::abs(tri.rhs - 8.0) <= 1e-10, "tri " + g(tri.lhs) + " vs " + g(tri.rhs));
    c.require(std::abs(quad.lhs - 64.0) <= 1e-10 && std::abs(quad.rhs - 16.0) <= 1e-10, "quad " + g(quad.lhs) + " vs " + g(quad.rhs));
    c.note << "tri " << g(tri.lhs) << " vs " << g(tri.rhs) << ", quad " << g(quad.lhs) << " vs " << g(quad.rhs);
  });

  criterion(8, "no-go property suites", 60.0, [](Check& c) {
    const auto two = catalog::two_party_sweep(kDefaultSeed, 1000, 4);
    c.require(two.min_margin >= -1e-9, "two-party margin " + g(two.min_margin));
    const auto osc = catalog::oscillator_sweep(kDefaultSeed, 10000);
    c.require(osc.violations == 0, std::to_string(osc.violations) + " oscillator violations");
    std::size_t psd_fail = 0;
    double worst_eig = 0.0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
      const auto [st, obs] = qmtest::unconstrained_instance(derive_seed(kDefaultSeed, t));
      const auto p = psd_check(correlation_matrix(st, obs));
      worst_eig = std::min(worst_eig, p.eigenvalues.front());
      if (!p.is_psd) ++psd_fail;
    }
    c.require(psd_fail == 0, std::to_string(psd_fail) + " non-PSD correlation matrices");
    c.note << "two-party min margin " << g(two.min_margin) << ", oscillator violations " << osc.violations
           << ", min C eigenvalue " << g(worst_eig);
  });

  criterion(9, "lhv reproduction oracle", 60.0, [](Check& c) {
    std::size_t accepted = 0;
    double worst = 0.0;
    for (std::uint64_t t = 0; accepted < 100 && t < 5000; ++t) {
      const auto in = qmtest::random_setting_instance(derive_seed(kDefaultSeed + 9, t));
      const auto& obs = *in.obs;
      const auto cm = correlation_matrix(in.state, obs);
      if (psd_check(cm).eigenvalues.front() <= 1e-6 * unit_diagonal_scale(cm.matrix())) continue;
      ++accepted;
      const auto res = lhv::fit(in.state, obs);
      for (std::size_t i = 0; i < obs.size(); ++i) {
        worst = std::max(worst, std::abs(lhv::model_moment(res.model, {obs.label(i)}) - expect(in.state, obs.op(i)).real()));
        for (std::size_t j = i; j < obs.size(); ++j) {
          if (!obs.jointly_measurable(i, j)) continue;
          const double q2 = expect(in.state, sym_product({obs.op(i), obs.op(j)})).real();
          worst = std::max(worst, std::abs(lhv::model_moment(res.model, {obs.label(i), obs.label(j)}) - q2));
          for (std::size_t k = j; k < obs.size(); ++k) {
            if (!obs.jointly_measurable(i, k) || !obs.jointly_measurable(j, k)) continue;
            const double q3 = expect(in.state, sym_product({obs.op(i), obs.op(j), obs.op(k)})).real();
            worst = std::max(worst, std::abs(lhv::model_moment(res.model, {obs.label(i), obs.label(j), obs.label(k)}) - q3));
          }
        }
      }
    }
    c.require(accepted == 100, "only " + std::to_string(accepted) + " PD instances");
    c.require(worst <= 1e-9, "peaked model deviation " + g(worst));

    const std::vector<std::string> keys = {"1:0",    "2:00",   "2:11",   "3:000",  "3:110",  "3:211",
                                           "3:222",  "4:0000", "4:1100", "4:2110", "4:1111", "4:2220",
                                           "4:3111", "4:2211", "4:3221", "4:3322", "4:3333"};
    double fm_worst = 0.0;
    std::set<std::string> cases;
    for (const auto& key : keys) {
      const auto p = qmtest::paulis_for_graph(key);
      c.require(!p.empty(), "no instance for graph " + key);
      if (p.empty()) continue;
      for (std::uint64_t t = 0; t < 10; ++t) {
        const auto [st, obs] = qmtest::graph_instance(p, derive_seed(kDefaultSeed + 99, t));
        const auto fm = lhv::factor_model(st, obs);
        cases.insert(fm.structure);
        fm_worst = std::max(fm_worst, qmtest::factor_model_error(st, obs, fm));
        c.require(fm.min_density() >= -1e-12, "negative density for " + key);
      }
    }
    c.require(fm_worst <= 1e-10, "factor model deviation " + g(fm_worst));
    // The 4-cycle row goes through the fit pipeline instead.
    const auto [st4, obs4] = qmtest::graph_instance(qmtest::paulis_for_graph("4:2222"), kDefaultSeed);
    lhv::FitOptions nc;
    nc.mode = lhv::FitMode::noncontextual;
    const auto cyc = lhv::fit(st4, obs4, nc);
    c.require(cyc.success, "4-cycle fit residual " + g(cyc.max_residual));
    c.note << accepted << " fits, max dev " << g(worst) << "; " << cases.size() << " graph cases, max dev " << g(fm_worst)
           << "; 4-cycle fit dev " << g(cyc.max_residual);
  });

  criterion(10, "ghz contextual boundary", 0.0, [](Check& c) {
    const ObservableSet obs = catalog::ghz_fit_set();
    const State st = catalog::ghz_state(3);
    lhv::FitOptions nc;
    nc.mode = lhv::FitMode::noncontextual;
    const auto bad = lhv::fit(st, obs, nc);
    const auto good = lhv::fit(st, obs);
    c.require(!bad.success, "noncontextual fit succeeded");
    c.require(std::abs(bad.max_residual - 2.0) <= 1e-10, "residual " + g(bad.max_residual));
    bool triple = bad.worst.size() == 3;
    for (const auto& l : bad.worst) triple = triple && (l.setting == bad.worst[0].setting) && l.setting <= 2;
    c.require(triple, "worst constraint is not a triple product");
    c.require(good.success, "contextual fit residual " + g(good.max_residual));
    std::string w;
    for (const auto& l : bad.worst) w += (w.empty() ? "" : ",") + l.str();
    c.note << "noncontextual residual " << g(bad.max_residual) << " on " << w << ", contextual residual " << g(good.max_residual);
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures ? 1 : 0;
}
