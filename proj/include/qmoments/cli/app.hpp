#pragma once

// qmoments command line: parsing, dispatch, expectations and rendering.
// Exit codes: 0 ran and matched expectations, 1 an expectation or the
// pipeline failed, 2 usage or input error.

#include "qmoments/catalog/pentagon.hpp"
#include "qmoments/catalog/cfrd.hpp"
#include "qmoments/catalog/ghz.hpp"
#include "qmoments/catalog/m_matrix.hpp"
#include "qmoments/catalog/mermin_peres.hpp"
#include "qmoments/catalog/sweeps.hpp"
#include "qmoments/catalog/tsirelson.hpp"
#include "qmoments/io/moment_file.hpp"
#include "qmoments/lhv/fit.hpp"
#include "qmoments/search/search.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

namespace qmoments::cli {

enum class Format { text, json, csv };

struct RunConfig {
  std::string command;
  std::string target;
  std::uint64_t seed = kDefaultSeed;
  std::size_t trials = 0;  // 0: command default
  std::size_t dim = 4;
  std::optional<std::size_t> cutoff;
  std::optional<std::size_t> sweep;
  std::string z_file;
  std::string moments;
  bool noncontextual = false;
  std::string lambda = "auto";
  bool ghz = false;
  Format format = Format::text;
  std::string output;
  bool inject_b_sign_error = false;
};

/// Usage or input problem (exit 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Outcome {
  nlohmann::json doc;
  std::string text;
  std::string csv;
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

namespace detail {

inline std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

inline std::string report_text(const catalog::InequalityReport& r) {
  std::ostringstream os;
  os << r.name << "\n"
     << "  lhs       " << num(r.lhs) << "\n"
     << "  rhs       " << num(r.rhs) << "\n"
     << "  margin    " << num(r.margin) << "\n"
     << "  violated  " << (r.violated ? "yes" : "no") << "\n";
  for (const auto& [k, v] : r.details) os << "  " << std::left << std::setw(30) << k << num(v) << "\n";
  return os.str();
}

inline const char* kReportCsvHeader = "name,lhs,rhs,margin,violated,tolerance\n";

inline std::string report_csv_row(const catalog::InequalityReport& r) {
  std::ostringstream os;
  os << std::setprecision(17) << r.name << ',' << r.lhs << ',' << r.rhs << ',' << r.margin << ',' << (r.violated ? "true" : "false")
     << ',' << r.tolerance << '\n';
  return os.str();
}

inline void add_report(Outcome& o, const catalog::InequalityReport& r) {
  o.text += report_text(r);
  if (o.csv.empty()) o.csv = kReportCsvHeader;
  o.csv += report_csv_row(r);
}

inline void single_report(Outcome& o, const catalog::InequalityReport& r) {
  o.doc = r.to_json();
  add_report(o, r);
}

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline std::vector<double> read_z_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open z file " + path);
  std::vector<double> z;
  std::string tok;
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  // Either a JSON array or whitespace/comma separated numbers.
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && content[first] == '[') {
    try {
      z = nlohmann::json::parse(content).get<std::vector<double>>();
    } catch (const std::exception& e) {
      throw UsageError("z file " + path + ": " + e.what());
    }
  } else {
    std::string cleaned = content;
    for (char& c : cleaned)
      if (c == ',') c = ' ';
    std::istringstream is(cleaned);
    while (is >> tok) {
      try {
        std::size_t used = 0;
        z.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw UsageError("z file " + path + ": bad number '" + tok + "'");
      }
    }
  }
  if (z.empty()) throw UsageError("z file " + path + " holds no numbers");
  return z;
}

inline std::vector<double> unit(std::vector<double> z) {
  double s = 0.0;
  for (double v : z) s += v * v;
  for (double& v : z) v /= std::sqrt(s);
  return z;
}

// --- verify ----------------------------------------------------------------

inline catalog::InequalityReport verify_ghz(Outcome& o, const RunConfig& cfg) {
  auto r = catalog::ghz_test(cfg.inject_b_sign_error ? -1.0 : 1.0);
  r.seed = cfg.seed;
  for (int k = 1; k <= 3; ++k) {
    const double v = r.details.at("sum_sq_" + std::to_string(k));
    o.expect(std::abs(v) <= 1e-12, "ghz: <(A" + std::to_string(k) + "+B" + std::to_string(k) + ")^2> = " + num(v) + ", expected 0");
  }
  o.expect(near(r.details.at("A1A2A3"), 1.0, 1e-12), "ghz: <A1A2A3> = " + num(r.details.at("A1A2A3")) + ", expected 1");
  o.expect(near(r.details.at("B1B2B3"), 1.0, 1e-12), "ghz: <B1B2B3> = " + num(r.details.at("B1B2B3")) + ", expected 1");
  o.expect(r.violated, "ghz: noncontextual constraint not violated");
  return r;
}

inline catalog::InequalityReport verify_mermin_peres(Outcome& o, const RunConfig& cfg) {
  const auto sq = catalog::mermin_peres_square();
  auto r = catalog::mp_inequality(State::maximally_mixed(HilbertSpace::qubits(2)), sq);
  const std::size_t states = cfg.trials ? cfg.trials : 100;
  const auto ind = catalog::mp_state_independence(cfg.seed, states);
  const auto cl = catalog::mp_classical_check(cfg.seed, states);
  r.details["random_states"] = double(states);
  r.details["random_lhs_std"] = ind.lhs_std;
  r.details["random_max_lhs_error"] = ind.max_lhs_error;
  r.details["random_max_rhs_error"] = ind.max_rhs_error;
  r.details["classical_max_identity_error"] = cl.max_identity_error;
  r.details["classical_mean_S"] = cl.mean_s;
  r.details["classical_bound"] = cl.bound;
  r.details["classical_holds"] = cl.holds ? 1.0 : 0.0;
  r.seed = cfg.seed;
  r.params = {{"state", "maximally mixed"}, {"classical_distribution", "independent standard normal entries"}};
  const double rhs = 3.0 * std::sqrt(3.0);
  o.expect(near(r.lhs, 6.0, 1e-10), "mermin-peres: lhs = " + num(r.lhs) + ", expected 6");
  o.expect(near(r.rhs, rhs, 1e-10), "mermin-peres: rhs = " + num(r.rhs) + ", expected 3 sqrt 3");
  o.expect(ind.max_lhs_error <= 1e-10 && ind.max_rhs_error <= 1e-10, "mermin-peres: values depend on the state");
  o.expect(ind.lhs_std <= 1e-10, "mermin-peres: lhs spread " + num(ind.lhs_std) + " over random states");
  o.expect(cl.max_identity_error <= 1e-12, "mermin-peres: S = det N identity error " + num(cl.max_identity_error));
  o.expect(cl.holds, "mermin-peres: classical sample violates the bound");
  o.expect(r.violated, "mermin-peres: inequality not violated");
  return r;
}

inline catalog::InequalityReport verify_pentagon(Outcome& o, const RunConfig& cfg) {
  auto r = catalog::pentagon_test();
  r.seed = cfg.seed;
  const std::size_t trials = cfg.trials ? cfg.trials : 1000;
  r.details["classical_max_abs_Q"] = catalog::pentagon_classical_max_q(cfg.seed, trials);
  r.details["classical_trials"] = double(trials);
  for (const char* k : {"commutation_residual_1", "commutation_residual_2", "commutation_residual_3", "direct_commutation_residual"})
    o.expect(r.details.at(k) <= 1e-12, std::string("pentagon: ") + k + " = " + num(r.details.at(k)));
  o.expect(std::abs(r.details.at("S")) <= 1e-12, "pentagon: S = " + num(r.details.at("S")) + ", expected 0");
  o.expect(near(r.details.at("Q"), 8.0 * (std::sqrt(5.0) - 1.0), 1e-10), "pentagon: Q = " + num(r.details.at("Q")));
  o.expect(r.details.at("classical_max_abs_Q") <= 1e-9, "pentagon: classical sample with S = 0 has Q != 0");
  o.expect(r.violated, "pentagon: not violated");
  return r;
}

inline catalog::InequalityReport verify_tsirelson(Outcome& o, const RunConfig& cfg) {
  auto r = catalog::tsirelson_canonical();
  r.seed = cfg.seed;
  o.expect(near(r.lhs, 2.0 * std::numbers::sqrt2, 1e-12), "tsirelson: CHSH = " + num(r.lhs) + ", expected 2 sqrt 2");
  o.expect(!r.violated, "tsirelson: bound violated");
  return r;
}

// --- cfrd ------------------------------------------------------------------

inline catalog::InequalityReport cfrd_two_party(Outcome& o, const RunConfig& cfg) {
  const std::size_t trials = cfg.trials ? cfg.trials : 1000;
  if (cfg.dim < 2) throw UsageError("--dim must be at least 2");
  if (cfg.dim > 8) throw UsageError("--dim must be at most 8");
  const auto s = catalog::two_party_sweep(cfg.seed, trials, cfg.dim);
  auto r = catalog::summary_report("cfrd-two-party-sweep", s, cfg.seed, catalog::kReportTolerance);
  r.params = {{"trials", trials}, {"max_dim", cfg.dim}};
  o.expect(s.min_margin >= -1e-9, "cfrd two-party: margin " + num(s.min_margin) + " at trial " + std::to_string(s.worst_trial));
  return r;
}

inline std::vector<catalog::InequalityReport> cfrd_tri(Outcome& o, const RunConfig& cfg) {
  std::vector<catalog::InequalityReport> out;
  if (!cfg.z_file.empty()) {
    std::vector<double> z = read_z_file(cfg.z_file);
    catalog::InequalityReport r;
    try {
      r = catalog::oscillator_tripartite_bound(z);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    r.seed = cfg.seed;
    r.params = {{"z_file", cfg.z_file}};
    o.expect(r.margin >= -1e-12, "cfrd tri: oscillator bound violated, margin " + num(r.margin));
    out.push_back(r);
    return out;
  }
  auto g = catalog::ghz_tripartite_cfrd();
  g.seed = cfg.seed;
  o.expect(near(g.lhs, 16.0, 1e-10) && near(g.rhs, 8.0, 1e-10), "cfrd tri: GHZ values " + num(g.lhs) + " vs " + num(g.rhs));
  o.expect(g.violated, "cfrd tri: GHZ not violated");
  out.push_back(g);
  const std::size_t trials = cfg.trials ? cfg.trials : 10000;
  const auto s = catalog::oscillator_sweep(cfg.seed, trials);
  auto r = catalog::summary_report("cfrd-tripartite-oscillator-sweep", s, cfg.seed, 1e-12);
  r.params = {{"trials", trials}, {"max_length", 50}};
  o.expect(s.min_margin >= -1e-12, "cfrd tri: oscillator bound margin " + num(s.min_margin) + " at trial " + std::to_string(s.worst_trial));
  out.push_back(r);
  return out;
}

inline catalog::InequalityReport cfrd_quad(Outcome& o, const RunConfig& cfg) {
  if (cfg.ghz) {
    auto r = catalog::ghz_quadripartite_cfrd();
    r.seed = cfg.seed;
    o.expect(near(r.lhs, 64.0, 1e-10) && near(r.rhs, 16.0, 1e-10), "cfrd quad: GHZ values " + num(r.lhs) + " vs " + num(r.rhs));
    o.expect(r.violated, "cfrd quad: GHZ not violated");
    return r;
  }
  const bool reference = cfg.z_file.empty();
  const std::vector<double> z = reference ? catalog::reference_z() : read_z_file(cfg.z_file);
  catalog::InequalityReport r;
  try {
    r = catalog::quadripartite_cfrd_fock(z, cfg.cutoff.value_or(0));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  r.seed = cfg.seed;
  r.params["z_source"] = reference ? "reference" : cfg.z_file;
  const double diff = r.details.at("route_difference");
  o.expect(diff <= 1e-12, "cfrd quad: closed form and operator route differ by " + num(diff));
  const double rayleigh = search::violation_margin(unit(z));
  r.details["zMz"] = rayleigh;
  o.expect(std::abs(rayleigh - r.margin) <= 1e-12, "cfrd quad: z^T M z differs from the report margin");
  if (reference) o.expect(r.violated, "cfrd quad: reference z does not violate");
  return r;
}

// --- search ----------------------------------------------------------------

inline Outcome search_cutoff(const RunConfig& cfg, std::size_t n) {
  Outcome o;
  const auto e = search::min_eigenpair(n);
  const auto m = catalog::m_matrix(n);
  std::vector<double> z(e.vector.data(), e.vector.data() + e.vector.size());
  const double rq = search::violation_margin(z);
  o.doc = {{"schema", "qmoments.search/1"}, {"seed", cfg.seed}, {"eigen", e.to_json()}, {"det4M", m.det4m_string()},
           {"det4M_sign", m.det4m_sign()}, {"rayleigh_quotient", rq}, {"violates", e.lambda_min < 0.0}};
  o.expect(e.residual <= 1e-10 * e.matrix_norm, "search: residual " + num(e.residual) + " above 1e-10 ||M||");
  o.expect(std::abs(e.vector.norm() - 1.0) <= 1e-12, "search: eigenvector not unit norm");
  o.expect(std::abs(rq - e.lambda_min) <= 1e-10, "search: Rayleigh quotient " + num(rq) + " differs from lambda_min");
  o.expect((m.det4m_sign() < 0) == (n >= 10), "search: det(4M) sign " + std::to_string(m.det4m_sign()) + " at N = " + std::to_string(n));
  if (n == 10) {
    o.expect(near(e.lambda_min, -0.00287931, 1e-8), "search: lambda_min(10) = " + num(e.lambda_min) + ", expected -0.00287931");
    const auto pz = unit(catalog::reference_z());
    double worst = 0.0;
    for (std::size_t i = 0; i < pz.size(); ++i) worst = std::max(worst, std::abs(pz[i] - z[i]));
    o.doc["max_deviation_from_reference_z"] = worst;
    o.expect(worst <= 1e-5, "search: eigenvector deviates from the reference z by " + num(worst));
  }
  if (n == 3000) o.expect(near(e.lambda_min, -0.093, 1e-3), "search: lambda_min(3000) = " + num(e.lambda_min) + ", expected -0.093");
  std::ostringstream t;
  t << "cutoff      " << n << "\n"
    << "lambda_min  " << num(e.lambda_min) << "\n"
    << "residual    " << num(e.residual) << "\n"
    << "det(4M)     " << (m.det4m_string().size() > 60 ? std::string(m.det4m_sign() < 0 ? "negative" : "positive") + " (" +
                                                             std::to_string(m.det4m_string().size()) + " characters)"
                                                       : m.det4m_string())
    << "\n"
    << "z\n";
  for (std::size_t i = 0; i < z.size(); ++i) t << "  " << std::setw(5) << i << "  " << num(z[i]) << "\n";
  o.text = t.str();
  std::ostringstream c;
  c << "n,z_n\n" << std::setprecision(17);
  for (std::size_t i = 0; i < z.size(); ++i) c << i << ',' << z[i] << '\n';
  o.csv = c.str();
  return o;
}

inline Outcome search_sweep(const RunConfig& cfg, std::size_t n_max) {
  Outcome o;
  const auto t = search::cutoff_sweep(n_max);
  o.doc = t.to_json();
  o.doc["schema"] = "qmoments.sweep/1";
  o.doc["seed"] = cfg.seed;
  double worst_rise = 0.0;
  for (std::size_t i = 1; i < t.rows.size(); ++i) worst_rise = std::max(worst_rise, t.rows[i].lambda_min - t.rows[i - 1].lambda_min);
  o.expect(worst_rise <= 1e-12, "sweep: lambda_min increases by " + num(worst_rise));
  const long first = t.first_negative_determinant();
  o.expect(n_max >= 10 ? first == 10 : first == -1, "sweep: first negative det(4M) at N = " + std::to_string(first));
  o.csv = t.to_csv();
  std::ostringstream s;
  s << "    N  det(4M)  lambda_min\n";
  for (const auto& r : t.rows)
    s << std::setw(5) << r.cutoff << "  " << std::setw(7) << (r.det4m_sign > 0 ? "+" : r.det4m_sign < 0 ? "-" : "0") << "  "
      << num(r.lambda_min) << "\n";
  o.text = s.str();
  return o;
}

// --- lhv -------------------------------------------------------------------

inline nlohmann::json fit_json(const lhv::FitResult& r, lhv::FitMode mode) {
  nlohmann::json worst = nlohmann::json::array();
  for (const auto& l : r.worst) worst.push_back(l.str());
  nlohmann::json elim = nlohmann::json::array();
  for (const auto& l : r.eliminated) elim.push_back(l.str());
  return {{"mode", mode == lhv::FitMode::contextual ? "contextual" : "noncontextual"},
          {"success", r.success},
          {"max_residual", r.max_residual},
          {"worst", {{"labels", worst}, {"model", r.worst_model}, {"quantum", r.worst_quantum}}},
          {"checked", r.checked},
          {"kernel_dim", r.kernel_dim},
          {"removed_kernel_dim", r.removed_kernel_dim},
          {"eliminated", elim},
          {"model", lhv::to_json(r.model)}};
}

inline std::string fit_text(const lhv::FitResult& r, lhv::FitMode mode) {
  std::ostringstream os;
  os << "lhv fit (" << (mode == lhv::FitMode::contextual ? "contextual" : "noncontextual") << ")\n"
     << "  success             " << (r.success ? "yes" : "no") << "\n"
     << "  max residual        " << num(r.max_residual) << "\n"
     << "  worst moment        ";
  for (std::size_t i = 0; i < r.worst.size(); ++i) os << (i ? " " : "") << r.worst[i].str();
  os << "  model " << num(r.worst_model) << "  quantum " << num(r.worst_quantum) << "\n"
     << "  moments checked     " << r.checked << "\n"
     << "  kernel dim          " << r.kernel_dim << " (removed " << r.removed_kernel_dim << ")\n"
     << "  lambda              " << num(r.model.lambda) << "\n"
     << "  peaks               " << r.model.peaks.size() << "\n";
  return os.str();
}

inline std::string worst_string(const lhv::FitResult& r) {
  std::string s;
  for (std::size_t i = 0; i < r.worst.size(); ++i) s += (i ? "," : "") + r.worst[i].str();
  return s;
}

inline Outcome lhv_fit(const RunConfig& cfg) {
  if (cfg.moments.empty()) throw UsageError("lhv fit needs --moments FILE");
  lhv::FitOptions opt;
  opt.mode = cfg.noncontextual ? lhv::FitMode::noncontextual : lhv::FitMode::contextual;
  if (cfg.lambda != "auto") {
    try {
      std::size_t used = 0;
      opt.lambda = std::stod(cfg.lambda, &used);
      if (used != cfg.lambda.size() || !(opt.lambda > 0.0)) throw std::invalid_argument(cfg.lambda);
    } catch (const std::exception&) {
      throw UsageError("--lambda must be 'auto' or a positive number");
    }
  }
  io::MomentFile f;
  try {
    f = io::read_moment_file(cfg.moments);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  lhv::FitResult r;
  if (f.has_operators() && f.state) {
    ObservableSet obs = [&] {
      try {
        return f.observable_set();
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("moment file: ") + e.what());
      }
    }();
    r = lhv::fit(*f.state, obs, opt);
  } else if (f.second && f.third) {
    if (opt.mode == lhv::FitMode::noncontextual)
      throw UsageError("noncontextual fitting needs operator matrices and a state in the moment file");
    r = lhv::fit(*f.second, *f.third, opt);
  } else {
    throw UsageError("moment file needs operators with a state, or second and third tensors");
  }
  Outcome o;
  o.doc = fit_json(r, opt.mode);
  o.doc["schema"] = "qmoments.fit/1";
  o.doc["seed"] = cfg.seed;
  o.doc["source"] = cfg.moments;
  o.text = fit_text(r, opt.mode);
  std::ostringstream c;
  c << "success,max_residual,worst,checked,kernel_dim\n"
    << std::setprecision(17) << (r.success ? "true" : "false") << ',' << r.max_residual << ",\"" << worst_string(r) << "\","
    << r.checked << ',' << r.kernel_dim << '\n';
  o.csv = c.str();
  o.expect(r.success, "lhv fit: residual " + num(r.max_residual) + " on " + worst_string(r) + " (model " + num(r.worst_model) +
                          ", quantum " + num(r.worst_quantum) + ")");
  return o;
}

// --- report all ------------------------------------------------------------

inline Outcome report_all(const RunConfig& cfg) {
  Outcome o;
  nlohmann::json reports = nlohmann::json::array();
  auto take = [&](const catalog::InequalityReport& r) {
    reports.push_back(r.to_json());
    add_report(o, r);
  };
  RunConfig c = cfg;
  c.trials = 0;
  take(verify_ghz(o, c));
  take(verify_mermin_peres(o, c));
  take(verify_pentagon(o, c));
  take(verify_tsirelson(o, c));
  take(cfrd_two_party(o, c));
  for (const auto& r : cfrd_tri(o, c)) take(r);
  {
    RunConfig q = c;
    q.ghz = true;
    take(cfrd_quad(o, q));
    q.ghz = false;
    take(cfrd_quad(o, q));
  }
  const std::string csv = o.csv;
  const std::string text = o.text;
  nlohmann::json search = nlohmann::json::array();
  for (std::size_t n : {std::size_t{10}, std::size_t{3000}}) {
    Outcome s = search_cutoff(c, n);
    s.doc.erase("det4M");  // thousands of digits at large N; the sign stays
    search.push_back(s.doc);
    for (auto& f : s.failures) o.failures.push_back(f);
  }
  Outcome sw = search_sweep(c, 12);
  for (auto& f : sw.failures) o.failures.push_back(f);

  const auto obs = catalog::ghz_fit_set();
  const auto st = catalog::ghz_state(3);
  const auto nc = lhv::fit(st, obs, {lhv::FitMode::noncontextual});
  const auto cx = lhv::fit(st, obs, {lhv::FitMode::contextual});
  std::vector<std::string> want{"Q:1:1", "Q:1:2", "Q:1:3"};
  std::vector<std::string> got;
  for (const auto& l : nc.worst) got.push_back(l.str());
  o.expect(!nc.success && near(nc.max_residual, 2.0, 1e-10) && got == want,
           "lhv: noncontextual GHZ fit residual " + num(nc.max_residual) + " on " + worst_string(nc) + ", expected 2 on Q:1:1,Q:1:2,Q:1:3");
  o.expect(cx.success, "lhv: contextual GHZ fit residual " + num(cx.max_residual));
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& [r, m] : {std::pair{&nc, lhv::FitMode::noncontextual}, std::pair{&cx, lhv::FitMode::contextual}}) {
    nlohmann::json j = fit_json(*r, m);
    j.erase("model");
    fits.push_back(j);
  }
  o.doc = {{"schema", "qmoments.bundle/1"}, {"seed", cfg.seed}, {"reports", reports}, {"search", search}, {"sweep", sw.doc},
           {"lhv_ghz", fits}};
  o.text = text + "\n" + search_cutoff(c, 10).text + "\n" + sw.text + "\n" + fit_text(nc, lhv::FitMode::noncontextual) +
           fit_text(cx, lhv::FitMode::contextual);
  o.csv = csv;
  return o;
}

inline Outcome dispatch(const RunConfig& cfg) {
  Outcome o;
  if (cfg.command == "verify") {
    catalog::InequalityReport r;
    if (cfg.target == "ghz")
      r = verify_ghz(o, cfg);
    else if (cfg.target == "mermin-peres")
      r = verify_mermin_peres(o, cfg);
    else if (cfg.target == "appendix-d")
      r = verify_pentagon(o, cfg);
    else
      r = verify_tsirelson(o, cfg);
    single_report(o, r);
    return o;
  }
  if (cfg.command == "cfrd") {
    if (cfg.target == "two-party") {
      single_report(o, cfrd_two_party(o, cfg));
    } else if (cfg.target == "tri") {
      const auto rs = cfrd_tri(o, cfg);
      if (rs.size() == 1) {
        single_report(o, rs.front());
      } else {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& r : rs) {
          a.push_back(r.to_json());
          add_report(o, r);
        }
        o.doc = {{"schema", "qmoments.bundle/1"}, {"seed", cfg.seed}, {"reports", a}};
      }
    } else {
      single_report(o, cfrd_quad(o, cfg));
    }
    return o;
  }
  if (cfg.command == "search") {
    if (cfg.sweep) return search_sweep(cfg, *cfg.sweep);
    return search_cutoff(cfg, cfg.cutoff.value_or(10));
  }
  if (cfg.command == "lhv fit") return lhv_fit(cfg);
  if (cfg.command == "report all") return report_all(cfg);
  throw UsageError("no command given");
}

inline std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("QMOMENTS_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const std::string str(s);
    if (str.find('-') != std::string::npos) throw std::invalid_argument(str);
    const auto v = std::stoull(str, &used, 0);
    if (used != str.size()) throw std::invalid_argument(str);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("QMOMENTS_SEED is not an unsigned integer: ") + s);
  }
}

}  // namespace detail

/// Parses argv into a RunConfig; throws CLI::ParseError or UsageError.
inline RunConfig parse(int argc, const char* const* argv, CLI::App& app) {
  RunConfig cfg;
  std::string format = "text";
  std::optional<std::uint64_t> seed;
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json", "csv"}));
  app.add_option("--output,-o", cfg.output, "Write output to a file instead of stdout");
  app.add_option("--seed", seed, "Root seed (default QMOMENTS_SEED or " + std::to_string(kDefaultSeed) + ")");

  auto* verify = app.add_subcommand("verify", "Run a contextuality or Bell-type check");
  verify->add_option("test", cfg.target, "ghz | mermin-peres | appendix-d | tsirelson")
      ->required()
      ->check(CLI::IsMember({"ghz", "mermin-peres", "appendix-d", "tsirelson"}));
  verify->add_option("--trials", cfg.trials, "Random states or classical samples")->check(CLI::PositiveNumber);
  verify->add_flag("--inject-b-sign-error", cfg.inject_b_sign_error)->group("");

  auto* cfrd = app.add_subcommand("cfrd", "CFRD-type moment inequalities");
  cfrd->add_option("kind", cfg.target, "two-party | tri | quad")->required()->check(CLI::IsMember({"two-party", "tri", "quad"}));
  cfrd->add_option("--trials", cfg.trials, "Random instances")->check(CLI::PositiveNumber);
  cfrd->add_option("--dim", cfg.dim, "Largest local dimension for two-party instances");
  cfrd->add_option("--cutoff", cfg.cutoff, "Fock cutoff for the operator route (at least len(z))");
  cfrd->add_option("--z-file", cfg.z_file, "Coefficients z_n (JSON array or plain numbers)");
  cfrd->add_flag("--ghz", cfg.ghz, "quad: use the four-qubit GHZ state");

  auto* search = app.add_subcommand("search", "Lowest eigenpair of M or a cutoff sweep");
  auto* oc = search->add_option("--cutoff", cfg.cutoff, "Cutoff N");
  auto* os = search->add_option("--sweep", cfg.sweep, "Sweep N = 0..N_max");
  oc->excludes(os);

  auto* lhv = app.add_subcommand("lhv", "Classical model construction");
  lhv->require_subcommand(1);
  auto* fit = lhv->add_subcommand("fit", "Fit a peaked model to a moment file");
  fit->add_option("--moments", cfg.moments, "Moment file")->required();
  auto* fc = fit->add_flag("--contextual", "Allow different variables per setting (default)");
  auto* fn = fit->add_flag("--noncontextual", cfg.noncontextual, "Identical operators share one variable");
  fc->excludes(fn);
  fit->add_option("--lambda", cfg.lambda, "auto or a positive value");

  auto* report = app.add_subcommand("report", "Full reproduction bundle");
  std::string what;
  report->add_option("what", what, "all")->required()->check(CLI::IsMember({"all"}));

  app.parse(argc, argv);

  if (verify->parsed()) cfg.command = "verify";
  if (cfrd->parsed()) cfg.command = "cfrd";
  if (search->parsed()) cfg.command = "search";
  if (fit->parsed()) cfg.command = "lhv fit";
  if (report->parsed()) cfg.command = "report all";
  cfg.format = format == "json" ? Format::json : format == "csv" ? Format::csv : Format::text;
  if (seed)
    cfg.seed = *seed;
  else if (auto e = detail::env_seed())
    cfg.seed = *e;
  if (cfg.sweep && *cfg.sweep + 1 > catalog::kMaxTridiagonalDim) throw UsageError("--sweep exceeds the tridiagonal cap");
  if (cfg.command == "search" && cfg.cutoff && *cfg.cutoff + 1 > catalog::kMaxTridiagonalDim)
    throw UsageError("--cutoff exceeds the tridiagonal cap");
  return cfg;
}

inline std::string render(const Outcome& o, Format f) {
  switch (f) {
    case Format::json: return o.doc.dump(2) + "\n";
    case Format::csv: return o.csv;
    default: return o.text;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moment inequalities, classical models and violation search", "qmoments"};
  RunConfig cfg;
  try {
    cfg = parse(argc, argv, app);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  Outcome o;
  try {
    o = detail::dispatch(cfg);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return 1;
  }
  const std::string text = render(o, cfg.format);
  if (cfg.output.empty()) {
    out << text;
  } else {
    std::ofstream f(cfg.output, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << cfg.output << "\n";
      return 2;
    }
    f << text;
  }
  for (const auto& msg : o.failures) err << "expectation failed: " << msg << "\n";
  return o.failures.empty() ? 0 : 1;
}

}  // namespace qmoments::cli
