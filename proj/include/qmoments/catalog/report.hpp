#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace qmoments::catalog {

inline constexpr double kReportTolerance = 1e-9;

/// Named check: margin = rhs - lhs, negative means violated.
struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool violated = false;
  double tolerance = kReportTolerance;
  std::map<std::string, double> details;
  std::uint64_t seed = 0;
  nlohmann::json params = nlohmann::json::object();

  static InequalityReport make(std::string name, double lhs, double rhs, double tol = kReportTolerance) {
    if (!std::isfinite(lhs) || !std::isfinite(rhs)) throw std::runtime_error(name + ": non-finite lhs/rhs");
    InequalityReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.tolerance = tol;
    r.margin = rhs - lhs;
    r.violated = r.margin < -tol;
    return r;
  }

  nlohmann::json to_json() const {
    nlohmann::json d = nlohmann::json::object();
    for (const auto& [k, v] : details) d[k] = v;
    return {{"name", name}, {"lhs", lhs},  {"rhs", rhs},   {"margin", margin}, {"violated", violated},
            {"tolerance", tolerance}, {"details", d}, {"seed", seed}, {"params", params}};
  }
};

}  // namespace qmoments::catalog
