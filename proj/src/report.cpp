#include "bifbm/report.hpp"

#include <algorithm>
#include <cstdio>

#include "bifbm/version.hpp"

namespace bifbm {

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

nlohmann::json to_json(const CheckReport& r) {
  nlohmann::json j;
  j["check"] = r.check;
  j["params"] = {{"H", optional_number(r.params.H)},
                 {"K", optional_number(r.params.K)},
                 {"T", r.params.T},
                 {"n", r.params.n},
                 {"grid_points", r.params.grid_points}};
  j["statistic"] = r.statistic;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["n_rep"] = r.n_rep;
  j["master_seed"] = r.master_seed;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["details"] = r.details;
  return j;
}

CheckReport report_from_json(const nlohmann::json& j) {
  CheckReport r;
  r.check = j.at("check").get<std::string>();
  const auto& p = j.at("params");
  r.params.H = read_optional(p.at("H"));
  r.params.K = read_optional(p.at("K"));
  r.params.T = p.at("T").get<double>();
  r.params.n = p.at("n").get<std::size_t>();
  r.params.grid_points = p.at("grid_points").get<std::size_t>();
  r.statistic = j.at("statistic").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("statistic").get<double>();
  r.tolerance = j.at("tolerance").get<double>();
  r.pass = j.at("pass").get<bool>();
  r.n_rep = j.at("n_rep").get<std::size_t>();
  r.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("details")) r.details = j.at("details");
  return r;
}

std::string summary_line(const CheckReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, ": statistic=%.6g tolerance=%.6g", r.statistic, r.tolerance);
  return std::string(r.pass ? "PASS " : "FAIL ") + r.check + buf;
}

bool all_pass(const std::vector<CheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.pass; });
}

}  // namespace bifbm
