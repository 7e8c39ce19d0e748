#ifndef BIFBM_REPORT_HPP
#define BIFBM_REPORT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bifbm {

struct ReportParams {
  std::optional<double> H;
  std::optional<double> K;
  double T = 0.0;
  std::size_t n = 0;
  std::size_t grid_points = 0;
};

/// Outcome of one named verification.
struct CheckReport {
  std::string check;
  ReportParams params;
  double statistic = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::size_t n_rep = 0;
  std::uint64_t master_seed = 0;
  nlohmann::json details = nlohmann::json::object();
};

/// {check, params:{H,K,T,n,grid_points}, statistic, tolerance, pass, n_rep,
///  master_seed, tool, version, details}
nlohmann::json to_json(const CheckReport& report);
CheckReport report_from_json(const nlohmann::json& j);

/// "PASS <check>: statistic=<..> tolerance=<..>"
std::string summary_line(const CheckReport& report);

bool all_pass(const std::vector<CheckReport>& reports);

}  // namespace bifbm

#endif  // BIFBM_REPORT_HPP
