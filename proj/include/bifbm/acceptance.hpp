// The acceptance battery: one CheckReport per numbered criterion, with the
// tolerances fixed here.
#ifndef BIFBM_ACCEPTANCE_HPP
#define BIFBM_ACCEPTANCE_HPP

#include <cstdint>
#include <span>
#include <string>

#include "bifbm/report.hpp"

namespace bifbm {

struct AcceptanceOptions {
  std::uint64_t seed = 20240611;
  unsigned workers = 1;
};

struct Criterion {
  int id;
  const char* name;
  /// A failing soft criterion is reported but does not fail the battery.
  bool soft;
  CheckReport (*run)(const AcceptanceOptions&);
};

/// Criteria 1..13 in dependency order.
std::span<const Criterion> acceptance_criteria();

/// Throws std::out_of_range for an unknown id.
const Criterion& find_criterion(int id);

/// Runs one criterion; the report's check field is "criterion_<id>_<name>".
CheckReport run_criterion(const Criterion& c, const AcceptanceOptions& options);

}  // namespace bifbm

#endif  // BIFBM_ACCEPTANCE_HPP
