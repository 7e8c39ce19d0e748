// CSV serialization of paths and ensembles. Floats are written with 17
// significant digits; optional "# key=value" comment lines carry provenance
// ahead of the header row.
#ifndef BIFBM_IO_HPP
#define BIFBM_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bifbm/grid.hpp"

namespace bifbm {

using Metadata = std::vector<std::pair<std::string, std::string>>;

std::string format_double(double x);

/// Header `t,value`.
void write_path_csv(std::ostream& os, const Path& path, const Metadata& meta = {});
/// Header `replicate,t,value`, replicate-major.
void write_ensemble_csv(std::ostream& os, const Ensemble& ensemble, const Metadata& meta = {});

/// Reads a `t,value` CSV, skipping comment lines.
Path read_path_csv(std::istream& is);

}  // namespace bifbm

#endif  // BIFBM_IO_HPP
