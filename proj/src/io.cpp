#include "bifbm/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace bifbm {

namespace {

void write_meta(std::ostream& os, const Metadata& meta) {
  for (const auto& [k, v] : meta) os << "# " << k << '=' << v << '\n';
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_path_csv(std::ostream& os, const Path& path, const Metadata& meta) {
  write_meta(os, meta);
  os << "t,value\n";
  for (std::size_t i = 0; i < path.grid.size(); ++i)
    os << format_double(path.grid[i]) << ',' << format_double(path.values[static_cast<Eigen::Index>(i)]) << '\n';
}

void write_ensemble_csv(std::ostream& os, const Ensemble& e, const Metadata& meta) {
  write_meta(os, meta);
  os << "replicate,t,value\n";
  for (Eigen::Index r = 0; r < e.values.cols(); ++r) {
    for (std::size_t i = 0; i < e.grid.size(); ++i) {
      os << r << ',' << format_double(e.grid[i]) << ',' << format_double(e.values(static_cast<Eigen::Index>(i), r))
         << '\n';
    }
  }
}

Path read_path_csv(std::istream& is) {
  std::string line;
  bool header = false;
  std::vector<double> t;
  std::vector<double> v;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "t,value") throw std::runtime_error("read_path_csv: expected header t,value");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("read_path_csv: malformed row '" + line + "'");
    t.push_back(std::stod(line.substr(0, comma)));
    v.push_back(std::stod(line.substr(comma + 1)));
  }
  Path p{Grid(std::move(t)), Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())), {}};
  return p;
}

}  // namespace bifbm
