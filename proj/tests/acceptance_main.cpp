// Runs the acceptance battery and prints one PASS/FAIL line per criterion.
#include <fstream>
#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "bifbm/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bifbm acceptance battery"};
  std::vector<int> only;
  bifbm::AcceptanceOptions opts;
  std::string json_path;
  app.add_option("--only", only, "criterion ids to run (default: all)");
  app.add_option("--seed", opts.seed, "master seed");
  app.add_option("--workers", opts.workers, "worker threads");
  app.add_option("--json", json_path, "write the reports to this file");
  CLI11_PARSE(app, argc, argv);

  std::vector<const bifbm::Criterion*> selected;
  try {
    if (only.empty())
      for (const auto& c : bifbm::acceptance_criteria()) selected.push_back(&c);
    else
      for (int id : only) selected.push_back(&bifbm::find_criterion(id));
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  bool ok = true;
  nlohmann::json all = nlohmann::json::array();
  for (const auto* c : selected) {
    bifbm::CheckReport r;
    try {
      r = bifbm::run_criterion(*c, opts);
    } catch (const std::exception& e) {
      std::cout << "FAIL criterion_" << c->id << '_' << c->name << ": error: " << e.what() << std::endl;
      ok = false;
      continue;
    }
    std::cout << bifbm::summary_line(r) << (c->soft && !r.pass ? " (soft criterion, not blocking)" : "") << std::endl;
    ok = ok && (r.pass || c->soft);
    all.push_back(bifbm::to_json(r));
  }
  if (!json_path.empty()) {
    std::ofstream os(json_path);
    os << all.dump(2) << '\n';
    if (!os) return 3;
  }
  return ok ? 0 : 1;
}
