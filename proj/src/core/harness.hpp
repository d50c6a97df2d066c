#pragma once

#include <string>
#include <vector>

#include "core/metric.hpp"

namespace modmetric {

struct SuiteConfig {
  uint64_t seed = 20181202;
  int cases = 20;
  std::string grid_preset = "default";  // small | default | large
  double slack = 0.03;                  // relative tolerance of the suite
  int n_exp = 2;
  int jobs = 1;
};

struct CaseRecord {
  std::string inputs;  // replayable digest of the case
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // pass iff margin >= -slack (or skipped)
  bool pass = true;
  bool skipped = false;
};

struct SuiteReport {
  std::string suite;
  uint64_t seed = 0;
  double slack = 0.0;
  int n_exp = 2;
  std::string grid_preset;
  std::vector<CaseRecord> records;
  int pass_count = 0;
  int fail_count = 0;
  int skip_count = 0;
  double worst_margin = 0.0;

  bool passed() const { return fail_count == 0; }
};

// Cells per axis for a preset ("small" | "default" | "large") and dimension.
int preset_cells(const std::string& preset, int dim);

SuiteReport verify_polarization(const SuiteConfig& cfg);
SuiteReport verify_monotonicity(const SuiteConfig& cfg);
SuiteReport verify_metric_axioms(const SuiteConfig& cfg);
SuiteReport verify_starlike_and_cones(const SuiteConfig& cfg);
SuiteReport verify_roundness(const SuiteConfig& cfg);
SuiteReport verify_convergence(const SuiteConfig& cfg);
SuiteReport verify_three_spheres(const SuiteConfig& cfg);

// Dispatch by name: polarization, monotonicity, metric-axioms,
// starlike-cones, roundness, convergence, three-spheres.
SuiteReport run_suite(const std::string& name, const SuiteConfig& cfg);
std::vector<std::string> suite_names();

std::string report_to_json(const SuiteReport& report);
std::string report_to_table(const SuiteReport& report);

}  // namespace modmetric
