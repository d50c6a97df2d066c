#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/harness.hpp"

using namespace modmetric;

namespace {

SuiteConfig fast_config(const char* preset = "small") {
  SuiteConfig cfg;
  cfg.cases = 4;
  cfg.grid_preset = preset;
  cfg.jobs = 2;
  return cfg;
}

}  // namespace

TEST_CASE("three-spheres suite: exact geometry, all pass") {
  const SuiteReport report = verify_three_spheres(fast_config());
  CHECK(report.passed());
  CHECK(report.fail_count == 0);
  CHECK(report.pass_count > 100);
}

TEST_CASE("convergence suite n=2 passes") {
  const SuiteReport report = verify_convergence(fast_config());
  CHECK(report.passed());
}

TEST_CASE("polarization suite passes on small grids") {
  SuiteConfig cfg = fast_config();
  cfg.cases = 6;
  cfg.slack = 0.02;
  const SuiteReport report = verify_polarization(cfg);
  CHECK(report.passed());
  CHECK(report.pass_count + report.skip_count == 6);
}

TEST_CASE("monotonicity suite passes on small grids") {
  SuiteConfig cfg = fast_config();
  cfg.cases = 5;
  const SuiteReport report = verify_monotonicity(cfg);
  CHECK(report.passed());
  // Case 0 is the strict-gap spot check.
  REQUIRE(!report.records.empty());
  CHECK(report.records.front().inputs.find("strict-gap") != std::string::npos);
}

TEST_CASE("metric-axioms suite passes on small grids") {
  SuiteConfig cfg = fast_config();
  cfg.cases = 3;
  const SuiteReport report = verify_metric_axioms(cfg);
  CHECK(report.passed());
  bool has_growth = false;
  for (const auto& r : report.records)
    has_growth = has_growth || r.inputs.find("growth") != std::string::npos;
  CHECK(has_growth);
}

TEST_CASE("suite reports are deterministic given the seed") {
  SuiteConfig cfg = fast_config();
  cfg.cases = 4;
  const std::string a = report_to_json(verify_polarization(cfg));
  const std::string b = report_to_json(verify_polarization(cfg));
  CHECK(a == b);

  cfg.seed += 1;
  const std::string c = report_to_json(verify_polarization(cfg));
  CHECK(a != c);
}

TEST_CASE("suite failures carry replayable inputs") {
  SuiteConfig cfg = fast_config();
  cfg.cases = 3;
  cfg.slack = -1.0;  // impossible demand: margin >= 1 everywhere
  const SuiteReport report = verify_polarization(cfg);
  CHECK(!report.passed());
  for (const auto& r : report.records) {
    if (r.skipped || r.pass) continue;
    // The digest names the sphere and the case seed index.
    CHECK(r.inputs.find("case=") != std::string::npos);
    CHECK(r.inputs.find("r=") != std::string::npos);
  }
}

TEST_CASE("run_suite dispatch and unknown names") {
  CHECK_THROWS_AS(run_suite("nonsense", fast_config()), ConfigError);
  CHECK(suite_names().size() == 7);
  for (const std::string& name : {std::string("three-spheres")}) {
    const SuiteReport report = run_suite(name, fast_config());
    CHECK(report.suite == name);
  }
}

TEST_CASE("preset cells mapping") {
  CHECK(preset_cells("small", 2) == 65);
  CHECK(preset_cells("default", 2) == 129);
  CHECK(preset_cells("large", 2) == 257);
  CHECK(preset_cells("small", 3) == 33);
  CHECK(preset_cells("default", 3) == 49);
  CHECK(preset_cells("large", 3) == 65);
  CHECK_THROWS_AS(preset_cells("huge", 2), ConfigError);
}

TEST_CASE("report JSON carries the records") {
  const SuiteReport report = verify_three_spheres(fast_config());
  const std::string json = report_to_json(report);
  CHECK(json.find("\"suite\": \"three-spheres\"") != std::string::npos);
  CHECK(json.find("\"records\"") != std::string::npos);
  CHECK(json.find("\"worst_margin\"") != std::string::npos);
  const std::string table = report_to_table(report);
  CHECK(table.find("PASS") != std::string::npos);
}
