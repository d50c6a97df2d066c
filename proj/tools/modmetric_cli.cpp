// Command-line front end.  Everything numerical goes through the shared
// library's C interface (modmetric.h); this file only parses arguments,
// assembles provenance, and formats output.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "modmetric.h"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

int exit_code_for(mm_status status) {
  switch (status) {
    case MM_OK:
      return kExitOk;
    case MM_ERR_NUMERIC:
      return kExitNumeric;
    default:
      return kExitConfig;
  }
}

int report_failure(mm_status status) {
  std::cerr << "error: " << mm_last_error() << "\n";
  return exit_code_for(status);
}

bool parse_point(const std::string& text, double* out) {
  out[0] = out[1] = out[2] = 0.0;
  std::stringstream ss(text);
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= 3) return false;
    try {
      out[i++] = std::stod(item);
    } catch (...) {
      return false;
    }
  }
  return i >= 2;
}

std::string read_file_or_fail(const std::string& path, bool& ok) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) {
    ok = false;
    return {};
  }
  std::string content;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) content.append(buf, n);
  std::fclose(f);
  ok = true;
  return content;
}

bool write_file(const std::string& path, const std::string& content) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) return false;
  const size_t n = std::fwrite(content.data(), 1, content.size(), f);
  std::fclose(f);
  return n == content.size();
}

struct DomainHandle {
  mm_domain* d = nullptr;
  ~DomainHandle() { mm_domain_release(d); }
};
struct MaskHandle {
  mm_mask* m = nullptr;
  ~MaskHandle() { mm_mask_release(m); }
};

int load_domain(const std::string& config_path, DomainHandle& domain) {
  const mm_status st = mm_domain_create_from_file(config_path.c_str(), &domain.d);
  if (st != MM_OK) return report_failure(st);
  return kExitOk;
}

void print_report_table(const json& report) {
  std::cout << "suite " << report["suite"].get<std::string>()
            << " (seed=" << report["seed"] << ", grid=" << report["grid"].get<std::string>()
            << ", n=" << report["n"] << ", slack=" << report["slack"] << ")\n";
  for (const auto& r : report["records"]) {
    if (r["skipped"].get<bool>()) {
      std::cout << "  SKIP  " << r["inputs"].get<std::string>() << "\n";
    } else {
      std::cout << (r["pass"].get<bool>() ? "  pass  " : "  FAIL  ")
                << r["inputs"].get<std::string>() << "  lhs=" << r["lhs"].get<double>()
                << " rhs=" << r["rhs"].get<double>() << " margin=" << r["margin"].get<double>()
                << "\n";
    }
  }
  std::cout << (report["passed"].get<bool>() ? "PASS" : "FAIL") << "  "
            << report["pass_count"] << " passed, " << report["fail_count"] << " failed, "
            << report["skip_count"] << " skipped, worst margin "
            << report["worst_margin"].get<double>() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"modmetric: conformal capacity and modulus-metric laboratory"};
  app.require_subcommand(1);

  // ---- capacity ----------------------------------------------------------
  auto* cap_cmd = app.add_subcommand("capacity", "capacity of a condenser (D, K)");
  std::string cap_config, cap_kspec, cap_out, cap_vtk, cap_csv;
  int cap_n = 2;
  double cap_tol = 0, cap_eps = 0;
  int cap_iters = 0;
  cap_cmd->add_option("--config", cap_config, "domain config JSON file")->required();
  cap_cmd->add_option("--K", cap_kspec, "compact set spec (JSON text)")->required();
  cap_cmd->add_option("--n", cap_n, "exponent (2 or 3; must equal dim)");
  cap_cmd->add_option("--tol", cap_tol, "solver tolerance");
  cap_cmd->add_option("--epsilon", cap_eps, "n=3 regularizer");
  cap_cmd->add_option("--max-iters", cap_iters, "iteration cap");
  cap_cmd->add_option("--out", cap_out, "write CapacityResult JSON here");
  cap_cmd->add_option("--export-field", cap_vtk, "write potential as VTK structured points");
  cap_cmd->add_option("--export-field-csv", cap_csv, "write potential as CSV");

  // ---- metric -------------------------------------------------------------
  auto* met_cmd = app.add_subcommand("metric", "modulus metric mu_D(x, y)");
  std::string met_config, met_x, met_y, met_out;
  int met_n = 2, met_m = -1, met_restarts = 0, met_budget = 0;
  uint64_t met_seed = 1;
  met_cmd->add_option("--config", met_config)->required();
  met_cmd->add_option("--x", met_x, "first point, e.g. 0.0,0.0")->required();
  met_cmd->add_option("--y", met_y, "second point")->required();
  met_cmd->add_option("--n", met_n);
  met_cmd->add_option("--m", met_m, "interior control points");
  met_cmd->add_option("--restarts", met_restarts);
  met_cmd->add_option("--budget", met_budget, "capacity evaluation budget");
  met_cmd->add_option("--seed", met_seed);
  met_cmd->add_option("--out", met_out, "write MetricResult JSON here");

  // ---- sphere -------------------------------------------------------------
  auto* sph_cmd = app.add_subcommand("sphere", "mu_D level-set extraction");
  std::string sph_config, sph_x0, sph_out;
  std::vector<double> sph_levels;
  double sph_level = 0, sph_tol = 0.01;
  int sph_n = 2, sph_dirs = 16, sph_jobs = 0;
  uint64_t sph_seed = 1;
  sph_cmd->add_option("--config", sph_config)->required();
  sph_cmd->add_option("--x0", sph_x0)->required();
  sph_cmd->add_option("--level", sph_level, "target mu level");
  sph_cmd->add_option("--levels", sph_levels, "decreasing levels for a trend summary");
  sph_cmd->add_option("--directions", sph_dirs, "number of ray directions");
  sph_cmd->add_option("--tol", sph_tol, "relative level tolerance");
  sph_cmd->add_option("--n", sph_n);
  sph_cmd->add_option("--seed", sph_seed);
  sph_cmd->add_option("--jobs", sph_jobs);
  sph_cmd->add_option("--out", sph_out, "CSV path (levels get numbered suffixes)");

  // ---- polarize -----------------------------------------------------------
  auto* pol_cmd = app.add_subcommand("polarize", "polarize a compact set about a sphere");
  std::string pol_config, pol_kspec, pol_sphere, pol_anchor, pol_out;
  bool pol_restrict = false;
  pol_cmd->add_option("--config", pol_config)->required();
  pol_cmd->add_option("--K", pol_kspec)->required();
  pol_cmd->add_option("--sphere", pol_sphere, "cx,cy[,cz],r")->required();
  pol_cmd->add_flag("--restrict", pol_restrict, "restrict to the closed ball component");
  pol_cmd->add_option("--anchor", pol_anchor, "anchor point for --restrict");
  pol_cmd->add_option("--out", pol_out, "write mask RLE CSV here");

  // ---- three-spheres ------------------------------------------------------
  auto* tsp_cmd = app.add_subcommand("three-spheres", "the three-spheres construction");
  double tsp_k = 0, tsp_theta = -1, tsp_R = 1.0;
  std::string tsp_x0, tsp_x1, tsp_x2;
  tsp_cmd->add_option("--k", tsp_k, "radius ratio in (0,1)")->required();
  tsp_cmd->add_option("--theta", tsp_theta, "angle in [0,pi] (canonical configuration)");
  tsp_cmd->add_option("--R", tsp_R, "outer radius");
  tsp_cmd->add_option("--x0", tsp_x0, "center (general position mode)");
  tsp_cmd->add_option("--x1", tsp_x1, "point on the outer sphere");
  tsp_cmd->add_option("--x2", tsp_x2, "point on the inner sphere");

  // ---- verify / convergence -----------------------------------------------
  auto* ver_cmd = app.add_subcommand("verify", "run verification suites");
  std::vector<std::string> ver_suites;
  std::string ver_grid = "default", ver_out;
  int ver_cases = 20, ver_n = 2, ver_jobs = 0;
  double ver_slack = -1;
  uint64_t ver_seed = 20181202;
  ver_cmd->add_option("suites", ver_suites, "suite names or 'all'")->required();
  ver_cmd->add_option("--cases", ver_cases);
  ver_cmd->add_option("--grid", ver_grid, "small | default | large");
  ver_cmd->add_option("--slack", ver_slack, "relative slack override");
  ver_cmd->add_option("--n", ver_n);
  ver_cmd->add_option("--seed", ver_seed);
  ver_cmd->add_option("--jobs", ver_jobs);
  ver_cmd->add_option("--out", ver_out, "write aggregated report JSON here");

  auto* con_cmd = app.add_subcommand("convergence", "grid-refinement study (ring condenser)");
  int con_n = 2, con_jobs = 0;
  std::string con_out;
  con_cmd->add_option("--n", con_n);
  con_cmd->add_option("--jobs", con_jobs);
  con_cmd->add_option("--out", con_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  // ---------------------------------------------------------------- capacity
  if (cap_cmd->parsed()) {
    DomainHandle domain;
    if (const int rc = load_domain(cap_config, domain)) return rc;
    MaskHandle mask;
    mm_status st = mm_mask_from_shape_json(domain.d, cap_kspec.c_str(), &mask.m);
    if (st != MM_OK) return report_failure(st);
    mm_solver_config cfg{cap_eps, cap_iters, cap_tol};
    mm_capacity_result result;
    mm_field* field = nullptr;
    const bool want_field = !cap_vtk.empty() || !cap_csv.empty();
    st = mm_capacity(domain.d, mask.m, cap_n, &cfg, &result, want_field ? &field : nullptr);
    if (st != MM_OK) return report_failure(st);

    json provenance{{"command", "capacity"}, {"config", cap_config}, {"K", cap_kspec},
                    {"n", cap_n}, {"tol", cap_tol}, {"epsilon", cap_eps},
                    {"max_iters", cap_iters}};
    if (!cap_out.empty()) {
      json j{{"value", result.value}, {"iterations", result.iterations},
             {"residual", result.residual}, {"h", result.h}, {"n", result.n},
             {"config", provenance}};
      if (!write_file(cap_out, j.dump(2) + "\n")) {
        std::cerr << "error: cannot write " << cap_out << "\n";
        mm_field_release(field);
        return kExitConfig;
      }
    }
    if (field) {
      const std::string prov = provenance.dump();
      if (!cap_vtk.empty() && mm_field_write_vtk(field, cap_vtk.c_str(), prov.c_str()) != MM_OK) {
        mm_field_release(field);
        return report_failure(MM_ERR_IO);
      }
      if (!cap_csv.empty() && mm_field_write_csv(field, cap_csv.c_str(), prov.c_str()) != MM_OK) {
        mm_field_release(field);
        return report_failure(MM_ERR_IO);
      }
      mm_field_release(field);
    }
    std::printf("capacity = %.12g  (iterations=%d, residual=%.3g, h=%.6g)\n", result.value,
                result.iterations, result.residual, result.h);
    return kExitOk;
  }

  // ------------------------------------------------------------------ metric
  if (met_cmd->parsed()) {
    double x[3], y[3];
    if (!parse_point(met_x, x) || !parse_point(met_y, y)) {
      std::cerr << "error: points must be comma-separated coordinates\n";
      return kExitConfig;
    }
    DomainHandle domain;
    if (const int rc = load_domain(met_config, domain)) return rc;
    mm_metric_config cfg{met_m, met_restarts, met_seed, met_budget, 0.0};
    mm_metric_result* result = nullptr;
    const mm_status st = mm_metric(domain.d, x, y, met_n, &cfg, &result);
    if (st != MM_OK) return report_failure(st);
    const double value = mm_metric_result_value(result);
    if (!met_out.empty()) {
      json provenance{{"command", "metric"}, {"config", met_config}, {"x", met_x}, {"y", met_y},
                      {"n", met_n}, {"m", met_m}, {"restarts", met_restarts},
                      {"budget", met_budget}, {"seed", met_seed}};
      char* body = nullptr;
      mm_metric_result_to_json(result, mm_domain_dim(domain.d), provenance.dump().c_str(), &body);
      const bool ok = body && write_file(met_out, std::string(body) + "\n");
      mm_string_free(body);
      if (!ok) {
        std::cerr << "error: cannot write " << met_out << "\n";
        mm_metric_result_release(result);
        return kExitConfig;
      }
    }
    std::printf("mu = %.12g  (evals=%d, converged=%d)\n", value,
                mm_metric_result_evals(result), mm_metric_result_converged(result));
    mm_metric_result_release(result);
    return kExitOk;
  }

  // ------------------------------------------------------------------ sphere
  if (sph_cmd->parsed()) {
    double x0[3];
    if (!parse_point(sph_x0, x0)) {
      std::cerr << "error: --x0 must be comma-separated coordinates\n";
      return kExitConfig;
    }
    if (sph_levels.empty() && sph_level <= 0) {
      std::cerr << "error: provide --level or --levels\n";
      return kExitConfig;
    }
    DomainHandle domain;
    if (const int rc = load_domain(sph_config, domain)) return rc;
    const int dim = mm_domain_dim(domain.d);

    std::vector<double> dirs;
    for (int i = 0; i < sph_dirs; ++i) {
      if (dim == 2) {
        const double a = M_PI / sph_dirs + 2.0 * M_PI * i / sph_dirs;
        dirs.insert(dirs.end(), {std::cos(a), std::sin(a), 0.0});
      } else {
        // Fibonacci sphere.
        const double z = 1.0 - 2.0 * (i + 0.5) / sph_dirs;
        const double r = std::sqrt(1.0 - z * z);
        const double a = i * 2.399963229728653;
        dirs.insert(dirs.end(), {r * std::cos(a), r * std::sin(a), z});
      }
    }

    std::vector<double> levels = sph_levels;
    if (levels.empty()) levels.push_back(sph_level);
    mm_metric_config cfg{-1, 0, sph_seed, 0, 0.0};
    std::vector<double> ratios;
    for (std::size_t li = 0; li < levels.size(); ++li) {
      mm_levelset* ls = nullptr;
      const mm_status st = mm_mu_sphere(domain.d, x0, levels[li], dirs.data(), sph_dirs, sph_tol,
                                        sph_n, &cfg, sph_jobs, &ls);
      if (st != MM_OK) return report_failure(st);
      double ratio = 0;
      mm_levelset_roundness(ls, &ratio);
      ratios.push_back(ratio);
      std::printf("level %.9g: roundness ratio = %.9g\n", levels[li], ratio);
      if (!sph_out.empty()) {
        std::string path = sph_out;
        if (levels.size() > 1) path += "." + std::to_string(li);
        json provenance{{"command", "sphere"}, {"config", sph_config}, {"x0", sph_x0},
                        {"level", levels[li]}, {"directions", sph_dirs}, {"tol", sph_tol},
                        {"n", sph_n}, {"seed", sph_seed}};
        if (mm_levelset_write_csv(ls, path.c_str(), provenance.dump().c_str()) != MM_OK) {
          mm_levelset_release(ls);
          return report_failure(MM_ERR_IO);
        }
      }
      mm_levelset_release(ls);
    }
    if (ratios.size() > 1) {
      bool monotone = true;
      for (std::size_t i = 0; i + 1 < ratios.size(); ++i)
        monotone = monotone && ratios[i + 1] <= ratios[i] * 1.0001;
      std::printf("trend: ratios %s from %.9g to %.9g\n",
                  monotone ? "non-increasing" : "NOT monotone", ratios.front(), ratios.back());
    }
    return kExitOk;
  }

  // ---------------------------------------------------------------- polarize
  if (pol_cmd->parsed()) {
    double sphere[4] = {0, 0, 0, 0};
    {
      std::stringstream ss(pol_sphere);
      std::string item;
      std::vector<double> vals;
      while (std::getline(ss, item, ','))
        try {
          vals.push_back(std::stod(item));
        } catch (...) {
        }
      if (vals.size() < 3) {
        std::cerr << "error: --sphere must be cx,cy[,cz],r\n";
        return kExitConfig;
      }
      sphere[3] = vals.back();
      for (std::size_t i = 0; i + 1 < vals.size() && i < 3; ++i) sphere[i] = vals[i];
    }
    DomainHandle domain;
    if (const int rc = load_domain(pol_config, domain)) return rc;
    MaskHandle mask;
    mm_status st = mm_mask_from_shape_json(domain.d, pol_kspec.c_str(), &mask.m);
    if (st != MM_OK) return report_failure(st);
    MaskHandle polarized;
    st = mm_polarize_mask(domain.d, mask.m, sphere, sphere[3], &polarized.m);
    if (st != MM_OK) return report_failure(st);
    MaskHandle restricted;
    mm_mask* out_mask = polarized.m;
    if (pol_restrict) {
      double anchor[3];
      if (pol_anchor.empty() || !parse_point(pol_anchor, anchor)) {
        std::cerr << "error: --restrict needs --anchor\n";
        return kExitConfig;
      }
      st = mm_restrict_polarized(domain.d, polarized.m, sphere, sphere[3], anchor,
                                 &restricted.m);
      if (st != MM_OK) return report_failure(st);
      out_mask = restricted.m;
    }
    if (!pol_out.empty()) {
      json provenance{{"command", "polarize"}, {"config", pol_config}, {"K", pol_kspec},
                      {"sphere", pol_sphere}, {"restrict", pol_restrict}};
      if (mm_mask_write_rle_csv(out_mask, pol_out.c_str(), provenance.dump().c_str()) != MM_OK)
        return report_failure(MM_ERR_IO);
    }
    std::printf("cells: input=%zu output=%zu connected=%d\n", mm_mask_cell_count(mask.m),
                mm_mask_cell_count(out_mask), mm_mask_is_connected(domain.d, out_mask));
    return kExitOk;
  }

  // ----------------------------------------------------------- three-spheres
  if (tsp_cmd->parsed()) {
    mm_three_spheres_result result;
    mm_status st;
    if (!tsp_x0.empty() || !tsp_x1.empty() || !tsp_x2.empty()) {
      double x0[3], x1[3], x2[3];
      if (!parse_point(tsp_x0, x0) || !parse_point(tsp_x1, x1) || !parse_point(tsp_x2, x2)) {
        std::cerr << "error: --x0/--x1/--x2 must be comma-separated coordinates\n";
        return kExitConfig;
      }
      st = mm_three_spheres(x1, x2, x0, tsp_R, tsp_k, &result);
    } else {
      if (tsp_theta < 0) {
        std::cerr << "error: provide --theta or the three points\n";
        return kExitConfig;
      }
      // Canonical plane configuration of the construction.
      const double ks = tsp_k * std::sin(tsp_theta);
      const double x1[3] = {-tsp_R * std::sqrt(1.0 - ks * ks), tsp_R * ks, 0.0};
      const double x2[3] = {tsp_R * tsp_k * std::cos(tsp_theta), tsp_R * ks, 0.0};
      const double x0[3] = {0.0, 0.0, 0.0};
      st = mm_three_spheres(x1, x2, x0, tsp_R, tsp_k, &result);
    }
    if (st != MM_OK) return report_failure(st);
    json j{{"center", {result.center[0], result.center[1], result.center[2]}},
           {"radius", result.radius},
           {"theta", result.theta},
           {"branch", result.interior_branch ? "interior_branch" : "origin_branch"}};
    std::cout << j.dump() << "\n";
    return kExitOk;
  }

  // ---------------------------------------------------------- verify family
  const bool is_convergence = con_cmd->parsed();
  if (ver_cmd->parsed() || is_convergence) {
    std::vector<std::string> suites;
    if (is_convergence) {
      suites = {"convergence"};
      ver_n = con_n;
      ver_jobs = con_jobs;
      ver_out = con_out;
    } else {
      for (const std::string& s : ver_suites) {
        if (s == "all") {
          std::stringstream ss(mm_suite_names());
          std::string item;
          while (std::getline(ss, item, ',')) suites.push_back(item);
        } else {
          suites.push_back(s);
        }
      }
    }
    json aggregate = json::array();
    bool all_passed = true;
    for (const std::string& suite : suites) {
      json cfg{{"seed", ver_seed}, {"cases", ver_cases}, {"grid", ver_grid}, {"n", ver_n}};
      if (ver_slack > 0) cfg["slack"] = ver_slack;
      if (ver_jobs > 0) cfg["jobs"] = ver_jobs;
      char* report = nullptr;
      int passed = 0;
      const mm_status st = mm_verify(suite.c_str(), cfg.dump().c_str(), &report, &passed);
      if (st != MM_OK) return report_failure(st);
      const json j = json::parse(report);
      mm_string_free(report);
      print_report_table(j);
      aggregate.push_back(j);
      all_passed = all_passed && passed;
    }
    if (!ver_out.empty() && !write_file(ver_out, aggregate.dump(2) + "\n")) {
      std::cerr << "error: cannot write " << ver_out << "\n";
      return kExitConfig;
    }
    std::printf("%s\n", all_passed ? "ALL SUITES PASSED" : "SUITE FAILURES PRESENT");
    return all_passed ? kExitOk : 1;
  }

  return kExitConfig;
}
