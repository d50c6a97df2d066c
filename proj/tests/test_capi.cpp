#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>

#include "modmetric.h"
#include "support/oracles.hpp"

namespace {

const char* kDiskConfig = R"({
  "dim": 2,
  "grid": {"origin": [-1.05, -1.05], "extent": [2.1, 2.1], "cells": [97, 97]},
  "shapes": [{"op": "union", "type": "ball", "center": [0, 0], "radius": 1.0}]
})";

struct Domain {
  mm_domain* d = nullptr;
  ~Domain() { mm_domain_release(d); }
};

std::string slurp(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  REQUIRE(f);
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
  std::fclose(f);
  return out;
}

}  // namespace

TEST_CASE("domain creation, properties and errors") {
  Domain dom;
  REQUIRE(mm_domain_create_from_json(kDiskConfig, &dom.d) == MM_OK);
  CHECK(mm_domain_dim(dom.d) == 2);
  CHECK(mm_domain_spacing(dom.d) == doctest::Approx(2.1 / 97));
  CHECK(mm_domain_inside_count(dom.d) > 0);
  const double center[3] = {0, 0, 0};
  CHECK(mm_domain_boundary_distance(dom.d, center) == doctest::Approx(1.0).epsilon(0.05));

  mm_domain* bad = nullptr;
  CHECK(mm_domain_create_from_json("{not json", &bad) == MM_ERR_CONFIG);
  CHECK(std::string(mm_last_error()).size() > 0);
  CHECK(mm_domain_create_from_json(nullptr, &bad) == MM_ERR_PARAM);
  CHECK(mm_domain_create_from_file("/nonexistent/path.json", &bad) == MM_ERR_CONFIG);
}

TEST_CASE("capacity through the C surface matches the oracle") {
  Domain dom;
  REQUIRE(mm_domain_create_from_json(kDiskConfig, &dom.d) == MM_OK);
  mm_mask* mask = nullptr;
  REQUIRE(mm_mask_from_shape_json(dom.d, R"({"type":"ball","center":[0,0],"radius":0.5})",
                                  &mask) == MM_OK);
  CHECK(mm_mask_cell_count(mask) > 0);
  CHECK(mm_mask_is_connected(dom.d, mask) == 1);

  mm_capacity_result result;
  mm_field* field = nullptr;
  REQUIRE(mm_capacity(dom.d, mask, 2, nullptr, &result, &field) == MM_OK);
  const double oracle = oracles::ring_capacity(0.5, 1.0, 2);
  CHECK(std::fabs(result.value - oracle) < 0.04 * oracle);
  CHECK(result.n == 2);
  CHECK(result.h == doctest::Approx(2.1 / 97));

  char* audit = nullptr;
  REQUIRE(mm_field_check_json(field, &audit) == MM_OK);
  CHECK(std::string(audit).find("\"ok\": true") != std::string::npos);
  mm_string_free(audit);

  const char* vtk_path = "capi_field.vtk";
  REQUIRE(mm_field_write_vtk(field, vtk_path, "capi test") == MM_OK);
  const std::string vtk = slurp(vtk_path);
  CHECK(vtk.find("DATASET STRUCTURED_POINTS") != std::string::npos);
  CHECK(vtk.find("DIMENSIONS 97 97 1") != std::string::npos);
  std::remove(vtk_path);

  mm_field_release(field);
  mm_mask_release(mask);

  // n must match the dimension.
  mm_mask* m2 = nullptr;
  REQUIRE(mm_mask_from_shape_json(dom.d, R"({"type":"ball","center":[0,0],"radius":0.5})",
                                  &m2) == MM_OK);
  mm_capacity_result r2;
  CHECK(mm_capacity(dom.d, m2, 3, nullptr, &r2, nullptr) == MM_ERR_PARAM);
  mm_mask_release(m2);

  double ring = 0;
  REQUIRE(mm_ring_capacity_oracle(0.5, 1.0, 2, &ring) == MM_OK);
  CHECK(ring == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(mm_ring_capacity_oracle(1.5, 1.0, 2, &ring) == MM_ERR_PARAM);
}

TEST_CASE("three-spheres and cone functions") {
  double r3 = 0;
  REQUIRE(mm_three_spheres_radius(0.5, 0.0, &r3) == MM_OK);
  CHECK(r3 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mm_three_spheres_radius(1.5, 0.0, &r3) == MM_ERR_PARAM);

  const double x1[3] = {-1, 0, 0}, x2[3] = {0.5, 0, 0}, x0[3] = {0, 0, 0};
  mm_three_spheres_result res;
  REQUIRE(mm_three_spheres(x1, x2, x0, 1.0, 0.5, &res) == MM_OK);
  CHECK(res.theta == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(res.radius == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.interior_branch == 0);

  double inverted[3];
  REQUIRE(mm_invert_point(x1, res.center, res.radius, inverted) == MM_OK);
  CHECK(std::fabs(inverted[0] - x2[0]) < 1e-9);

  double a0 = 0, ext = 0, interior = 0;
  REQUIRE(mm_cone_alpha0(0.5, 1.0, &a0) == MM_OK);
  CHECK(a0 == doctest::Approx(M_PI / 3).epsilon(1e-12));
  REQUIRE(mm_cone_radii(0.0, 0.5, 1.0, &ext, &interior) == MM_OK);
  CHECK(ext == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(interior == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("polarization through the C surface") {
  Domain dom;
  REQUIRE(mm_domain_create_from_json(kDiskConfig, &dom.d) == MM_OK);
  const double pts[6] = {-0.55, 0.02, 0, 0.55, -0.03, 0};
  mm_mask* line = nullptr;
  REQUIRE(mm_mask_from_polyline(dom.d, pts, 2, &line) == MM_OK);

  const double center[3] = {0, 0, 0};
  mm_mask* polarized = nullptr;
  REQUIRE(mm_polarize_mask(dom.d, line, center, 0.4, &polarized) == MM_OK);
  CHECK(mm_mask_cell_count(polarized) > 0);

  mm_mask* restricted = nullptr;
  const double anchor[3] = {0, 0, 0};
  REQUIRE(mm_restrict_polarized(dom.d, polarized, center, 0.4, anchor, &restricted) == MM_OK);
  CHECK(mm_mask_is_connected(dom.d, restricted) == 1);

  const char* csv_path = "capi_mask.csv";
  REQUIRE(mm_mask_write_rle_csv(restricted, csv_path, "capi") == MM_OK);
  CHECK(slurp(csv_path).find("start,end") != std::string::npos);
  std::remove(csv_path);

  // Ball not inside the domain.
  mm_mask* bad = nullptr;
  const double edge_center[3] = {0.9, 0, 0};
  CHECK(mm_polarize_mask(dom.d, line, edge_center, 0.5, &bad) == MM_ERR_GEOMETRY);

  mm_mask_release(restricted);
  mm_mask_release(polarized);
  mm_mask_release(line);
}

TEST_CASE("metric, radial profile and level sets through the C surface") {
  Domain dom;
  REQUIRE(mm_domain_create_from_json(kDiskConfig, &dom.d) == MM_OK);
  const double x[3] = {0, 0, 0}, y[3] = {0.5, 0, 0};
  mm_metric_config cfg{2, 1, 11, 60, 1e-7};
  mm_metric_result* res = nullptr;
  REQUIRE(mm_metric(dom.d, x, y, 2, &cfg, &res) == MM_OK);
  const double mu = mm_metric_result_value(res);
  CHECK(std::fabs(mu - oracles::grotzsch_capacity(0.5)) < 0.06 * mu);
  CHECK(mm_metric_result_vertex_count(res) >= 2);
  double v0[3];
  mm_metric_result_vertex(res, 0, v0);
  CHECK(v0[0] == doctest::Approx(0.0));

  double segment = 0;
  REQUIRE(mm_metric_segment_bound(dom.d, x, y, 2, &segment) == MM_OK);
  CHECK(mu <= segment * (1 + 1e-9));

  char* json = nullptr;
  REQUIRE(mm_metric_result_to_json(res, 2, "{\"via\":\"capi\"}", &json) == MM_OK);
  CHECK(std::string(json).find("\"value\"") != std::string::npos);
  mm_string_free(json);
  mm_metric_result_release(res);

  const double outside[3] = {1.5, 0, 0};
  mm_metric_result* bad = nullptr;
  CHECK(mm_metric(dom.d, outside, y, 2, &cfg, &bad) == MM_ERR_GEOMETRY);

  const double dir[3] = {1, 0, 0};
  const double ts[3] = {0.2, 0.4, 0.6};
  double vals[3];
  REQUIRE(mm_radial_profile(dom.d, x, dir, ts, 3, 2, &cfg, vals) == MM_OK);
  CHECK(vals[0] < vals[1]);
  CHECK(vals[1] < vals[2]);

  const double dirs[6] = {1, 0, 0, 0, 1, 0};
  mm_levelset* ls = nullptr;
  REQUIRE(mm_mu_sphere(dom.d, x, vals[1], dirs, 2, 0.02, 2, &cfg, 1, &ls) == MM_OK);
  CHECK(mm_levelset_count(ls) == 2);
  double d0[3], radius = 0, achieved = 0;
  mm_levelset_sample(ls, 0, d0, &radius, &achieved);
  CHECK(radius == doctest::Approx(0.4).epsilon(0.05));
  double ratio = 0;
  REQUIRE(mm_levelset_roundness(ls, &ratio) == MM_OK);
  CHECK(ratio >= 1.0);
  const char* ls_path = "capi_levelset.csv";
  REQUIRE(mm_levelset_write_csv(ls, ls_path, "capi") == MM_OK);
  CHECK(slurp(ls_path).find("radius") != std::string::npos);
  std::remove(ls_path);
  mm_levelset_release(ls);
}

TEST_CASE("verify through the C surface") {
  char* report = nullptr;
  int passed = 0;
  REQUIRE(mm_verify("three-spheres", "{\"cases\":2}", &report, &passed) == MM_OK);
  CHECK(passed == 1);
  CHECK(std::string(report).find("\"suite\": \"three-spheres\"") != std::string::npos);
  mm_string_free(report);

  CHECK(mm_verify("bogus", "{}", &report, &passed) == MM_ERR_CONFIG);
  CHECK(std::string(mm_suite_names()).find("polarization") != std::string::npos);
}
