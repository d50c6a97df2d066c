#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/io.hpp"
#include "core/metric.hpp"
#include "support/oracles.hpp"

using namespace modmetric;

namespace {

GridDomain disk_domain(int cells, double radius = 1.0, double extent = 2.1) {
  DomainConfig dc;
  dc.grid = make_grid_spec(2, {-extent / 2, -extent / 2, 0}, {extent, extent, 0}, cells, cells, 1);
  ShapeOp ball;
  ball.is_ball = true;
  ball.radius = radius;
  dc.shapes.push_back(ball);
  return build_domain(dc);
}

MetricConfig quick_config(uint64_t seed = 7) {
  MetricConfig cfg;
  cfg.control_points = 2;
  cfg.restarts = 1;
  cfg.max_sweeps = 6;
  cfg.eval_budget = 90;
  cfg.seed = seed;
  cfg.probe_solver.tol = 1e-7;
  cfg.final_solver.tol = 1e-9;
  return cfg;
}

}  // namespace

TEST_CASE("Groetzsch value from the disk center") {
  GridDomain domain = disk_domain(129);
  MetricEvaluator eval(domain);
  MetricConfig cfg;  // spec defaults: m = 4, restarts = 3
  cfg.seed = 42;
  const MetricResult res = eval.modulus_metric({0, 0, 0}, {0.5, 0, 0}, 2, cfg);
  const double expected = oracles::grotzsch_capacity(0.5);
  CHECK(std::fabs(res.value - expected) < 0.05 * expected);

  // The optimizer never loses to its own straight-segment seed.
  MetricEvaluator eval2(domain);
  const double segment = eval2.segment_bound({0, 0, 0}, {0.5, 0, 0}, 2);
  CHECK(res.value <= segment * (1.0 + 1e-9));
}

TEST_CASE("metric result recomputation and upper-bound semantics") {
  GridDomain domain = disk_domain(97);
  MetricEvaluator eval(domain);
  const MetricResult res = eval.modulus_metric({-0.2, 0.1, 0}, {0.4, -0.3, 0}, 2, quick_config());
  // value = capacity(D, mask) of its own minimizer.
  CapacitySolver solver(domain);
  const double recomputed = solver.solve(res.mask, 2).value;
  CHECK(res.value == doctest::Approx(recomputed).epsilon(1e-6));
  // mask = rasterization of the minimizer polyline.
  const CompactMask again = rasterize_polyline(res.vertices, domain);
  CHECK(again.set.cells == res.mask.cells);
}

TEST_CASE("metric identity, positivity and symmetry") {
  GridDomain domain = disk_domain(97);
  MetricEvaluator eval(domain);

  SUBCASE("mu(x, x) = 0 by convention") {
    const MetricResult res = eval.modulus_metric({0.1, 0.1, 0}, {0.1, 0.1, 0}, 2, quick_config());
    CHECK(res.value == 0.0);
  }
  SUBCASE("positive for distinct cells") {
    const MetricResult res =
        eval.modulus_metric({0.1, 0.1, 0}, {0.1 + 3 * domain.spec().h, 0.1, 0}, 2, quick_config());
    CHECK(res.value > 0.0);
  }
  SUBCASE("symmetry within optimizer tolerance") {
    const double a = eval.modulus_metric({-0.3, 0.0, 0}, {0.3, 0.2, 0}, 2, quick_config(3)).value;
    const double b = eval.modulus_metric({0.3, 0.2, 0}, {-0.3, 0.0, 0}, 2, quick_config(4)).value;
    CHECK(std::fabs(a - b) <= 0.03 * std::fmax(a, b));
  }
}

TEST_CASE("metric rejects outside points; detached points are unreachable") {
  GridDomain domain = disk_domain(65);
  MetricEvaluator eval(domain);
  CHECK_THROWS_AS(eval.modulus_metric({1.2, 0, 0}, {0, 0, 0}, 2, quick_config()), GeometryError);

  // Hand-built two-component mask (bypasses build_domain's connectivity gate).
  const GridSpec spec = make_grid_spec(2, {-1, -1, 0}, {2, 2, 0}, 33, 33, 1);
  std::vector<uint8_t> inside(spec.cell_count(), 0);
  for (std::size_t c = 0; c < spec.cell_count(); ++c) {
    const Vec p = spec.center(static_cast<uint32_t>(c));
    if (dist(p, {-0.5, -0.5, 0}) < 0.3 || dist(p, {0.5, 0.5, 0}) < 0.3)
      inside[c] = 1;
  }
  GridDomain split(spec, std::move(inside), /*require_connected=*/false);
  MetricEvaluator eval2(split);
  CHECK_THROWS_WITH_AS(eval2.modulus_metric({-0.5, -0.5, 0}, {0.5, 0.5, 0}, 2, quick_config()),
                       "metric: points in different components", GeometryError);
}

TEST_CASE("segment bound dominates the optimized value and shrinks with separation") {
  GridDomain domain = disk_domain(97);
  MetricEvaluator eval(domain);
  const Vec x{0, 0, 0};
  const double h = domain.spec().h;

  const double seg = eval.segment_bound(x, {0.5, 0, 0}, 2);
  const double opt = eval.modulus_metric(x, {0.5, 0, 0}, 2, quick_config()).value;
  CHECK(opt <= seg * (1 + 1e-9));

  const double tiny1 = eval.segment_bound(x, {2 * h, 0, 0}, 2);
  const double tiny2 = eval.segment_bound(x, {4 * h, 0, 0}, 2);
  CHECK(tiny1 > 0.0);
  CHECK(tiny1 < tiny2);

  // Adjacent cells still carry a positive condenser.
  const double adj = eval.segment_bound(x, {h, 0, 0}, 2);
  CHECK(adj > 0.0);
}

TEST_CASE("radial profile is increasing and respects the inscribed ball") {
  GridDomain domain = disk_domain(129);
  MetricEvaluator eval(domain);
  const Vec x0{0, 0, 0};
  const double R0 = domain.boundary_distance(x0);

  const std::vector<double> ts{0.2, 0.4, 0.6};
  const std::vector<double> profile = eval.radial_profile(x0, {1, 0, 0}, ts, 2, quick_config());
  CHECK(profile[0] < profile[1]);
  CHECK(profile[1] < profile[2]);

  // t = 0 gives 0.
  const std::vector<double> zero = eval.radial_profile(x0, {1, 0, 0}, {0.0}, 2, quick_config());
  CHECK(zero[0] == 0.0);

  // Rotation symmetry of the centered disk: axis directions agree closely.
  const std::vector<double> other = eval.radial_profile(x0, {0, 1, 0}, ts, 2, quick_config());
  for (std::size_t i = 0; i < ts.size(); ++i)
    CHECK(std::fabs(profile[i] - other[i]) <= 0.02 * std::fmax(profile[i], other[i]));

  CHECK_THROWS_AS(eval.radial_profile(x0, {1, 0, 0}, {1.1 * R0}, 2, quick_config()),
                  GeometryError);
}

TEST_CASE("mu_sphere: centered disk is round, radii shrink with the level") {
  GridDomain domain = disk_domain(129);
  MetricEvaluator eval(domain);
  const Vec x0{0, 0, 0};

  std::vector<Vec> dirs;
  for (int i = 0; i < 8; ++i) {
    const double a = M_PI / 8 + 2 * M_PI * i / 8;
    dirs.push_back({std::cos(a), std::sin(a), 0});
  }

  // Pick a level safely attainable: mu at 0.45 R0.
  const double R0 = domain.boundary_distance(x0);
  const double level = eval.modulus_metric(x0, x0 + (0.45 * R0) * dirs[0], 2, quick_config()).value;

  const LevelSet ls = eval.mu_sphere(x0, level, dirs, 0.01, 2, quick_config());
  REQUIRE(ls.samples.size() == dirs.size());
  const double ratio = roundness_ratio(ls);
  CHECK(ratio >= 1.0);
  CHECK(ratio < 1.03);
  for (const auto& s : ls.samples) {
    CHECK(s.radius > 0.0);
    CHECK(std::fabs(s.achieved - level) <= 0.03 * level);
  }

  const LevelSet smaller = eval.mu_sphere(x0, 0.8 * level, dirs, 0.01, 2, quick_config());
  for (std::size_t i = 0; i < dirs.size(); ++i)
    CHECK(smaller.samples[i].radius < ls.samples[i].radius);

  // A level beyond the safe bracket errors out.
  const double too_big = eval.modulus_metric(x0, x0 + (0.95 * R0) * dirs[0], 2, quick_config()).value;
  CHECK_THROWS_WITH_AS(eval.mu_sphere(x0, 1.2 * too_big, dirs, 0.01, 2, quick_config()),
                       "mu_sphere: level escapes safe region", GeometryError);
}

TEST_CASE("mu_sphere parallel equals sequential") {
  GridDomain domain = disk_domain(97);
  MetricEvaluator eval(domain);
  const Vec x0{0.1, 0, 0};
  std::vector<Vec> dirs;
  for (int i = 0; i < 4; ++i) {
    const double a = 0.4 + 2 * M_PI * i / 4;
    dirs.push_back({std::cos(a), std::sin(a), 0});
  }
  const double level = eval.modulus_metric(x0, x0 + Vec{0.35, 0, 0}, 2, quick_config()).value;
  const LevelSet seq = eval.mu_sphere(x0, level, dirs, 0.01, 2, quick_config());
  const LevelSet par = mu_sphere_parallel(domain, x0, level, dirs, 0.01, 2, quick_config(), 2);
  REQUIRE(seq.samples.size() == par.samples.size());
  for (std::size_t i = 0; i < seq.samples.size(); ++i)
    CHECK(seq.samples[i].radius == doctest::Approx(par.samples[i].radius).epsilon(1e-12));
}

TEST_CASE("roundness_ratio basics") {
  LevelSet ls;
  ls.level = 1.0;
  ls.samples.push_back({{1, 0, 0}, 1.0, 1.0, 0});
  CHECK_THROWS_AS(roundness_ratio(ls), ParamError);
  ls.samples.push_back({{0, 1, 0}, 1.1, 1.0, 0});
  CHECK(roundness_ratio(ls) == doctest::Approx(1.1).epsilon(1e-12));
}

TEST_CASE("determinism: identical seeds give identical results") {
  GridDomain domain = disk_domain(97);
  MetricEvaluator e1(domain), e2(domain);
  MetricConfig cfg = quick_config(99);
  cfg.restarts = 2;
  const MetricResult a = e1.modulus_metric({-0.2, 0.35, 0}, {0.4, -0.1, 0}, 2, cfg);
  const MetricResult b = e2.modulus_metric({-0.2, 0.35, 0}, {0.4, -0.1, 0}, 2, cfg);
  CHECK(a.value == b.value);
  CHECK(a.evals == b.evals);
  REQUIRE(a.vertices.size() == b.vertices.size());
  for (std::size_t i = 0; i < a.vertices.size(); ++i)
    CHECK(dist(a.vertices[i], b.vertices[i]) == 0.0);
}

TEST_CASE("no relative extrema of mu(x0, .) on a coarse subgrid (Lemma 10 surrogate)") {
  GridDomain domain = disk_domain(65);
  MetricEvaluator eval(domain);
  const Vec x0{0.05, 0.05, 0};
  const double R0 = domain.boundary_distance(x0);

  // 5x5 subgrid of the inscribed ball, corners at ~0.79 R0.
  const int n = 5;
  std::vector<std::vector<double>> mu(n, std::vector<double>(n));
  const double step = 0.28 * R0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec p = x0 + Vec{(i - n / 2) * step, (j - n / 2) * step, 0};
      mu[i][j] = norm(p - x0) < 1e-12 ? 0.0
                                      : eval.modulus_metric(x0, p, 2, quick_config()).value;
    }
  const double slack = 0.03;
  for (int i = 1; i + 1 < n; ++i)
    for (int j = 1; j + 1 < n; ++j) {
      if (i == n / 2 && j == n / 2) continue;  // the minimum at x0 itself
      const double c = mu[i][j];
      const double lo = std::min(std::min(mu[i - 1][j], mu[i + 1][j]),
                                 std::min(mu[i][j - 1], mu[i][j + 1]));
      const double hi = std::max(std::max(mu[i - 1][j], mu[i + 1][j]),
                                 std::max(mu[i][j - 1], mu[i][j + 1]));
      CHECK(c <= hi * (1 + slack));
      const bool neighbor_is_center = std::abs(i - n / 2) + std::abs(j - n / 2) == 1;
      if (!neighbor_is_center) CHECK(c >= lo * (1 - slack));
    }
}

TEST_CASE("level set CSV export") {
  LevelSet ls;
  ls.center = {0, 0, 0};
  ls.level = 1.5;
  ls.samples.push_back({{1, 0, 0}, 0.5, 1.49, 0.001});
  ls.samples.push_back({{0, 1, 0}, 0.52, 1.51, 0.001});
  const std::string csv = levelset_to_csv(ls, "test");
  CHECK(csv.find("dir_x,dir_y,dir_z,radius,achieved_mu") != std::string::npos);
  CHECK(csv.find("0.5,") != std::string::npos);
}
