#include "core/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace modmetric {

namespace {

using nlohmann::json;

void push_record(SuiteReport& report, std::string digest, double lhs, double rhs, double margin,
                 double slack) {
  CaseRecord rec;
  rec.inputs = std::move(digest);
  rec.lhs = lhs;
  rec.rhs = rhs;
  rec.margin = margin;
  rec.pass = margin >= -slack;
  report.records.push_back(std::move(rec));
}

void push_skip(SuiteReport& report, std::string digest) {
  CaseRecord rec;
  rec.inputs = std::move(digest);
  rec.skipped = true;
  report.records.push_back(std::move(rec));
}

void finish(SuiteReport& report) {
  report.pass_count = report.fail_count = report.skip_count = 0;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (const CaseRecord& r : report.records) {
    if (r.skipped) {
      ++report.skip_count;
      continue;
    }
    if (r.pass)
      ++report.pass_count;
    else
      ++report.fail_count;
    report.worst_margin = std::fmin(report.worst_margin, r.margin);
  }
  if (!std::isfinite(report.worst_margin)) report.worst_margin = 0.0;
}

SuiteReport make_report(const char* name, const SuiteConfig& cfg) {
  SuiteReport report;
  report.suite = name;
  report.seed = cfg.seed;
  report.slack = cfg.slack;
  report.n_exp = cfg.n_exp;
  report.grid_preset = cfg.grid_preset;
  return report;
}

std::string digest_of(std::initializer_list<std::pair<const char*, double>> kv,
                      const std::string& head) {
  std::ostringstream s;
  s << head;
  s.precision(12);
  for (const auto& [k, v] : kv) s << " " << k << "=" << v;
  return s.str();
}

int dim_of(const SuiteConfig& cfg) { return cfg.n_exp == 3 ? 3 : 2; }

GridSpec preset_spec(const SuiteConfig& cfg, double extent) {
  const int dim = dim_of(cfg);
  const int n = preset_cells(cfg.grid_preset, dim);
  const Vec origin{-0.5 * extent, -0.5 * extent, dim == 3 ? -0.5 * extent : 0.0};
  return make_grid_spec(dim, origin, {extent, extent, dim == 3 ? extent : 0.0}, n, n, n);
}

GridDomain ball_domain(const SuiteConfig& cfg, double radius, const Vec& center = {},
                       double extent = 2.2) {
  DomainConfig dc;
  dc.grid = preset_spec(cfg, extent);
  ShapeOp op;
  op.is_ball = true;
  op.center = center;
  op.radius = radius;
  dc.shapes.push_back(op);
  return build_domain(dc);
}

Vec random_dir(Rng& rng, int dim) {
  for (;;) {
    Vec v{rng.uniform(-1, 1), rng.uniform(-1, 1), dim == 3 ? rng.uniform(-1, 1) : 0.0};
    const double n = norm(v);
    if (n > 1e-3 && n <= 1.0) return (1.0 / n) * v;
  }
}

Vec random_in_ball(Rng& rng, const Vec& center, double radius, int dim) {
  const Vec d = random_dir(rng, dim);
  const double r = radius * std::pow(rng.u01(), 1.0 / dim);
  return center + r * d;
}

// All cells whose centers lie in the closed ball; all_inside reports whether
// every such cell is an inside cell of the domain.
CellSet cells_in_ball(const GridDomain& domain, const Vec& center, double radius,
                      bool* all_inside = nullptr) {
  const GridSpec& spec = domain.spec();
  std::vector<uint32_t> cells;
  bool ok = true;
  for (std::size_t c = 0; c < spec.cell_count(); ++c) {
    if (dist(spec.center(static_cast<uint32_t>(c)), center) <= radius) {
      cells.push_back(static_cast<uint32_t>(c));
      ok = ok && domain.inside(static_cast<uint32_t>(c));
    }
  }
  if (all_inside) *all_inside = ok;
  return CellSet::from(std::move(cells));
}

bool ball_inside_domain(const GridDomain& domain, const Sphere& s) {
  bool ok = false;
  cells_in_ball(domain, s.center, s.radius, &ok);
  return ok;
}

MetricConfig light_metric_config(uint64_t seed) {
  MetricConfig cfg;
  cfg.control_points = 2;
  cfg.restarts = 1;
  cfg.max_sweeps = 6;
  cfg.eval_budget = 90;
  cfg.seed = seed;
  cfg.probe_solver.tol = 1e-7;
  cfg.final_solver.tol = 1e-8;
  return cfg;
}

}  // namespace

int preset_cells(const std::string& preset, int dim) {
  if (preset == "small") return dim == 3 ? 33 : 65;
  if (preset == "default") return dim == 3 ? 49 : 129;
  if (preset == "large") return dim == 3 ? 65 : 257;
  throw ConfigError("unknown grid preset: " + preset);
}

SuiteReport verify_polarization(const SuiteConfig& cfg) {
  SuiteReport report = make_report("polarization", cfg);
  const int dim = dim_of(cfg);
  const int cases = std::max(1, cfg.cases);
  std::vector<std::vector<CaseRecord>> slots(cases);

  parallel_for(cases, std::max(1, cfg.jobs), [&](std::size_t ci) {
    Rng rng(derive_seed(cfg.seed, ci));
    const std::string head = "polarization case=" + std::to_string(ci);
    try {
      // Domain: box, or box minus an interior ball.
      DomainConfig dc;
      dc.grid = preset_spec(cfg, 2.2);
      ShapeOp box;
      box.is_ball = false;
      box.box_min = {-0.95, -0.95, dim == 3 ? -0.95 : 0.0};
      box.box_max = {0.95, 0.95, dim == 3 ? 0.95 : 0.0};
      dc.shapes.push_back(box);
      const bool with_hole = rng.u01() < 0.5;
      if (with_hole) {
        ShapeOp hole;
        hole.is_ball = true;
        hole.subtract = true;
        hole.center = random_in_ball(rng, {}, 0.45, dim);
        hole.radius = rng.uniform(0.2, 0.35);
        dc.shapes.push_back(hole);
      }
      GridDomain domain = build_domain(dc);

      // Connected compact K: a random rasterized polyline.
      CompactMask K;
      bool have_k = false;
      for (int tries = 0; tries < 30 && !have_k; ++tries) {
        const int nv = 2 + static_cast<int>(rng.index(3));
        std::vector<Vec> verts;
        for (int v = 0; v < nv; ++v) verts.push_back(random_in_ball(rng, {}, 0.8, dim));
        try {
          K = rasterize_polyline(verts, domain);
          have_k = true;
        } catch (const std::exception&) {
        }
      }
      if (!have_k) {
        slots[ci].push_back({head + " (no admissible continuum)", 0, 0, 0, true, true});
        return;
      }

      Sphere s;
      bool have_s = false;
      for (int tries = 0; tries < 30 && !have_s; ++tries) {
        s.center = random_in_ball(rng, {}, 0.55, dim);
        s.radius = rng.uniform(0.18, 0.4);
        have_s = ball_inside_domain(domain, s);
      }
      if (!have_s) {
        slots[ci].push_back({head + " (no admissible sphere)", 0, 0, 0, true, true});
        return;
      }

      const CellSet Kp = polarize_mask(domain, K.set, s);
      if (Kp.empty()) {
        slots[ci].push_back({head + " (empty polarized set)", 0, 0, 0, true, true});
        return;
      }
      CapacitySolver solver(domain);
      const double cap_k = solver.solve(K.set, cfg.n_exp).value;
      solver.reset_warm_start();
      const double cap_kp = solver.solve(Kp, cfg.n_exp).value;
      const double margin = (cap_k - cap_kp) / cap_k;
      CaseRecord rec;
      rec.inputs = digest_of({{"cx", s.center.x}, {"cy", s.center.y}, {"cz", s.center.z},
                              {"r", s.radius}, {"K", double(K.set.size())},
                              {"hole", with_hole ? 1.0 : 0.0}},
                             head);
      rec.lhs = cap_kp;
      rec.rhs = cap_k;
      rec.margin = margin;
      rec.pass = margin >= -cfg.slack;
      slots[ci].push_back(rec);
    } catch (const std::exception& e) {
      slots[ci].push_back({head + " (generation failed: " + e.what() + ")", 0, 0, 0, true, true});
    }
  });

  for (auto& s : slots)
    for (auto& r : s) report.records.push_back(std::move(r));
  finish(report);
  return report;
}

SuiteReport verify_monotonicity(const SuiteConfig& cfg) {
  SuiteReport report = make_report("monotonicity", cfg);
  const int dim = dim_of(cfg);
  const int cases = std::max(1, cfg.cases);

  for (int ci = 0; ci < cases; ++ci) {
    Rng rng(derive_seed(cfg.seed, ci));
    const std::string head = "monotonicity case=" + std::to_string(ci);
    try {
      const bool strict_case = ci == 0;
      const double r2 = strict_case ? 1.0 : rng.uniform(0.75, 0.95);
      GridDomain d1 = ball_domain(cfg, 1.0);
      GridDomain d2 = strict_case ? ball_domain(cfg, 1.0) : ball_domain(cfg, r2);

      // K1: polyline well inside D2.
      CompactMask k1;
      bool have = false;
      for (int tries = 0; tries < 30 && !have; ++tries) {
        std::vector<Vec> verts{random_in_ball(rng, {}, 0.4 * r2, dim),
                               random_in_ball(rng, {}, 0.4 * r2, dim)};
        try {
          k1 = rasterize_polyline(verts, d2);
          have = true;
        } catch (const std::exception&) {
        }
      }
      if (!have) {
        push_skip(report, head + " (no K1)");
        continue;
      }

      // K2 = K1 plus a ball mask inside D2.
      CellSet extra;
      for (int tries = 0; tries < 30; ++tries) {
        const Vec c3 = strict_case ? Vec{0.5 * r2, 0, 0} : random_in_ball(rng, {}, 0.55 * r2, dim);
        const double r3 = strict_case ? 0.22 : rng.uniform(0.1, 0.2);
        if (norm(c3) + r3 > 0.95 * r2) continue;
        bool ok = false;
        extra = cells_in_ball(d2, c3, r3, &ok);
        if (ok && !extra.empty()) break;
        extra = CellSet{};
      }
      if (extra.empty()) {
        push_skip(report, head + " (no K3)");
        continue;
      }
      std::vector<uint32_t> merged = k1.set.cells;
      merged.insert(merged.end(), extra.cells.begin(), extra.cells.end());
      const CellSet k2 = CellSet::from(std::move(merged));

      CapacitySolver s1(d1), s2(d2);
      const double cap1 = s1.solve(k1.set, cfg.n_exp).value;
      const double cap2 = s2.solve(k2, cfg.n_exp).value;
      if (strict_case) {
        const double margin = (cap2 - 1.05 * cap1) / cap2;
        push_record(report, head + " strict-gap", 1.05 * cap1, cap2, margin, 0.0);
      } else {
        push_record(report,
                    digest_of({{"r2", r2}, {"K1", double(k1.set.size())},
                               {"K2", double(k2.size())}},
                              head),
                    cap1, cap2, (cap2 - cap1) / cap2, cfg.slack);
      }
    } catch (const std::exception& e) {
      push_skip(report, head + " (generation failed: " + e.what() + ")");
    }
  }
  finish(report);
  return report;
}

SuiteReport verify_metric_axioms(const SuiteConfig& cfg) {
  SuiteReport report = make_report("metric-axioms", cfg);
  const int dim = dim_of(cfg);
  Rng rng0(derive_seed(cfg.seed, 1000001));
  const double dom_r = rng0.uniform(0.9, 1.0);
  GridDomain domain = ball_domain(cfg, dom_r);
  const Vec anchor{0.08 + 0.04 * rng0.u01(), 0.0, 0.0};
  const double R0 = domain.boundary_distance(anchor);

  const int cases = std::max(1, cfg.cases);
  std::vector<std::vector<CaseRecord>> slots(cases);
  parallel_for(cases, std::max(1, cfg.jobs), [&](std::size_t ci) {
    Rng rng(derive_seed(cfg.seed, ci));
    const std::string head = "metric-axioms case=" + std::to_string(ci);
    MetricEvaluator eval(domain);
    MetricConfig mc = light_metric_config(derive_seed(cfg.seed, 5000 + ci));
    try {
      Vec x, y, z;
      const GridSpec& spec = domain.spec();
      for (int tries = 0; tries < 50; ++tries) {
        x = random_in_ball(rng, anchor, 0.8 * R0, dim);
        y = random_in_ball(rng, anchor, 0.8 * R0, dim);
        z = random_in_ball(rng, anchor, 0.8 * R0, dim);
        if (spec.locate(x) != spec.locate(y) && spec.locate(y) != spec.locate(z) &&
            spec.locate(x) != spec.locate(z))
          break;
      }
      const std::string digest = digest_of(
          {{"xx", x.x}, {"xy", x.y}, {"yx", y.x}, {"yy", y.y}, {"zx", z.x}, {"zy", z.y}}, head);

      const double id = eval.modulus_metric(x, x, cfg.n_exp, mc).value;
      slots[ci].push_back({digest + " identity", id, 0.0, id == 0.0 ? 0.0 : -1.0, id == 0.0, false});

      const double mxy = eval.modulus_metric(x, y, cfg.n_exp, mc).value;
      const double myx = eval.modulus_metric(y, x, cfg.n_exp, mc).value;
      const double myz = eval.modulus_metric(y, z, cfg.n_exp, mc).value;
      const double mxz = eval.modulus_metric(x, z, cfg.n_exp, mc).value;

      slots[ci].push_back({digest + " positivity", 0.0, mxy, mxy > 0.0 ? 0.0 : -1.0, mxy > 0.0, false});

      const double sym_margin = -std::fabs(mxy - myx) / std::fmax(mxy, myx);
      slots[ci].push_back(
          {digest + " symmetry", mxy, myx, sym_margin, sym_margin >= -cfg.slack, false});

      const double tri_margin = (mxy + myz - mxz) / (mxy + myz);
      slots[ci].push_back(
          {digest + " triangle", mxz, mxy + myz, tri_margin, tri_margin >= -cfg.slack, false});
    } catch (const std::exception& e) {
      slots[ci].push_back({head + " (failed: " + e.what() + ")", 0, 0, 0, true, true});
    }
  });
  for (auto& s : slots)
    for (auto& r : s) report.records.push_back(std::move(r));

  // Growth toward a boundary continuum (Lemma 8(3) surrogate): mu increases
  // strictly along a ray approaching the nearest boundary point.
  try {
    MetricEvaluator eval(domain);
    MetricConfig mc = light_metric_config(derive_seed(cfg.seed, 999));
    const Vec d{1, 0, 0};  // anchor sits on the +x axis; nearest boundary is ahead
    double prev = 0.0;
    double worst = std::numeric_limits<double>::infinity();
    for (const double t : {0.55, 0.7, 0.82, 0.92}) {
      const double v = eval.modulus_metric(anchor, anchor + (t * R0) * d, cfg.n_exp, mc).value;
      if (prev > 0.0) worst = std::fmin(worst, (v - prev) / prev);
      prev = v;
    }
    push_record(report, "metric-axioms growth-to-boundary", 0.0, worst, worst,
                worst > 0.0 ? 0.0 : -1.0);
    report.records.back().pass = worst > 0.0;
  } catch (const std::exception& e) {
    push_skip(report, std::string("metric-axioms growth (failed: ") + e.what() + ")");
  }

  finish(report);
  return report;
}

SuiteReport verify_starlike_and_cones(const SuiteConfig& cfg) {
  SuiteReport report = make_report("starlike-cones", cfg);
  const int dim = dim_of(cfg);
  Rng rng(derive_seed(cfg.seed, 77));
  GridDomain domain = ball_domain(cfg, 1.0);
  const double h = domain.spec().h;
  const Vec x0{0.25 + (rng.u01() - 0.5) * 4.0 * h, 0.0, 0.0};
  const double R0 = domain.boundary_distance(x0);

  std::vector<Vec> dirs;
  const int ndirs = 8;
  for (int i = 0; i < ndirs; ++i) {
    const double a = 2.0 * M_PI * i / ndirs;
    if (dim == 2) {
      dirs.push_back({std::cos(a), std::sin(a), 0});
    } else {
      // 8 directions spread over the sphere: cube vertices normalized.
      const double sx = (i & 1) ? 1 : -1, sy = (i & 2) ? 1 : -1, sz = (i & 4) ? 1 : -1;
      const double inv = 1.0 / std::sqrt(3.0);
      dirs.push_back({sx * inv, sy * inv, sz * inv});
    }
  }

  MetricConfig mc = light_metric_config(derive_seed(cfg.seed, 78));

  // Radial monotonicity (all gaps exceed 4h at these presets).
  const std::vector<double> ts{0.2, 0.35, 0.5, 0.65, 0.8};
  std::vector<std::vector<double>> profiles(dirs.size());
  parallel_for(dirs.size(), std::max(1, cfg.jobs), [&](std::size_t i) {
    MetricEvaluator eval(domain);
    std::vector<double> scaled;
    for (const double t : ts) scaled.push_back(t * R0);
    profiles[i] = eval.radial_profile(x0, dirs[i], scaled, cfg.n_exp, mc);
  });
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ts.size(); ++j) {
      const double lo = profiles[i][j], hi = profiles[i][j + 1];
      const double margin = (hi - lo) / lo;
      std::ostringstream digest;
      digest << "radial dir=" << i << " t=" << ts[j] << "->" << ts[j + 1];
      push_record(report, digest.str(), lo, hi, margin, 0.0);
      report.records.back().pass = margin > 0.0;  // strict over >= 4h gaps
    }
  }

  // One safe level for the level-set work: radial value at half the safe
  // radius on the far side, slightly deflated.
  MetricEvaluator eval0(domain);
  const double level =
      0.98 * eval0.modulus_metric(x0, x0 + (0.5 * R0) * Vec{-1, 0, 0}, cfg.n_exp, mc).value;

  LevelSet ls = mu_sphere_parallel(domain, x0, level, dirs, 0.01, cfg.n_exp, mc,
                                   std::max(1, cfg.jobs));

  // Starlikeness: scaling any level-set point toward x0 stays in the ball.
  std::vector<std::tuple<std::size_t, double, double>> star_vals(ls.samples.size() * 3);
  parallel_for(ls.samples.size(), std::max(1, cfg.jobs), [&](std::size_t i) {
    MetricEvaluator eval(domain);
    const LevelSetSample& s = ls.samples[i];
    int k = 0;
    for (const double t : {0.25, 0.5, 0.75}) {
      const Vec p = x0 + (t * s.radius) * s.direction;
      const double v = eval.modulus_metric(x0, p, cfg.n_exp, mc).value;
      star_vals[i * 3 + k] = {i, t, v};
      ++k;
    }
  });
  for (const auto& [i, t, v] : star_vals) {
    std::ostringstream digest;
    digest << "ray-scaling dir=" << i << " t=" << t;
    push_record(report, digest.str(), v, level, (level - v) / level, cfg.slack);
  }

  // Cone conditions at alpha = alpha0/2.
  struct ConeProbe {
    std::size_t dir;
    bool exterior;
    Vec point;
  };
  std::vector<ConeProbe> probes;
  int skipped_cones = 0;
  for (std::size_t i = 0; i < ls.samples.size(); ++i) {
    const LevelSetSample& s = ls.samples[i];
    const double r = s.radius;
    if (!(r > 0.0 && r < R0)) {
      push_skip(report, "cone dir=" + std::to_string(i) + " (sample outside safe ball)");
      skipped_cones += 2;
      continue;
    }
    const Vec y = x0 + r * s.direction;
    const double a0 = cone_alpha0(r, R0);
    const double alpha = 0.5 * a0;
    const ConeRadii radii = cone_radii(alpha, r, R0);
    Vec tangent{-s.direction.y, s.direction.x, 0.0};
    if (norm(tangent) < 1e-9) tangent = {1, 0, 0};  // direction along z
    tangent = tangent - dot(tangent, s.direction) * s.direction;
    const Vec tangent_unit = (1.0 / norm(tangent)) * tangent;
    const auto cone_points = [&](const Vec& axis, double rho) {
      std::vector<Vec> pts;
      for (const double f : {0.4, 0.8}) pts.push_back(y + (f * rho) * axis);
      const double beta = 0.9 * alpha;
      const Vec tilted = std::cos(beta) * axis + std::sin(beta) * tangent_unit;
      for (const double f : {0.5, 0.9}) pts.push_back(y + (f * rho) * tilted);
      const Vec tilted2 = std::cos(0.45 * alpha) * axis - std::sin(0.45 * alpha) * tangent_unit;
      pts.push_back(y + (0.65 * rho) * tilted2);
      return pts;
    };
    for (const bool exterior : {true, false}) {
      const double rho = exterior ? radii.ext : radii.interior;
      const Vec axis = exterior ? s.direction : (-1.0) * s.direction;
      if (rho < 2.0 * h) {
        push_skip(report, "cone dir=" + std::to_string(i) +
                              (exterior ? " exterior" : " interior") + " (degenerate, rho<2h)");
        ++skipped_cones;
        continue;
      }
      SphericalCone cone{y, axis, alpha, rho};
      for (const Vec& p : cone_points(axis, rho)) {
        if (!cone_contains(cone, p)) {
          push_record(report, "cone probe outside cone dir=" + std::to_string(i), 0, 0, -1.0, 0);
          continue;
        }
        probes.push_back({i, exterior, p});
      }
    }
  }
  std::vector<double> probe_vals(probes.size());
  parallel_for(probes.size(), std::max(1, cfg.jobs), [&](std::size_t i) {
    MetricEvaluator eval(domain);
    probe_vals[i] = eval.modulus_metric(x0, probes[i].point, cfg.n_exp, mc).value;
  });
  for (std::size_t i = 0; i < probes.size(); ++i) {
    std::ostringstream digest;
    digest << "cone-" << (probes[i].exterior ? "ext" : "int") << " dir=" << probes[i].dir
           << " px=" << probes[i].point.x << " py=" << probes[i].point.y;
    if (probes[i].exterior) {
      // Exterior cone lies outside the mu-ball: mu > level (within slack).
      push_record(report, digest.str(), level, probe_vals[i], (probe_vals[i] - level) / level,
                  cfg.slack);
    } else {
      push_record(report, digest.str(), probe_vals[i], level, (level - probe_vals[i]) / level,
                  cfg.slack);
    }
  }
  {
    const int total_cones = static_cast<int>(2 * ls.samples.size());
    const double evaluated_frac =
        total_cones > 0 ? 1.0 - double(skipped_cones) / total_cones : 0.0;
    push_record(report, "cone evaluated fraction", 0.75, evaluated_frac,
                (evaluated_frac - 0.75) / 0.75, 0.0);
  }

  finish(report);
  return report;
}

SuiteReport verify_roundness(const SuiteConfig& cfg) {
  SuiteReport report = make_report("roundness", cfg);
  const int dim = dim_of(cfg);
  // Tight box: the finest level set must resolve at >= 4h, and every spare
  // cell of extent helps.
  GridDomain domain = ball_domain(cfg, 1.0, {}, 2.04);
  const GridSpec& spec = domain.spec();
  const double h = spec.h;

  // Off-center by one cell, snapped to a cell center so the direction fan
  // keeps the grid's dihedral symmetry classes.
  Vec x0{h, 0.0, 0.0};
  {
    const int64_t c = spec.locate(x0);
    if (c >= 0) x0 = spec.center(static_cast<uint32_t>(c));
    if (dim == 2) x0.z = 0.0;
  }
  const double R0 = domain.boundary_distance(x0);

  std::vector<Vec> dirs;
  const int ndirs = 16;
  for (int i = 0; i < ndirs; ++i) {
    if (dim == 2) {
      const double a = M_PI / 16.0 + 2.0 * M_PI * i / ndirs;  // avoid the axes
      dirs.push_back({std::cos(a), std::sin(a), 0});
    } else {
      Rng r(derive_seed(cfg.seed, 300 + i));
      dirs.push_back(random_dir(r, 3));
    }
  }

  // Near the center of a nearly round domain the straight segment is the
  // minimizer up to a direction-uniform rasterization gap, which cancels in
  // the max/min ratio; level probing therefore runs the degenerate
  // (segment-only) polyline family.
  MetricConfig mc = light_metric_config(derive_seed(cfg.seed, 400));
  mc.control_points = 0;
  mc.probe_solver.tol = 1e-7;

  // Top level: the smallest safe-bracket value across directions.
  std::vector<double> top_vals(dirs.size());
  parallel_for(dirs.size(), std::max(1, cfg.jobs), [&](std::size_t i) {
    MetricEvaluator eval(domain);
    top_vals[i] = eval.modulus_metric(x0, x0 + (0.9 * R0) * dirs[i], cfg.n_exp, mc).value;
  });
  const double t1 = *std::min_element(top_vals.begin(), top_vals.end());

  std::vector<double> ratios;
  for (int li = 0; li < 3; ++li) {
    const double level = t1 / std::pow(2.0, li);
    LevelSet ls;
    try {
      ls = mu_sphere_parallel(domain, x0, level, dirs, 0.002, cfg.n_exp, mc,
                              std::max(1, cfg.jobs));
    } catch (const std::exception& e) {
      push_skip(report, "roundness level=" + std::to_string(level) + " (failed: " + e.what() + ")");
      break;
    }
    double rmin = ls.samples.front().radius;
    for (const auto& s : ls.samples) rmin = std::fmin(rmin, s.radius);
    if (rmin < 4.0 * h) {
      push_skip(report, "roundness level=" + std::to_string(level) +
                            " (unresolvable: min radius " + std::to_string(rmin) + " < 4h=" +
                            std::to_string(4.0 * h) + ")");
      break;
    }
    const double ratio = roundness_ratio(ls);
    ratios.push_back(ratio);
    std::ostringstream digest;
    digest.precision(10);
    digest << "roundness level=" << level << " minr=" << rmin << " ratio=" << ratio;
    push_record(report, digest.str(), 1.0, ratio, 0.0, cfg.slack);  // informational
  }

  for (std::size_t i = 0; i + 1 < ratios.size(); ++i) {
    const double margin = (ratios[i] - ratios[i + 1]) / ratios[i];
    push_record(report, "roundness trend " + std::to_string(i) + "->" + std::to_string(i + 1),
                ratios[i + 1], ratios[i], margin, cfg.slack);
  }
  if (!ratios.empty()) {
    const double last = ratios.back();
    push_record(report, "roundness final ratio <= 1.05", last, 1.05, (1.05 - last) / 1.05, 0.0);
  }

  finish(report);
  return report;
}

SuiteReport verify_convergence(const SuiteConfig& cfg) {
  SuiteReport report = make_report("convergence", cfg);
  const int dim = dim_of(cfg);
  const double r_in = 0.5, r_out = 1.0;
  const double oracle = ring_capacity_oracle(r_in, r_out, cfg.n_exp);

  const std::vector<int> grids = dim == 2 ? std::vector<int>{64, 128, 256}
                                          : std::vector<int>{16, 32, 64};
  std::vector<double> caps(grids.size());
  parallel_for(grids.size(), std::max(1, cfg.jobs), [&](std::size_t gi) {
    const int n = grids[gi];
    DomainConfig dc;
    const double extent = 2.1;
    dc.grid = make_grid_spec(dim, {-extent / 2, -extent / 2, dim == 3 ? -extent / 2 : 0.0},
                             {extent, extent, dim == 3 ? extent : 0.0}, n, n, n);
    ShapeOp ball;
    ball.is_ball = true;
    ball.radius = r_out;
    dc.shapes.push_back(ball);
    GridDomain domain = build_domain(dc);
    bool ok = false;
    const CellSet K = cells_in_ball(domain, {}, r_in, &ok);
    CapacitySolver solver(domain);
    caps[gi] = solver.solve(K, cfg.n_exp).value;
  });

  const double d12 = std::fabs(caps[0] - caps[1]);
  const double d23 = std::fabs(caps[1] - caps[2]);
  push_record(report, digest_of({{"c1", caps[0]}, {"c2", caps[1]}, {"c3", caps[2]}},
                                "convergence shrinking-increments"),
              d23, d12, (d12 - d23) / d12, 0.0);

  const double fine_tol = cfg.n_exp == 2 ? 0.03 : 0.08;
  const double fine_err = std::fabs(caps[2] - oracle) / oracle;
  push_record(report, "convergence finest-vs-oracle", fine_err, fine_tol,
              (fine_tol - fine_err) / fine_tol, 0.0);

  if (cfg.n_exp == 2) {
    const double extrapolated = 2.0 * caps[2] - caps[1];  // first order, exact h halving
    const double rich_err = std::fabs(extrapolated - oracle) / oracle;
    push_record(report, digest_of({{"extrapolated", extrapolated}, {"oracle", oracle}},
                                  "convergence richardson"),
                rich_err, 0.01, (0.01 - rich_err) / 0.01, 0.0);
  }

  // Domain exhaustion at fixed h: growing D, shrinking K, capacity falls.
  try {
    std::vector<double> seq;
    for (int k = 0; k < 3; ++k) {
      GridDomain domain = ball_domain(cfg, 0.72 + 0.12 * k, {}, 2.2);
      bool ok = false;
      const CellSet K = cells_in_ball(domain, {}, 0.4 - 0.08 * k, &ok);
      CapacitySolver solver(domain);
      seq.push_back(solver.solve(K, cfg.n_exp).value);
    }
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
      worst = std::fmin(worst, (seq[i] - seq[i + 1]) / seq[i]);
    push_record(report, digest_of({{"c0", seq[0]}, {"c1", seq[1]}, {"c2", seq[2]}},
                                  "convergence exhaustion-monotone"),
                0.0, worst, worst, 0.0);
    report.records.back().pass = worst > 0.0;
  } catch (const std::exception& e) {
    push_skip(report, std::string("convergence exhaustion (failed: ") + e.what() + ")");
  }

  finish(report);
  return report;
}

SuiteReport verify_three_spheres(const SuiteConfig& cfg) {
  SuiteReport report = make_report("three-spheres", cfg);
  const double tol_value = 1e-10;  // endpoint/seam identities
  const double tol_sym = 1e-9;     // symmetry residuals, relative to R

  for (int kk = 1; kk <= 9; ++kk) {
    const double k = 0.1 * kk;
    const double seam = three_spheres_seam(k);
    const std::string head = "three-spheres k=" + std::to_string(k);

    // Monotone branch: 50 values on [0, seam].
    std::vector<double> radii;
    for (int j = 0; j < 50; ++j) {
      const double theta = seam * j / 49.0;
      radii.push_back(three_spheres_radius(k, theta));
    }
    const double upper = k / (1.0 - k);
    const double lower = k / std::sqrt(1.0 + k * k);
    double worst_bounds = std::numeric_limits<double>::infinity();
    double worst_mono = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < radii.size(); ++j) {
      worst_bounds = std::fmin(worst_bounds, (upper * (1 + 1e-12) - radii[j]) / upper);
      worst_bounds = std::fmin(worst_bounds, (radii[j] - lower * (1 - 1e-12)) / lower);
      if (j > 0) worst_mono = std::fmin(worst_mono, (radii[j - 1] - radii[j]) / radii[j - 1]);
    }
    push_record(report, head + " bounds[0,seam]", 0.0, worst_bounds, worst_bounds, 0.0);
    push_record(report, head + " strictly-decreasing[0,seam]", 0.0, worst_mono, worst_mono, 0.0);
    report.records.back().pass = worst_mono > 0.0;

    // Remark 4 band: theta in [0, pi/2] has the sharper lower bound.
    double worst_remark4 = std::numeric_limits<double>::infinity();
    const double lower4 = k / std::sqrt(1.0 - k * k);
    for (int j = 0; j < 25; ++j) {
      const double theta = 0.5 * M_PI * j / 24.0;
      const double r3 = three_spheres_radius(k, theta);
      worst_remark4 = std::fmin(worst_remark4, (r3 - lower4 * (1 - 1e-12)) / lower4);
    }
    push_record(report, head + " remark4-lower-bound", 0.0, worst_remark4, worst_remark4, 0.0);

    // Endpoints of the monotone branch.
    const double e0 = std::fabs(three_spheres_radius(k, 0.0) - upper);
    push_record(report, head + " endpoint theta=0", e0, tol_value, (tol_value - e0) / tol_value,
                0.0);
    const double es = std::fabs(three_spheres_radius(k, seam) - lower);
    push_record(report, head + " endpoint theta=seam", es, tol_value,
                (tol_value - es) / tol_value, 0.0);

    // Branch seam continuity: both closed forms agree at the seam.
    const double s = std::sin(seam), c = std::cos(seam);
    const double a = std::sqrt(1.0 - k * k * s * s);
    const double interior = std::sqrt(-k * c * a);
    const double lam = k * k / (a - k * c) + k * c;
    const double origin = std::sqrt(lam * lam + k * k * s * s);
    const double seam_gap = std::fabs(interior - origin);
    push_record(report, head + " seam-continuity", seam_gap, tol_value,
                (tol_value - seam_gap) / tol_value, 0.0);

    // Steep branch [seam, pi]: increasing, bounded by sqrt(k), endpoint at pi.
    double prev = three_spheres_radius(k, seam);
    double worst_up = std::numeric_limits<double>::infinity();
    double worst_b1 = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= 20; ++j) {
      const double theta = seam + (M_PI - seam) * j / 20.0;
      const double r3 = three_spheres_radius(k, theta);
      worst_up = std::fmin(worst_up, (r3 - prev) / prev);
      worst_b1 = std::fmin(worst_b1, (std::sqrt(k) * (1 + 1e-12) - r3) / std::sqrt(k));
      worst_b1 = std::fmin(worst_b1, (r3 - lower * (1 - 1e-12)) / lower);
      prev = r3;
    }
    push_record(report, head + " increasing[seam,pi]", 0.0, worst_up, worst_up, 0.0);
    report.records.back().pass = worst_up > 0.0;
    push_record(report, head + " bounds[seam,pi]", 0.0, worst_b1, worst_b1, 0.0);
    const double epi = std::fabs(three_spheres_radius(k, M_PI) - std::sqrt(k));
    push_record(report, head + " endpoint theta=pi", epi, tol_value,
                (tol_value - epi) / tol_value, 0.0);

    // Full construction in general position: symmetry + containment.
    for (const int dim : {2, 3}) {
      Rng rng(derive_seed(cfg.seed, 10 * kk + dim));
      double worst_s = std::numeric_limits<double>::infinity();
      double worst_cont = std::numeric_limits<double>::infinity();
      double worst_origin = std::numeric_limits<double>::infinity();
      for (int j = 0; j < 12; ++j) {
        const double theta = M_PI * (j + 0.3) / 12.3;
        const double R = std::pow(10.0, rng.uniform(-1.0, 1.0));
        const Vec x0{rng.uniform(-3, 3), rng.uniform(-3, 3), dim == 3 ? rng.uniform(-3, 3) : 0.0};
        // Canonical plane frame, randomly rotated.
        Vec ex = random_dir(rng, dim);
        Vec ey0 = random_dir(rng, dim);
        Vec ey = ey0 - dot(ey0, ex) * ex;
        while (norm(ey) < 1e-3) {
          ey0 = random_dir(rng, dim);
          ey = ey0 - dot(ey0, ex) * ex;
        }
        ey = (1.0 / norm(ey)) * ey;
        const double ks = k * std::sin(theta);
        const Vec x1 = x0 + R * (-std::sqrt(1 - ks * ks) * ex + ks * ey);
        const Vec x2 = x0 + R * (k * std::cos(theta) * ex + ks * ey);
        const ThreeSpheresResult res = three_spheres(x1, x2, x0, R, k);
        const Vec image = invert_point(x1, res.sphere);
        const double resid = dist(image, x2) / R;
        worst_s = std::fmin(worst_s, (tol_sym - resid) / tol_sym);
        const double rad = res.sphere.radius;
        worst_cont = std::fmin(worst_cont,
                               (rad * (1 + 1e-12) - dist(x0, res.sphere.center)) / rad);
        worst_cont = std::fmin(worst_cont,
                               (rad * (1 + 1e-12) - dist(x2, res.sphere.center)) / rad);
        if (res.branch == ThreeSpheresBranch::origin_branch) {
          const double gap = std::fabs(dist(x0, res.sphere.center) - rad) / R;
          worst_origin = std::fmin(worst_origin, (tol_sym - gap) / tol_sym);
        }
      }
      const std::string d = head + " dim=" + std::to_string(dim);
      push_record(report, d + " symmetry", 0.0, worst_s, worst_s, 0.0);
      push_record(report, d + " containment", 0.0, worst_cont, worst_cont, 0.0);
      if (std::isfinite(worst_origin))
        push_record(report, d + " origin-branch-through-x0", 0.0, worst_origin, worst_origin, 0.0);
    }
  }
  finish(report);
  return report;
}

SuiteReport run_suite(const std::string& name, const SuiteConfig& cfg) {
  if (name == "polarization") return verify_polarization(cfg);
  if (name == "monotonicity") return verify_monotonicity(cfg);
  if (name == "metric-axioms") return verify_metric_axioms(cfg);
  if (name == "starlike-cones") return verify_starlike_and_cones(cfg);
  if (name == "roundness") return verify_roundness(cfg);
  if (name == "convergence") return verify_convergence(cfg);
  if (name == "three-spheres") return verify_three_spheres(cfg);
  throw ConfigError("unknown suite: " + name);
}

std::vector<std::string> suite_names() {
  return {"three-spheres", "convergence", "polarization", "monotonicity",
          "metric-axioms", "starlike-cones", "roundness"};
}

std::string report_to_json(const SuiteReport& report) {
  json j;
  j["suite"] = report.suite;
  j["seed"] = report.seed;
  j["slack"] = report.slack;
  j["n"] = report.n_exp;
  j["grid"] = report.grid_preset;
  j["passed"] = report.passed();
  j["pass_count"] = report.pass_count;
  j["fail_count"] = report.fail_count;
  j["skip_count"] = report.skip_count;
  j["worst_margin"] = report.worst_margin;
  json records = json::array();
  for (const CaseRecord& r : report.records) {
    json jr;
    jr["inputs"] = r.inputs;
    jr["lhs"] = r.lhs;
    jr["rhs"] = r.rhs;
    jr["margin"] = r.margin;
    jr["pass"] = r.pass;
    jr["skipped"] = r.skipped;
    records.push_back(jr);
  }
  j["records"] = records;
  return j.dump(2);
}

std::string report_to_table(const SuiteReport& report) {
  std::ostringstream out;
  out << "suite " << report.suite << " (seed=" << report.seed << ", grid=" << report.grid_preset
      << ", n=" << report.n_exp << ", slack=" << report.slack << ")\n";
  for (const CaseRecord& r : report.records) {
    if (r.skipped)
      out << "  SKIP  " << r.inputs << "\n";
    else
      out << (r.pass ? "  pass  " : "  FAIL  ") << r.inputs << "  lhs=" << r.lhs
          << " rhs=" << r.rhs << " margin=" << r.margin << "\n";
  }
  out << (report.passed() ? "PASS" : "FAIL") << "  " << report.pass_count << " passed, "
      << report.fail_count << " failed, " << report.skip_count << " skipped, worst margin "
      << report.worst_margin << "\n";
  return out.str();
}

}  // namespace modmetric
