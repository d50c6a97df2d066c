#include "core/metric.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

namespace modmetric {

namespace {

uint64_t mask_hash(const CellSet& set) {
  uint64_t h = 1469598103934665603ULL;
  for (const uint32_t c : set.cells) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Shortest inside path between two cells (face adjacency); empty if none.
std::vector<uint32_t> shortest_inside_path(const GridDomain& domain, uint32_t from, uint32_t to,
                                           bool eroded) {
  const GridSpec& spec = domain.spec();
  const auto passable = [&](uint32_t c) {
    if (!domain.inside(c)) return false;
    if (!eroded) return true;
    int ix, iy, iz;
    spec.coords(c, ix, iy, iz);
    // Demand a one-cell inside cushion so the rasterization tube fits.
    for (int dz = spec.dim == 3 ? -1 : 0; dz <= (spec.dim == 3 ? 1 : 0); ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int jx = ix + dx, jy = iy + dy, jz = iz + dz;
          if (jx < 0 || jx >= spec.nx || jy < 0 || jy >= spec.ny || jz < 0 || jz >= spec.nz)
            return false;
          if (!domain.inside(spec.index(jx, jy, jz))) return false;
        }
    return true;
  };
  if (!passable(from) || !passable(to)) return {};
  std::vector<int32_t> parent(spec.cell_count(), -2);
  std::deque<uint32_t> queue{from};
  parent[from] = -1;
  while (!queue.empty()) {
    const uint32_t c = queue.front();
    queue.pop_front();
    if (c == to) break;
    int ix, iy, iz;
    spec.coords(c, ix, iy, iz);
    const auto push = [&](bool cond, uint32_t n) {
      if (cond && parent[n] == -2 && passable(n)) {
        parent[n] = static_cast<int32_t>(c);
        queue.push_back(n);
      }
    };
    push(ix > 0, c - 1);
    push(ix + 1 < spec.nx, c + 1);
    push(iy > 0, c - spec.nx);
    push(iy + 1 < spec.ny, c + spec.nx);
    if (spec.dim == 3) {
      const uint32_t stride = static_cast<uint32_t>(spec.nx) * spec.ny;
      push(iz > 0, c - stride);
      push(iz + 1 < spec.nz, c + stride);
    }
  }
  if (parent[to] == -2) return {};
  std::vector<uint32_t> path;
  for (int64_t c = to; c != -1; c = parent[c]) path.push_back(static_cast<uint32_t>(c));
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

double roundness_ratio(const LevelSet& ls) {
  if (ls.samples.size() < 2) throw ParamError("roundness: need at least 2 samples");
  double lo = ls.samples.front().radius, hi = lo;
  for (const auto& s : ls.samples) {
    lo = std::fmin(lo, s.radius);
    hi = std::fmax(hi, s.radius);
  }
  if (!(lo > 0.0)) throw NumericError("roundness: nonpositive radius");
  return hi / lo;
}

MetricEvaluator::MetricEvaluator(const GridDomain& domain) : domain_(domain), solver_(domain) {}

double MetricEvaluator::evaluate_polyline(const std::vector<Vec>& vertices, int n_exp,
                                          const SolverConfig& cfg, int& evals) {
  CompactMask mask = rasterize_polyline(vertices, domain_);
  ++evals;
  return solver_.solve(mask.set, n_exp, cfg).value;
}

MetricResult MetricEvaluator::modulus_metric(const Vec& x, const Vec& y, int n_exp,
                                             const MetricConfig& cfg) {
  const GridSpec& spec = domain_.spec();
  if (!domain_.strictly_inside(x) || !domain_.strictly_inside(y))
    throw GeometryError("metric: endpoint outside domain");
  const uint32_t cx = static_cast<uint32_t>(spec.locate(x));
  const uint32_t cy = static_cast<uint32_t>(spec.locate(y));
  if (cx == cy) {
    // mu_D(x, x) = 0 by convention; the single-cell condenser is not solved.
    MetricResult r;
    r.vertices = {x, y};
    r.mask = CellSet::from({cx});
    r.converged = true;
    return r;
  }

  const int m = std::max(0, cfg.control_points);
  const double L = dist(x, y);
  const double h = spec.h;

  // Initial controls: the straight segment when its tube stays inside,
  // otherwise a shortest inside path (Lemma-9-style segment seeding).
  std::vector<Vec> init_controls(m);
  bool segment_ok = true;
  try {
    rasterize_polyline({x, y}, domain_);
  } catch (const GeometryError&) {
    segment_ok = false;
  }
  if (segment_ok) {
    for (int i = 0; i < m; ++i) init_controls[i] = x + (double(i + 1) / (m + 1)) * (y - x);
  } else {
    std::vector<uint32_t> path = shortest_inside_path(domain_, cx, cy, true);
    if (path.empty()) path = shortest_inside_path(domain_, cx, cy, false);
    if (path.empty()) throw GeometryError("metric: points in different components");
    for (int i = 0; i < m; ++i) {
      const std::size_t k =
          std::min(path.size() - 1, static_cast<std::size_t>(std::llround(
                                        (double(i + 1) / (m + 1)) * (path.size() - 1))));
      init_controls[i] = spec.center(path[k]);
    }
  }

  std::unordered_map<uint64_t, double> cache;
  int evals = 0;
  const auto eval = [&](const std::vector<Vec>& controls, double& out) {
    std::vector<Vec> verts;
    verts.reserve(controls.size() + 2);
    verts.push_back(x);
    for (const Vec& c : controls) verts.push_back(c);
    verts.push_back(y);
    CompactMask mask;
    try {
      mask = rasterize_polyline(verts, domain_);
    } catch (const GeometryError&) {
      return false;
    } catch (const ParamError&) {
      return false;
    }
    const uint64_t key = mask_hash(mask.set);
    const auto it = cache.find(key);
    if (it != cache.end()) {
      out = it->second;
      return true;
    }
    ++evals;
    out = solver_.solve(mask.set, n_exp, cfg.probe_solver).value;
    cache.emplace(key, out);
    return true;
  };

  std::vector<Vec> best_controls = init_controls;
  double best = std::numeric_limits<double>::infinity();
  bool best_converged = false;
  {
    double v;
    if (eval(init_controls, v)) {
      best = v;
    } else {
      throw GeometryError("metric: no admissible initial polyline");
    }
  }

  for (int restart = 0; restart < std::max(1, cfg.restarts); ++restart) {
    Rng rng(derive_seed(cfg.seed, static_cast<uint64_t>(restart)));
    std::vector<Vec> controls = init_controls;
    double current = std::numeric_limits<double>::infinity();
    if (restart == 0) {
      current = best;
    } else {
      for (int tries = 0; tries < 8; ++tries) {
        std::vector<Vec> cand = init_controls;
        for (Vec& c : cand)
          for (int a = 0; a < spec.dim; ++a)
            c[a] += rng.uniform(-1.0, 1.0) * cfg.perturb_frac * L;
        double v;
        if (eval(cand, v)) {
          controls = cand;
          current = v;
          break;
        }
      }
      if (!std::isfinite(current)) continue;
    }

    double step = std::fmax(cfg.step0_frac * L, 2.0 * h);
    const double min_step = cfg.min_step_h * h;
    bool converged = false;
    for (int sweep = 0; sweep < cfg.max_sweeps && m > 0; ++sweep) {
      if (evals >= cfg.eval_budget) break;
      bool improved = false;
      for (int i = 0; i < m && evals < cfg.eval_budget; ++i) {
        for (int a = 0; a < spec.dim && evals < cfg.eval_budget; ++a) {
          for (const double sign : {+1.0, -1.0}) {
            std::vector<Vec> cand = controls;
            cand[i][a] += sign * step;
            double v;
            if (!eval(cand, v)) continue;
            if (v < current * (1.0 - 1e-13)) {
              controls.swap(cand);
              current = v;
              improved = true;
              break;
            }
          }
        }
      }
      if (!improved) {
        step *= 0.5;
        if (step < min_step) {
          converged = true;
          break;
        }
      }
    }
    if (m == 0) converged = true;
    if (current < best) {
      best = current;
      best_controls = controls;
      best_converged = converged;
    } else if (restart == 0) {
      best_converged = best_converged || converged;
    }
  }

  MetricResult result;
  result.vertices.reserve(best_controls.size() + 2);
  result.vertices.push_back(x);
  for (const Vec& c : best_controls) result.vertices.push_back(c);
  result.vertices.push_back(y);
  CompactMask mask = rasterize_polyline(result.vertices, domain_);
  result.mask = mask.set;
  const double final_value = solver_.solve(mask.set, n_exp, cfg.final_solver).value;
  result.value = std::fmin(final_value, best);
  result.evals = evals;
  result.converged = best_converged;
  return result;
}

double MetricEvaluator::segment_bound(const Vec& x, const Vec& y, int n_exp,
                                      const SolverConfig& cfg) {
  if (!domain_.strictly_inside(x) || !domain_.strictly_inside(y))
    throw GeometryError("metric: endpoint outside domain");
  CompactMask mask = rasterize_polyline({x, y}, domain_);  // throws if it exits D
  return solver_.solve(mask.set, n_exp, cfg).value;
}

std::vector<double> MetricEvaluator::radial_profile(const Vec& x0, const Vec& direction,
                                                    const std::vector<double>& ts, int n_exp,
                                                    const MetricConfig& cfg) {
  const double R0 = domain_.boundary_distance(x0);
  if (!(R0 > 0.0)) throw GeometryError("radial_profile: center outside domain");
  const double dn = norm(direction);
  if (!(dn > 0.0)) throw ParamError("radial_profile: zero direction");
  const Vec d = (1.0 / dn) * direction;
  std::vector<double> out;
  out.reserve(ts.size());
  for (const double t : ts) {
    if (t < 0.0 || t >= R0) throw GeometryError("radial_profile: sample outside the inscribed ball");
    out.push_back(modulus_metric(x0, x0 + t * d, n_exp, cfg).value);
  }
  return out;
}

LevelSet MetricEvaluator::mu_sphere(const Vec& x0, double level, const std::vector<Vec>& directions,
                                    double tol, int n_exp, const MetricConfig& cfg) {
  if (!(level > 0.0)) throw ParamError("mu_sphere: level must be positive");
  if (directions.empty()) throw ParamError("mu_sphere: no directions");
  const double R0 = domain_.boundary_distance(x0);
  if (!(R0 > 0.0)) throw GeometryError("mu_sphere: center outside domain");
  const double top = 0.9 * R0;
  const double h = domain_.spec().h;

  LevelSet ls;
  ls.center = x0;
  ls.level = level;
  ls.samples.reserve(directions.size());
  for (const Vec& dir_in : directions) {
    const double dn = norm(dir_in);
    if (!(dn > 0.0)) throw ParamError("mu_sphere: zero direction");
    const Vec d = (1.0 / dn) * dir_in;

    const double v_top = modulus_metric(x0, x0 + top * d, n_exp, cfg).value;
    if (v_top < level) throw GeometryError("mu_sphere: level escapes safe region");

    double lo = 0.0, v_lo = 0.0;
    double hi = top, v_hi = v_top;
    double radius = top, achieved = v_top;
    bool hit = std::fabs(v_top - level) <= tol * level;
    if (hit) {
      radius = top;
    } else {
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double v = modulus_metric(x0, x0 + mid * d, n_exp, cfg).value;
        if (std::fabs(v - level) <= tol * level) {
          radius = mid;
          achieved = v;
          hit = true;
          break;
        }
        if (v < level) {
          lo = mid;
          v_lo = v;
        } else {
          hi = mid;
          v_hi = v;
        }
        if (hi - lo <= 0.05 * h) break;
      }
      if (!hit) {
        // Secant across the final bracket; mu is strictly increasing along
        // the ray, so the crossing lies inside it.
        const double span = v_hi - v_lo;
        radius = span > 0.0 ? lo + (level - v_lo) * (hi - lo) / span : 0.5 * (lo + hi);
        achieved = modulus_metric(x0, x0 + radius * d, n_exp, cfg).value;
      }
    }
    LevelSetSample sample;
    sample.direction = d;
    sample.radius = radius;
    sample.achieved = achieved;
    sample.uncertainty = hit ? 0.5 * (hi - lo) : 0.5 * (hi - lo);
    ls.samples.push_back(sample);
  }
  return ls;
}

LevelSet mu_sphere_parallel(const GridDomain& domain, const Vec& x0, double level,
                            const std::vector<Vec>& directions, double tol, int n_exp,
                            const MetricConfig& cfg, int jobs) {
  if (jobs <= 1 || directions.size() <= 1) {
    MetricEvaluator eval(domain);
    return eval.mu_sphere(x0, level, directions, tol, n_exp, cfg);
  }
  LevelSet ls;
  ls.center = x0;
  ls.level = level;
  ls.samples.resize(directions.size());
  std::vector<std::string> errors(directions.size());
  parallel_for(directions.size(), jobs, [&](std::size_t i) {
    try {
      MetricEvaluator eval(domain);
      LevelSet one = eval.mu_sphere(x0, level, {directions[i]}, tol, n_exp, cfg);
      ls.samples[i] = one.samples.front();
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (const std::string& e : errors)
    if (!e.empty()) throw GeometryError(e);
  return ls;
}

}  // namespace modmetric
