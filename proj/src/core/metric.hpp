#pragma once

#include <optional>
#include <vector>

#include "core/capacity.hpp"

namespace modmetric {

struct MetricConfig {
  int control_points = 4;   // interior control points of the polyline family
  int restarts = 3;         // seeded restarts (restart 0 is unperturbed)
  uint64_t seed = 1;
  int max_sweeps = 40;      // coordinate sweeps per restart
  int eval_budget = 800;    // capacity evaluations per metric value
  double step0_frac = 0.25; // initial step as a fraction of |x - y|
  double min_step_h = 0.25; // stop once step < min_step_h * h
  double perturb_frac = 0.2;
  SolverConfig probe_solver{.tol = 1e-8};  // inner solves during the search
  SolverConfig final_solver{};             // re-solve of the winning mask
};

struct MetricResult {
  double value = 0.0;          // upper bound of mu_D(x, y)
  std::vector<Vec> vertices;   // minimizing polyline, first = x, last = y
  CellSet mask;                // rasterization of the minimizer
  int evals = 0;
  bool converged = false;
};

struct LevelSetSample {
  Vec direction;        // unit vector
  double radius = 0.0;  // mu(x0, x0 + radius*direction) == level (within tol)
  double achieved = 0.0;
  double uncertainty = 0.0;  // radius bracket half-width at termination
};

struct LevelSet {
  Vec center;
  double level = 0.0;
  std::vector<LevelSetSample> samples;
};

double roundness_ratio(const LevelSet& ls);

// Domain-bound metric machinery.  Owns a capacity solver whose warm-start
// state carries across evaluations; use one evaluator per thread.
class MetricEvaluator {
 public:
  explicit MetricEvaluator(const GridDomain& domain);

  // mu_D(x, y) as a restricted-family infimum over polylines with
  // cfg.control_points interior vertices; deterministic given cfg.seed.
  MetricResult modulus_metric(const Vec& x, const Vec& y, int n_exp, const MetricConfig& cfg);

  // Capacity of the rasterized straight segment [x, y]; fast upper bound.
  double segment_bound(const Vec& x, const Vec& y, int n_exp, const SolverConfig& cfg = {});

  // mu_D(x0, x0 + t * direction) for each t; all samples must stay inside
  // the inscribed ball B(x0, dist(x0, boundary)).
  std::vector<double> radial_profile(const Vec& x0, const Vec& direction,
                                     const std::vector<double>& ts, int n_exp,
                                     const MetricConfig& cfg);

  // Per-direction bisection for mu(x0, x0 + t d) = level on [0, 0.9 R0],
  // with a final secant refinement of the radius.
  LevelSet mu_sphere(const Vec& x0, double level, const std::vector<Vec>& directions,
                     double tol, int n_exp, const MetricConfig& cfg);

  const GridDomain& domain() const { return domain_; }

 private:
  double evaluate_polyline(const std::vector<Vec>& vertices, int n_exp, const SolverConfig& cfg,
                           int& evals);

  const GridDomain& domain_;
  CapacitySolver solver_;
};

// Runs mu_sphere with directions split across workers (deterministic output).
LevelSet mu_sphere_parallel(const GridDomain& domain, const Vec& x0, double level,
                            const std::vector<Vec>& directions, double tol, int n_exp,
                            const MetricConfig& cfg, int jobs);

}  // namespace modmetric
