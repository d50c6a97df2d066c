#pragma once

#include <string>
#include <vector>

#include "core/grid.hpp"

namespace modmetric {

struct SolverConfig {
  double epsilon_reg = 1e-3;  // initial gradient regularizer, n = 3 only
  int max_iters = 50000;      // CG cap (n = 2) / outer Newton cap (n = 3)
  double tol = 1e-10;         // CG relative residual / relative energy decrease
  int plateau_iters = 10;     // n = 3 stop: plateau length at the final epsilon
  double epsilon_min = 1e-8;  // continuation floor
  int ls_max = 40;            // backtracking halvings
};

struct PotentialField {
  const GridDomain* domain = nullptr;
  CellSet clamp;               // u = 1 here
  std::vector<double> values;  // one value per bounding-box cell
};

struct CapacityResult {
  double value = 0.0;  // unregularized discrete n-energy of the final iterate
  int iterations = 0;
  double residual = 0.0;
  double h = 0.0;
  int n_exp = 0;
};

// Sum over cells of |grad_h u|^n h^n with the forward-difference cell
// gradient (backward fallback at the +edge of the box).
double discrete_energy(const GridDomain& domain, const std::vector<double>& values, int n_exp);

// Analytic capacity of the spherical ring r < |x| < R:
//   omega_{n-1} (log(R/r))^{1-n},  omega_1 = 2 pi, omega_2 = 4 pi.
double ring_capacity_oracle(double r, double R, int n_exp);

struct PotentialViolation {
  uint32_t cell = 0;
  std::string kind;  // "range", "clamp", "outside", "interior_max", "interior_min"
  double value = 0.0;
};

struct PotentialCheckReport {
  bool ok = true;
  std::size_t checked = 0;
  std::vector<PotentialViolation> violations;
};

// Maximum-principle and boundary-value audit of a solved field: 0 <= u <= 1,
// u = 1 on the clamp set, u = 0 outside D, and no strict interior local
// extrema of u in D \ K beyond tol.
PotentialCheckReport check_potential(const PotentialField& field, double tol = 1e-8);

// Energy minimizer bound to one domain; reuses its stencil tables and warm
// starts from the previous solution, so repeated solves with nearby clamp
// sets are cheap.  Not thread-safe; use one instance per worker.
class CapacitySolver {
 public:
  explicit CapacitySolver(const GridDomain& domain);

  // Minimizes the discrete n-energy subject to u = 1 on clamp, u = 0 outside
  // D.  n = 2 solves the linear system by preconditioned CG; n = 3 runs
  // damped Newton on the regularized energy with epsilon continuation.
  CapacityResult solve(const CellSet& clamp, int n_exp, const SolverConfig& cfg = {},
                       PotentialField* field_out = nullptr);

  const GridDomain& domain() const { return domain_; }
  void reset_warm_start() { have_previous_ = false; }

 private:
  struct Workspace;

  const GridDomain& domain_;
  // Difference instances (one per cell and axis, endpoints as box cells).
  std::vector<uint32_t> inst_p_, inst_q_;
  std::vector<uint32_t> active_cells_;        // cells with any inside endpoint
  std::vector<uint32_t> cell_inst_offset_;    // active cell -> dim instances
  std::vector<double> previous_;              // last solution over the box
  bool have_previous_ = false;

  CapacityResult solve_linear(const std::vector<uint8_t>& clamp_mask, const SolverConfig& cfg,
                              std::vector<double>& box_values);
  CapacityResult solve_newton(const std::vector<uint8_t>& clamp_mask, const SolverConfig& cfg,
                              std::vector<double>& box_values);
};

// Convenience wrapper returning only the value.
double capacity(const GridDomain& domain, const CellSet& clamp, int n_exp,
                const SolverConfig& cfg = {});

}  // namespace modmetric
