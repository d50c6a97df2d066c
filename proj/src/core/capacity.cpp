#include "core/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace modmetric {

namespace {

constexpr int32_t kClampZero = -1;
constexpr int32_t kClampOne = -2;

inline double code_value(int32_t code, const std::vector<double>& x) {
  if (code >= 0) return x[static_cast<uint32_t>(code)];
  return code == kClampOne ? 1.0 : 0.0;
}

}  // namespace

double discrete_energy(const GridDomain& domain, const std::vector<double>& values, int n_exp) {
  const GridSpec& spec = domain.spec();
  if (values.size() != spec.cell_count()) throw ParamError("energy: field size mismatch");
  if (n_exp != 2 && n_exp != 3) throw ParamError("energy: n must be 2 or 3");
  double total = 0.0;
  const int nx = spec.nx, ny = spec.ny, nz = spec.nz;
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        const uint32_t c = spec.index(ix, iy, iz);
        double q = 0.0;
        const auto add_axis = [&](int i, int n, uint32_t plus, uint32_t minus) {
          double d = 0.0;
          if (i + 1 < n)
            d = values[plus] - values[c];
          else if (i > 0)
            d = values[c] - values[minus];
          q += d * d;
        };
        add_axis(ix, nx, c + 1, c - 1);
        add_axis(iy, ny, c + nx, c - nx);
        if (spec.dim == 3) add_axis(iz, nz, c + static_cast<uint32_t>(nx) * ny, c - static_cast<uint32_t>(nx) * ny);
        total += n_exp == 2 ? q : q * std::sqrt(q);
      }
  return total;
}

double ring_capacity_oracle(double r, double R, int n_exp) {
  if (!(r > 0.0 && r < R)) throw ParamError("ring oracle: need 0 < r < R");
  const double lg = std::log(R / r);
  if (n_exp == 2) return 2.0 * M_PI / lg;
  if (n_exp == 3) return 4.0 * M_PI / (lg * lg);
  throw ParamError("ring oracle: n must be 2 or 3");
}

PotentialCheckReport check_potential(const PotentialField& field, double tol) {
  if (!field.domain) throw ParamError("check_potential: field has no domain");
  const GridDomain& domain = *field.domain;
  const GridSpec& spec = domain.spec();
  if (field.values.size() != spec.cell_count())
    throw ParamError("check_potential: field size mismatch");

  PotentialCheckReport report;
  std::vector<uint8_t> clamped(spec.cell_count(), 0);
  for (const uint32_t c : field.clamp.cells) clamped[c] = 1;

  const auto flag = [&](uint32_t c, const char* kind, double v) {
    report.ok = false;
    report.violations.push_back({c, kind, v});
  };

  for (std::size_t ci = 0; ci < spec.cell_count(); ++ci) {
    const uint32_t c = static_cast<uint32_t>(ci);
    const double u = field.values[c];
    ++report.checked;
    if (!domain.inside(c)) {
      if (u != 0.0) flag(c, "outside", u);
      continue;
    }
    if (clamped[c]) {
      if (u != 1.0) flag(c, "clamp", u);
      continue;
    }
    if (u < -tol || u > 1.0 + tol) flag(c, "range", u);

    int ix, iy, iz;
    spec.coords(c, ix, iy, iz);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const auto visit = [&](bool cond, uint32_t n) {
      if (!cond) return;
      lo = std::fmin(lo, field.values[n]);
      hi = std::fmax(hi, field.values[n]);
    };
    visit(ix > 0, c - 1);
    visit(ix + 1 < spec.nx, c + 1);
    visit(iy > 0, c - spec.nx);
    visit(iy + 1 < spec.ny, c + spec.nx);
    if (spec.dim == 3) {
      const uint32_t stride = static_cast<uint32_t>(spec.nx) * spec.ny;
      visit(iz > 0, c - stride);
      visit(iz + 1 < spec.nz, c + stride);
    }
    if (u > hi + tol) flag(c, "interior_max", u);
    if (u < lo - tol) flag(c, "interior_min", u);
  }
  return report;
}

CapacitySolver::CapacitySolver(const GridDomain& domain) : domain_(domain) {
  const GridSpec& spec = domain.spec();
  const int nx = spec.nx, ny = spec.ny, nz = spec.nz;
  const uint32_t zstride = static_cast<uint32_t>(nx) * ny;
  active_cells_.reserve(domain.inside_count() * 2);
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        const uint32_t c = spec.index(ix, iy, iz);
        uint32_t p[3], q[3];
        const auto axis_pair = [&](int i, int n, uint32_t step, int a) {
          if (i + 1 < n) {
            p[a] = c;
            q[a] = c + step;
          } else if (i > 0) {
            p[a] = c - step;
            q[a] = c;
          } else {
            p[a] = c;
            q[a] = c;  // single-cell axis: zero difference
          }
        };
        axis_pair(ix, nx, 1, 0);
        axis_pair(iy, ny, static_cast<uint32_t>(nx), 1);
        if (spec.dim == 3) axis_pair(iz, nz, zstride, 2);
        bool active = false;
        for (int a = 0; a < spec.dim; ++a)
          active = active || domain.inside(p[a]) || domain.inside(q[a]);
        if (!active) continue;
        active_cells_.push_back(c);
        for (int a = 0; a < spec.dim; ++a) {
          inst_p_.push_back(p[a]);
          inst_q_.push_back(q[a]);
        }
      }
  previous_.assign(spec.cell_count(), 0.0);
}

CapacityResult CapacitySolver::solve(const CellSet& clamp, int n_exp, const SolverConfig& cfg,
                                     PotentialField* field_out) {
  const GridSpec& spec = domain_.spec();
  if (n_exp != 2 && n_exp != 3) throw ParamError("capacity: n must be 2 or 3");
  if (n_exp != spec.dim) throw ParamError("capacity: n must equal the grid dimension");
  if (clamp.empty()) throw ParamError("capacity: empty clamp set");
  for (const uint32_t c : clamp.cells)
    if (c >= spec.cell_count() || !domain_.inside(c))
      throw GeometryError("capacity: clamp set touches the outside region (not a condenser)");

  std::vector<uint8_t> clamp_mask(spec.cell_count(), 0);
  for (const uint32_t c : clamp.cells) clamp_mask[c] = 1;

  std::vector<double> box_values(spec.cell_count(), 0.0);
  CapacityResult result = n_exp == 2 ? solve_linear(clamp_mask, cfg, box_values)
                                     : solve_newton(clamp_mask, cfg, box_values);
  result.h = spec.h;
  result.n_exp = n_exp;
  result.value = discrete_energy(domain_, box_values, n_exp);

  previous_ = box_values;
  have_previous_ = true;

  if (field_out) {
    field_out->domain = &domain_;
    field_out->clamp = clamp;
    field_out->values = std::move(box_values);
  }
  return result;
}

CapacityResult CapacitySolver::solve_linear(const std::vector<uint8_t>& clamp_mask,
                                            const SolverConfig& cfg,
                                            std::vector<double>& box_values) {
  const GridSpec& spec = domain_.spec();

  // Compress to free unknowns (inside D, not clamped).
  std::vector<int32_t> fidx(spec.cell_count(), -1);
  std::vector<uint32_t> free_cells;
  for (std::size_t c = 0; c < spec.cell_count(); ++c)
    if (domain_.inside(static_cast<uint32_t>(c)) && !clamp_mask[c]) {
      fidx[c] = static_cast<int32_t>(free_cells.size());
      free_cells.push_back(static_cast<uint32_t>(c));
    }
  const std::size_t nf = free_cells.size();

  std::vector<double> diag(nf, 0.0), b(nf, 0.0);
  std::vector<uint32_t> pi, pj;
  pi.reserve(inst_p_.size());
  pj.reserve(inst_p_.size());
  const auto cell_value = [&](uint32_t c) { return clamp_mask[c] ? 1.0 : 0.0; };
  for (std::size_t k = 0; k < inst_p_.size(); ++k) {
    const uint32_t p = inst_p_[k], q = inst_q_[k];
    if (p == q) continue;
    const int32_t fp = fidx[p], fq = fidx[q];
    if (fp >= 0 && fq >= 0) {
      pi.push_back(static_cast<uint32_t>(fp));
      pj.push_back(static_cast<uint32_t>(fq));
      diag[fp] += 2.0;
      diag[fq] += 2.0;
    } else if (fp >= 0) {
      diag[fp] += 2.0;
      b[fp] += 2.0 * cell_value(q);
    } else if (fq >= 0) {
      diag[fq] += 2.0;
      b[fq] += 2.0 * cell_value(p);
    }
  }

  const auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < nf; ++i) y[i] = diag[i] * x[i];
    for (std::size_t k = 0; k < pi.size(); ++k) {
      const uint32_t i = pi[k], j = pj[k];
      y[i] -= 2.0 * x[j];
      y[j] -= 2.0 * x[i];
    }
  };

  std::vector<double> x(nf, 0.0);
  if (have_previous_)
    for (std::size_t i = 0; i < nf; ++i) x[i] = previous_[free_cells[i]];

  double bnorm = 0.0;
  for (const double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);

  CapacityResult res;
  if (nf > 0 && bnorm > 0.0) {
    std::vector<double> r(nf), z(nf), p(nf), ap(nf);
    apply(x, ap);
    for (std::size_t i = 0; i < nf; ++i) r[i] = b[i] - ap[i];
    const auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
      for (std::size_t i = 0; i < nf; ++i) out[i] = in[i] / diag[i];
    };
    precond(r, z);
    p = z;
    double rz = 0.0, rnorm2 = 0.0;
    for (std::size_t i = 0; i < nf; ++i) {
      rz += r[i] * z[i];
      rnorm2 += r[i] * r[i];
    }
    const double stop = cfg.tol * bnorm;
    int it = 0;
    while (std::sqrt(rnorm2) > stop) {
      if (++it > cfg.max_iters)
        throw NumericError("capacity: CG did not converge within max_iters (residual " +
                           std::to_string(std::sqrt(rnorm2) / bnorm) + ")");
      apply(p, ap);
      double pap = 0.0;
      for (std::size_t i = 0; i < nf; ++i) pap += p[i] * ap[i];
      const double alpha = rz / pap;
      rnorm2 = 0.0;
      for (std::size_t i = 0; i < nf; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
        rnorm2 += r[i] * r[i];
      }
      precond(r, z);
      double rz_new = 0.0;
      for (std::size_t i = 0; i < nf; ++i) rz_new += r[i] * z[i];
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < nf; ++i) p[i] = z[i] + beta * p[i];
    }
    res.iterations = it;
    res.residual = std::sqrt(rnorm2) / bnorm;
  }

  for (std::size_t c = 0; c < spec.cell_count(); ++c)
    box_values[c] = clamp_mask[c] ? 1.0 : (fidx[c] >= 0 ? x[fidx[c]] : 0.0);
  return res;
}

struct CapacitySolver::Workspace {
  std::vector<int32_t> code_p, code_q;  // per instance endpoint codes
  std::vector<uint32_t> free_cells;
  std::size_t nf = 0;
};

CapacityResult CapacitySolver::solve_newton(const std::vector<uint8_t>& clamp_mask,
                                            const SolverConfig& cfg,
                                            std::vector<double>& box_values) {
  const GridSpec& spec = domain_.spec();
  const int dim = spec.dim;

  // Warm start from the 2-harmonic potential when nothing better is cached.
  if (!have_previous_) {
    SolverConfig lin = cfg;
    lin.tol = std::fmax(cfg.tol, 1e-8);
    std::vector<double> init(spec.cell_count(), 0.0);
    // Linear solve accepts only n == dim; reuse its machinery directly.
    solve_linear(clamp_mask, lin, init);
    previous_ = init;
    have_previous_ = true;
  }

  Workspace ws;
  std::vector<int32_t> fidx(spec.cell_count(), -1);
  for (std::size_t c = 0; c < spec.cell_count(); ++c)
    if (domain_.inside(static_cast<uint32_t>(c)) && !clamp_mask[c]) {
      fidx[c] = static_cast<int32_t>(ws.nf++);
      ws.free_cells.push_back(static_cast<uint32_t>(c));
    }
  ws.code_p.resize(inst_p_.size());
  ws.code_q.resize(inst_p_.size());
  for (std::size_t k = 0; k < inst_p_.size(); ++k) {
    const auto code = [&](uint32_t c) -> int32_t {
      if (fidx[c] >= 0) return fidx[c];
      return clamp_mask[c] ? kClampOne : kClampZero;
    };
    ws.code_p[k] = code(inst_p_[k]);
    ws.code_q[k] = code(inst_q_[k]);
  }

  const std::size_t nf = ws.nf;
  const std::size_t ncells = active_cells_.size();
  std::vector<double> x(nf, 0.0);
  for (std::size_t i = 0; i < nf; ++i) x[i] = previous_[ws.free_cells[i]];

  const auto energy = [&](const std::vector<double>& u, double eps_h2) {
    double total = 0.0;
    for (std::size_t c = 0; c < ncells; ++c) {
      double q = eps_h2;
      for (int a = 0; a < dim; ++a) {
        const std::size_t k = c * dim + a;
        const double d = code_value(ws.code_q[k], u) - code_value(ws.code_p[k], u);
        q += d * d;
      }
      total += q * std::sqrt(q);
    }
    return total;
  };

  std::vector<double> grad(nf), hdiag(nf);
  const auto gradient = [&](const std::vector<double>& u, double eps_h2) {
    std::fill(grad.begin(), grad.end(), 0.0);
    std::fill(hdiag.begin(), hdiag.end(), 1e-300);
    for (std::size_t c = 0; c < ncells; ++c) {
      double d[3] = {0, 0, 0};
      double q = eps_h2;
      for (int a = 0; a < dim; ++a) {
        const std::size_t k = c * dim + a;
        d[a] = code_value(ws.code_q[k], u) - code_value(ws.code_p[k], u);
        q += d[a] * d[a];
      }
      const double s = std::sqrt(q);
      for (int a = 0; a < dim; ++a) {
        const std::size_t k = c * dim + a;
        const double g = 3.0 * s * d[a];
        const double hd = 3.0 * s + 3.0 * d[a] * d[a] / s;
        if (ws.code_q[k] >= 0) {
          grad[ws.code_q[k]] += g;
          hdiag[ws.code_q[k]] += hd;
        }
        if (ws.code_p[k] >= 0) {
          grad[ws.code_p[k]] -= g;
          hdiag[ws.code_p[k]] += hd;
        }
      }
    }
  };

  // Hessian-vector product of the regularized energy at the current point;
  // per-cell curvature data recomputed on the fly.
  std::vector<double> dvals(ncells * 3), svals(ncells);
  const auto cache_point = [&](const std::vector<double>& u, double eps_h2) {
    for (std::size_t c = 0; c < ncells; ++c) {
      double q = eps_h2;
      for (int a = 0; a < dim; ++a) {
        const std::size_t k = c * dim + a;
        const double d = code_value(ws.code_q[k], u) - code_value(ws.code_p[k], u);
        dvals[c * 3 + a] = d;
        q += d * d;
      }
      svals[c] = std::sqrt(q);
    }
  };
  const auto apply_hessian = [&](const std::vector<double>& v, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t c = 0; c < ncells; ++c) {
      double e[3] = {0, 0, 0};
      double de = 0.0;
      for (int a = 0; a < dim; ++a) {
        const std::size_t k = c * dim + a;
        const double vq = ws.code_q[k] >= 0 ? v[ws.code_q[k]] : 0.0;
        const double vp = ws.code_p[k] >= 0 ? v[ws.code_p[k]] : 0.0;
        e[a] = vq - vp;
        de += dvals[c * 3 + a] * e[a];
      }
      const double s = svals[c];
      for (int a = 0; a < dim; ++a) {
        const std::size_t k = c * dim + a;
        const double t = 3.0 * s * e[a] + 3.0 * dvals[c * 3 + a] * de / s;
        if (ws.code_q[k] >= 0) out[ws.code_q[k]] += t;
        if (ws.code_p[k] >= 0) out[ws.code_p[k]] -= t;
      }
    }
  };

  double eps = cfg.epsilon_reg > 0 ? cfg.epsilon_reg : 1e-3;
  const double h = spec.h;
  double eps_h2 = (eps * h) * (eps * h);
  double f_current = energy(x, eps_h2);

  std::vector<double> dir(nf), r(nf), z(nf), p(nf), ap(nf), trial(nf);
  int outer = 0, plateau = 0;
  double last_rel = 0.0;
  const int max_outer = 400;

  while (outer < max_outer) {
    ++outer;
    gradient(x, eps_h2);
    double gnorm2 = 0.0;
    for (std::size_t i = 0; i < nf; ++i) gnorm2 += grad[i] * grad[i];

    bool stepped = false;
    if (gnorm2 > 0.0) {
      // Inexact Newton: CG on the PSD Hessian to a loose relative tolerance.
      cache_point(x, eps_h2);
      std::fill(dir.begin(), dir.end(), 0.0);
      for (std::size_t i = 0; i < nf; ++i) r[i] = -grad[i];
      for (std::size_t i = 0; i < nf; ++i) z[i] = r[i] / hdiag[i];
      p = z;
      double rz = 0.0;
      for (std::size_t i = 0; i < nf; ++i) rz += r[i] * z[i];
      const double rtarget2 = gnorm2 * 0.01;  // ||r|| <= 0.1 ||g||
      for (int it = 0; it < 400; ++it) {
        double rn2 = 0.0;
        for (std::size_t i = 0; i < nf; ++i) rn2 += r[i] * r[i];
        if (rn2 <= rtarget2) break;
        apply_hessian(p, ap);
        double pap = 0.0;
        for (std::size_t i = 0; i < nf; ++i) pap += p[i] * ap[i];
        if (pap <= 0.0) break;
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < nf; ++i) {
          dir[i] += alpha * p[i];
          r[i] -= alpha * ap[i];
        }
        for (std::size_t i = 0; i < nf; ++i) z[i] = r[i] / hdiag[i];
        double rz_new = 0.0;
        for (std::size_t i = 0; i < nf; ++i) rz_new += r[i] * z[i];
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < nf; ++i) p[i] = z[i] + beta * p[i];
      }

      double gd = 0.0;
      for (std::size_t i = 0; i < nf; ++i) gd += grad[i] * dir[i];
      if (gd < 0.0) {
        double t = 1.0;
        for (int ls = 0; ls < cfg.ls_max; ++ls) {
          for (std::size_t i = 0; i < nf; ++i) trial[i] = x[i] + t * dir[i];
          const double f_trial = energy(trial, eps_h2);
          if (f_trial <= f_current + 1e-4 * t * gd) {
            last_rel = (f_current - f_trial) / std::fmax(f_trial, 1e-300);
            x.swap(trial);
            f_current = f_trial;
            stepped = true;
            break;
          }
          t *= 0.5;
        }
      }
    }

    const bool stalled = !stepped || last_rel < cfg.tol;
    if (stalled) {
      if (eps > cfg.epsilon_min) {
        eps *= 0.5;  // continuation
        eps_h2 = (eps * h) * (eps * h);
        f_current = energy(x, eps_h2);
        plateau = 0;
      } else if (++plateau >= cfg.plateau_iters) {
        break;
      }
    } else {
      plateau = 0;
    }
  }
  if (outer >= max_outer)
    throw NumericError("capacity: Newton solver did not converge (relative decrease " +
                       std::to_string(last_rel) + ")");

  for (std::size_t c = 0; c < spec.cell_count(); ++c)
    box_values[c] = clamp_mask[c] ? 1.0 : (fidx[c] >= 0 ? x[fidx[c]] : 0.0);

  CapacityResult res;
  res.iterations = outer;
  res.residual = last_rel;
  return res;
}

double capacity(const GridDomain& domain, const CellSet& clamp, int n_exp,
                const SolverConfig& cfg) {
  CapacitySolver solver(domain);
  return solver.solve(clamp, n_exp, cfg).value;
}

}  // namespace modmetric
