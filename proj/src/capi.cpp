#include "modmetric.h"

#include <cstring>
#include <string>

#include <json.hpp>

#include "core/harness.hpp"
#include "core/io.hpp"

using namespace modmetric;

struct mm_domain {
  GridDomain domain;
};
struct mm_mask {
  CellSet set;
};
struct mm_field {
  PotentialField field;
};
struct mm_metric_result {
  MetricResult result;
};
struct mm_levelset {
  LevelSet ls;
};

namespace {

thread_local std::string g_last_error;

mm_status fail(mm_status code, const char* what) {
  g_last_error = what ? what : "unknown error";
  return code;
}

template <typename Fn>
mm_status guarded(Fn&& fn) {
  try {
    fn();
    return MM_OK;
  } catch (const ParamError& e) {
    return fail(MM_ERR_PARAM, e.what());
  } catch (const ConfigError& e) {
    return fail(MM_ERR_CONFIG, e.what());
  } catch (const GeometryError& e) {
    return fail(MM_ERR_GEOMETRY, e.what());
  } catch (const NumericError& e) {
    return fail(MM_ERR_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return fail(MM_ERR_NUMERIC, e.what());
  }
}

Vec to_vec(const double* p) { return {p[0], p[1], p[2]}; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

SolverConfig solver_config(const mm_solver_config* cfg) {
  SolverConfig out;
  if (cfg) {
    if (cfg->epsilon_reg > 0) out.epsilon_reg = cfg->epsilon_reg;
    if (cfg->max_iters > 0) out.max_iters = cfg->max_iters;
    if (cfg->tol > 0) out.tol = cfg->tol;
  }
  return out;
}

MetricConfig metric_config(const mm_metric_config* cfg) {
  MetricConfig out;
  if (cfg) {
    if (cfg->control_points >= 0) out.control_points = cfg->control_points;
    if (cfg->restarts > 0) out.restarts = cfg->restarts;
    if (cfg->seed) out.seed = cfg->seed;
    if (cfg->eval_budget > 0) out.eval_budget = cfg->eval_budget;
    if (cfg->probe_tol > 0) out.probe_solver.tol = cfg->probe_tol;
  }
  return out;
}

}  // namespace

extern "C" {

const char* mm_last_error(void) { return g_last_error.c_str(); }

void mm_string_free(char* s) { std::free(s); }

mm_status mm_domain_create_from_json(const char* json_text, mm_domain** out) {
  if (!json_text || !out) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    *out = new mm_domain{build_domain(parse_domain_config(json_text))};
  });
}

mm_status mm_domain_create_from_file(const char* path, mm_domain** out) {
  if (!path || !out) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] { *out = new mm_domain{build_domain(load_domain_config(path))}; });
}

void mm_domain_release(mm_domain* d) { delete d; }

int mm_domain_dim(const mm_domain* d) { return d ? d->domain.spec().dim : 0; }

double mm_domain_spacing(const mm_domain* d) { return d ? d->domain.spec().h : 0.0; }

size_t mm_domain_inside_count(const mm_domain* d) { return d ? d->domain.inside_count() : 0; }

double mm_domain_boundary_distance(const mm_domain* d, const double* point) {
  if (!d || !point) return -1.0;
  return d->domain.boundary_distance(to_vec(point));
}

mm_status mm_mask_from_shape_json(const mm_domain* d, const char* json_text, mm_mask** out) {
  if (!d || !json_text || !out) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] { *out = new mm_mask{mask_from_shape_json(d->domain, json_text)}; });
}

mm_status mm_mask_from_polyline(const mm_domain* d, const double* xyz, int npoints,
                                mm_mask** out) {
  if (!d || !xyz || !out || npoints <= 0) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    std::vector<Vec> verts;
    verts.reserve(npoints);
    for (int i = 0; i < npoints; ++i) verts.push_back(to_vec(xyz + 3 * i));
    *out = new mm_mask{rasterize_polyline(verts, d->domain).set};
  });
}

void mm_mask_release(mm_mask* m) { delete m; }

size_t mm_mask_cell_count(const mm_mask* m) { return m ? m->set.size() : 0; }

int mm_mask_is_connected(const mm_domain* d, const mm_mask* m) {
  if (!d || !m) return 0;
  return is_connected(d->domain.spec(), m->set) ? 1 : 0;
}

mm_status mm_mask_write_rle_csv(const mm_mask* m, const char* path, const char* provenance) {
  if (!m || !path) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    write_text_file(path, mask_to_rle_csv(m->set, provenance ? provenance : ""));
  });
}

mm_status mm_invert_point(const double* x, const double* center, double radius, double* out) {
  if (!x || !center || !out) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    const Vec r = invert_point(to_vec(x), Sphere{to_vec(center), radius});
    out[0] = r.x;
    out[1] = r.y;
    out[2] = r.z;
  });
}

mm_status mm_three_spheres(const double* x1, const double* x2, const double* x0, double R,
                           double k, mm_three_spheres_result* out) {
  if (!x1 || !x2 || !x0 || !out) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    const ThreeSpheresResult r = three_spheres(to_vec(x1), to_vec(x2), to_vec(x0), R, k);
    out->center[0] = r.sphere.center.x;
    out->center[1] = r.sphere.center.y;
    out->center[2] = r.sphere.center.z;
    out->radius = r.sphere.radius;
    out->theta = r.theta;
    out->interior_branch = r.branch == ThreeSpheresBranch::interior_branch ? 1 : 0;
  });
}

mm_status mm_three_spheres_radius(double k, double theta, double* out) {
  if (!out) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] { *out = three_spheres_radius(k, theta); });
}

mm_status mm_cone_alpha0(double r, double R, double* out) {
  if (!out) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] { *out = cone_alpha0(r, R); });
}

mm_status mm_cone_radii(double alpha, double r, double R, double* rho_ext, double* rho_int) {
  if (!rho_ext || !rho_int) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    const ConeRadii radii = cone_radii(alpha, r, R);
    *rho_ext = radii.ext;
    *rho_int = radii.interior;
  });
}

mm_status mm_polarize_mask(const mm_domain* d, const mm_mask* m, const double* center,
                           double radius, mm_mask** out) {
  if (!d || !m || !center || !out) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    *out = new mm_mask{polarize_mask(d->domain, m->set, Sphere{to_vec(center), radius})};
  });
}

mm_status mm_restrict_polarized(const mm_domain* d, const mm_mask* polarized,
                                const double* center, double radius, const double* anchor,
                                mm_mask** out) {
  if (!d || !polarized || !center || !anchor || !out)
    return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    *out = new mm_mask{
        restrict_polarized(d->domain, polarized->set, Sphere{to_vec(center), radius},
                           to_vec(anchor))
            .set};
  });
}

mm_status mm_capacity(const mm_domain* d, const mm_mask* clamp, int n_exp,
                      const mm_solver_config* cfg, mm_capacity_result* out,
                      mm_field** field_out) {
  if (!d || !clamp || !out) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    CapacitySolver solver(d->domain);
    PotentialField field;
    const CapacityResult r =
        solver.solve(clamp->set, n_exp, solver_config(cfg), field_out ? &field : nullptr);
    out->value = r.value;
    out->iterations = r.iterations;
    out->residual = r.residual;
    out->h = r.h;
    out->n = r.n_exp;
    if (field_out) *field_out = new mm_field{std::move(field)};
  });
}

mm_status mm_ring_capacity_oracle(double r, double R, int n_exp, double* out) {
  if (!out) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] { *out = ring_capacity_oracle(r, R, n_exp); });
}

void mm_field_release(mm_field* f) { delete f; }

mm_status mm_field_write_vtk(const mm_field* f, const char* path, const char* provenance) {
  if (!f || !path) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    write_text_file(path, field_to_vtk(f->field, provenance ? provenance : ""));
  });
}

mm_status mm_field_write_csv(const mm_field* f, const char* path, const char* provenance) {
  if (!f || !path) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    write_text_file(path, field_to_csv(f->field, provenance ? provenance : ""));
  });
}

mm_status mm_field_check_json(const mm_field* f, char** json_out) {
  if (!f || !json_out) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    const PotentialCheckReport report = check_potential(f->field);
    nlohmann::json j;
    j["ok"] = report.ok;
    j["checked"] = report.checked;
    nlohmann::json v = nlohmann::json::array();
    for (const auto& viol : report.violations) {
      nlohmann::json jv;
      jv["cell"] = viol.cell;
      jv["kind"] = viol.kind;
      jv["value"] = viol.value;
      v.push_back(jv);
    }
    j["violations"] = v;
    *json_out = dup_string(j.dump(2));
  });
}

mm_status mm_metric(const mm_domain* d, const double* x, const double* y, int n_exp,
                    const mm_metric_config* cfg, mm_metric_result** out) {
  if (!d || !x || !y || !out) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    MetricEvaluator eval(d->domain);
    *out = new mm_metric_result{
        eval.modulus_metric(to_vec(x), to_vec(y), n_exp, metric_config(cfg))};
  });
}

void mm_metric_result_release(mm_metric_result* r) { delete r; }

double mm_metric_result_value(const mm_metric_result* r) { return r ? r->result.value : 0.0; }

int mm_metric_result_evals(const mm_metric_result* r) { return r ? r->result.evals : 0; }

int mm_metric_result_converged(const mm_metric_result* r) {
  return r && r->result.converged ? 1 : 0;
}

int mm_metric_result_vertex_count(const mm_metric_result* r) {
  return r ? static_cast<int>(r->result.vertices.size()) : 0;
}

void mm_metric_result_vertex(const mm_metric_result* r, int i, double* xyz) {
  if (!r || !xyz || i < 0 || i >= static_cast<int>(r->result.vertices.size())) return;
  xyz[0] = r->result.vertices[i].x;
  xyz[1] = r->result.vertices[i].y;
  xyz[2] = r->result.vertices[i].z;
}

mm_status mm_metric_result_to_json(const mm_metric_result* r, int dim, const char* config_json,
                                   char** out) {
  if (!r || !out) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    *out = dup_string(metric_result_to_json(r->result, dim, config_json ? config_json : ""));
  });
}

mm_status mm_metric_segment_bound(const mm_domain* d, const double* x, const double* y,
                                  int n_exp, double* out) {
  if (!d || !x || !y || !out) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    MetricEvaluator eval(d->domain);
    *out = eval.segment_bound(to_vec(x), to_vec(y), n_exp);
  });
}

mm_status mm_radial_profile(const mm_domain* d, const double* x0, const double* direction,
                            const double* ts, int nts, int n_exp, const mm_metric_config* cfg,
                            double* out_values) {
  if (!d || !x0 || !direction || !ts || !out_values || nts <= 0)
    return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    MetricEvaluator eval(d->domain);
    const std::vector<double> tvs(ts, ts + nts);
    const std::vector<double> vals =
        eval.radial_profile(to_vec(x0), to_vec(direction), tvs, n_exp, metric_config(cfg));
    std::copy(vals.begin(), vals.end(), out_values);
  });
}

mm_status mm_mu_sphere(const mm_domain* d, const double* x0, double level,
                       const double* directions, int ndirs, double tol, int n_exp,
                       const mm_metric_config* cfg, int jobs, mm_levelset** out) {
  if (!d || !x0 || !directions || !out || ndirs <= 0)
    return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    std::vector<Vec> dirs;
    dirs.reserve(ndirs);
    for (int i = 0; i < ndirs; ++i) dirs.push_back(to_vec(directions + 3 * i));
    *out = new mm_levelset{mu_sphere_parallel(d->domain, to_vec(x0), level, dirs, tol, n_exp,
                                              metric_config(cfg), resolve_jobs(jobs))};
  });
}

void mm_levelset_release(mm_levelset* ls) { delete ls; }

int mm_levelset_count(const mm_levelset* ls) {
  return ls ? static_cast<int>(ls->ls.samples.size()) : 0;
}

void mm_levelset_sample(const mm_levelset* ls, int i, double* dir_xyz, double* radius,
                        double* achieved) {
  if (!ls || i < 0 || i >= static_cast<int>(ls->ls.samples.size())) return;
  const LevelSetSample& s = ls->ls.samples[i];
  if (dir_xyz) {
    dir_xyz[0] = s.direction.x;
    dir_xyz[1] = s.direction.y;
    dir_xyz[2] = s.direction.z;
  }
  if (radius) *radius = s.radius;
  if (achieved) *achieved = s.achieved;
}

mm_status mm_levelset_roundness(const mm_levelset* ls, double* out) {
  if (!ls || !out) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] { *out = roundness_ratio(ls->ls); });
}

mm_status mm_levelset_write_csv(const mm_levelset* ls, const char* path, const char* provenance) {
  if (!ls || !path) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    write_text_file(path, levelset_to_csv(ls->ls, provenance ? provenance : ""));
  });
}

mm_status mm_verify(const char* suite, const char* config_json, char** report_json,
                    int* passed) {
  if (!suite) return fail(MM_ERR_PARAM, "null argument");
  return guarded([&] {
    SuiteConfig cfg;
    cfg.jobs = 0;  // auto unless overridden
    if (config_json && *config_json) {
      nlohmann::json j = nlohmann::json::parse(config_json);
      if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
      if (j.contains("cases")) cfg.cases = j["cases"].get<int>();
      if (j.contains("grid")) cfg.grid_preset = j["grid"].get<std::string>();
      if (j.contains("slack")) cfg.slack = j["slack"].get<double>();
      if (j.contains("n")) cfg.n_exp = j["n"].get<int>();
      if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
    }
    cfg.jobs = resolve_jobs(cfg.jobs);
    const SuiteReport report = run_suite(suite, cfg);
    if (report_json) *report_json = dup_string(report_to_json(report));
    if (passed) *passed = report.passed() ? 1 : 0;
  });
}

const char* mm_suite_names(void) {
  return "three-spheres,convergence,polarization,monotonicity,metric-axioms,"
         "starlike-cones,roundness";
}

}  // extern "C"
