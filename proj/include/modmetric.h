/* modmetric — conformal capacity and modulus-metric laboratory.
 *
 * C interface of the shared library.  All functions return mm_status;
 * outputs are written through pointers.  On failure mm_last_error() holds a
 * thread-local description.  Handles are opaque and released with their
 * matching release function.  Points are passed as double[3]; 2-D domains
 * ignore the z component.
 */
#ifndef MODMETRIC_H
#define MODMETRIC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mm_status {
  MM_OK = 0,
  MM_ERR_PARAM = 1,    /* invalid argument values */
  MM_ERR_CONFIG = 2,   /* malformed config / file problems */
  MM_ERR_GEOMETRY = 3, /* precondition on the geometric data violated */
  MM_ERR_NUMERIC = 4,  /* solver failed to converge */
  MM_ERR_IO = 5
} mm_status;

const char* mm_last_error(void);
void mm_string_free(char* s);

typedef struct mm_domain mm_domain;
typedef struct mm_mask mm_mask;
typedef struct mm_field mm_field;
typedef struct mm_metric_result mm_metric_result;
typedef struct mm_levelset mm_levelset;

/* -------- domains ------------------------------------------------------ */

mm_status mm_domain_create_from_json(const char* json_text, mm_domain** out);
mm_status mm_domain_create_from_file(const char* path, mm_domain** out);
void mm_domain_release(mm_domain* d);
int mm_domain_dim(const mm_domain* d);
double mm_domain_spacing(const mm_domain* d);
size_t mm_domain_inside_count(const mm_domain* d);
/* Grid surrogate for dist(p, boundary of D). */
double mm_domain_boundary_distance(const mm_domain* d, const double* point);

/* -------- compact sets -------------------------------------------------- */

mm_status mm_mask_from_shape_json(const mm_domain* d, const char* json_text, mm_mask** out);
mm_status mm_mask_from_polyline(const mm_domain* d, const double* xyz, int npoints,
                                mm_mask** out);
void mm_mask_release(mm_mask* m);
size_t mm_mask_cell_count(const mm_mask* m);
int mm_mask_is_connected(const mm_domain* d, const mm_mask* m);
mm_status mm_mask_write_rle_csv(const mm_mask* m, const char* path, const char* provenance);

/* -------- exact geometry ------------------------------------------------ */

mm_status mm_invert_point(const double* x, const double* center, double radius, double* out);

typedef struct mm_three_spheres_result {
  double center[3];
  double radius;
  double theta;
  int interior_branch; /* 1 on [pi - arccot k, pi]; 0 = sphere through x0 */
} mm_three_spheres_result;

mm_status mm_three_spheres(const double* x1, const double* x2, const double* x0, double R,
                           double k, mm_three_spheres_result* out);
mm_status mm_three_spheres_radius(double k, double theta, double* out);
mm_status mm_cone_alpha0(double r, double R, double* out);
mm_status mm_cone_radii(double alpha, double r, double R, double* rho_ext, double* rho_int);

/* -------- polarization -------------------------------------------------- */

mm_status mm_polarize_mask(const mm_domain* d, const mm_mask* m, const double* center,
                           double radius, mm_mask** out);
mm_status mm_restrict_polarized(const mm_domain* d, const mm_mask* polarized,
                                const double* center, double radius, const double* anchor,
                                mm_mask** out);

/* -------- capacity ------------------------------------------------------ */

typedef struct mm_solver_config {
  double epsilon_reg; /* <= 0: default */
  int max_iters;      /* <= 0: default */
  double tol;         /* <= 0: default */
} mm_solver_config;

typedef struct mm_capacity_result {
  double value;
  int iterations;
  double residual;
  double h;
  int n;
} mm_capacity_result;

mm_status mm_capacity(const mm_domain* d, const mm_mask* clamp, int n_exp,
                      const mm_solver_config* cfg, mm_capacity_result* out,
                      mm_field** field_out);
mm_status mm_ring_capacity_oracle(double r, double R, int n_exp, double* out);

void mm_field_release(mm_field* f);
mm_status mm_field_write_vtk(const mm_field* f, const char* path, const char* provenance);
mm_status mm_field_write_csv(const mm_field* f, const char* path, const char* provenance);
/* Maximum-principle / boundary-value audit; JSON report. */
mm_status mm_field_check_json(const mm_field* f, char** json_out);

/* -------- modulus metric ------------------------------------------------ */

typedef struct mm_metric_config {
  int control_points; /* < 0: default 4 */
  int restarts;       /* <= 0: default 3 */
  uint64_t seed;
  int eval_budget;    /* <= 0: default */
  double probe_tol;   /* <= 0: default */
} mm_metric_config;

mm_status mm_metric(const mm_domain* d, const double* x, const double* y, int n_exp,
                    const mm_metric_config* cfg, mm_metric_result** out);
void mm_metric_result_release(mm_metric_result* r);
double mm_metric_result_value(const mm_metric_result* r);
int mm_metric_result_evals(const mm_metric_result* r);
int mm_metric_result_converged(const mm_metric_result* r);
int mm_metric_result_vertex_count(const mm_metric_result* r);
void mm_metric_result_vertex(const mm_metric_result* r, int i, double* xyz);
mm_status mm_metric_result_to_json(const mm_metric_result* r, int dim, const char* config_json,
                                   char** out);
mm_status mm_metric_segment_bound(const mm_domain* d, const double* x, const double* y,
                                  int n_exp, double* out);

mm_status mm_radial_profile(const mm_domain* d, const double* x0, const double* direction,
                            const double* ts, int nts, int n_exp, const mm_metric_config* cfg,
                            double* out_values);

mm_status mm_mu_sphere(const mm_domain* d, const double* x0, double level,
                       const double* directions, int ndirs, double tol, int n_exp,
                       const mm_metric_config* cfg, int jobs, mm_levelset** out);
void mm_levelset_release(mm_levelset* ls);
int mm_levelset_count(const mm_levelset* ls);
void mm_levelset_sample(const mm_levelset* ls, int i, double* dir_xyz, double* radius,
                        double* achieved);
mm_status mm_levelset_roundness(const mm_levelset* ls, double* out);
mm_status mm_levelset_write_csv(const mm_levelset* ls, const char* path, const char* provenance);

/* -------- verification suites ------------------------------------------- */

/* config_json: {"seed":u64,"cases":n,"grid":"small|default|large",
 *               "slack":x,"n":2|3,"jobs":n}; every key optional.
 * passed is 1 iff every non-skipped record passed. */
mm_status mm_verify(const char* suite, const char* config_json, char** report_json, int* passed);
const char* mm_suite_names(void); /* comma-separated */

#ifdef __cplusplus
}
#endif
#endif /* MODMETRIC_H */
