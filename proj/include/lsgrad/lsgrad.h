#ifndef LSGRAD_LSGRAD_H
#define LSGRAD_LSGRAD_H

/* C interface to the least-gradient / Dirichlet-to-Neumann toolkit.
 *
 * Conventions
 *   - Every fallible call returns an lsg_status. On failure a description is
 *     available from lsg_last_error() on the calling thread until the next
 *     failing call on that thread.
 *   - Handles are opaque and owned by the caller; release them with the
 *     matching *_free function. Passing NULL to *_free is allowed.
 *   - Field arrays are caller-allocated with the length given by the grid:
 *     cells (bulk), faces (interior dual) or boundary faces (boundary data).
 *     Output pointers documented as optional may be NULL.
 *   - LSG_NOT_CONVERGED means the solver stopped at its iteration limit;
 *     every output is still written and describes the last iterate.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define LSG_API __declspec(dllexport)
#else
#define LSG_API __attribute__((visibility("default")))
#endif

typedef enum lsg_status {
  LSG_OK = 0,
  LSG_INVALID_ARGUMENT = 1,
  LSG_NOT_CONVERGED = 2,
  LSG_IO_ERROR = 3,
  LSG_SIZE_LIMIT = 4,
  LSG_INTERNAL = 5
} lsg_status;

typedef struct lsg_grid lsg_grid;
typedef struct lsg_trajectory lsg_trajectory;

LSG_API const char* lsg_version(void);
LSG_API const char* lsg_last_error(void);
LSG_API const char* lsg_status_name(lsg_status status);

/* ---- solver options ---------------------------------------------------- */

typedef struct lsg_solver_options {
  int max_iters;
  double tolerance;      /* relative duality gap */
  double div_tolerance;  /* integral of |div z| relative to the perimeter */
  double abs_tolerance;  /* absolute floor added to the gap test, 0 = none */
  uint64_t seed;         /* 0 starts from the data mean */
  int check_every;
  int adaptive_steps;    /* nonzero: balance primal and dual step sizes */
} lsg_solver_options;

LSG_API void lsg_solver_options_default(lsg_solver_options* opts);

/* ---- grids ------------------------------------------------------------- */

LSG_API lsg_status lsg_grid_square(int n, double side, lsg_grid** out);
LSG_API lsg_status lsg_grid_disk(int n, double radius, lsg_grid** out);
/* "square:N[:side]", "disk:N[:radius]" or the path of a grid JSON file. */
LSG_API lsg_status lsg_grid_resolve(const char* spec, lsg_grid** out);
LSG_API lsg_status lsg_grid_save(const lsg_grid* grid, const char* path);
LSG_API void lsg_grid_free(lsg_grid* grid);

LSG_API size_t lsg_grid_num_cells(const lsg_grid* grid);
LSG_API size_t lsg_grid_num_faces(const lsg_grid* grid);
LSG_API size_t lsg_grid_num_boundary(const lsg_grid* grid);
LSG_API double lsg_grid_area(const lsg_grid* grid);
LSG_API double lsg_grid_perimeter(const lsg_grid* grid);
/* Interleaved x, y pairs: 2 * num_cells and 2 * num_boundary entries. */
LSG_API lsg_status lsg_grid_cell_centers(const lsg_grid* grid, double* xy);
LSG_API lsg_status lsg_grid_boundary_midpoints(const lsg_grid* grid, double* xy);
/* Arc-length weight of each boundary face. */
LSG_API lsg_status lsg_grid_boundary_lengths(const lsg_grid* grid, double* lengths);

/* ---- fields ------------------------------------------------------------ */

/* CSV ("index,value") or, for .bin/.lgd paths, the LGD1 binary column.
 * lsg_field_read allocates *values; release it with lsg_buffer_free. */
LSG_API lsg_status lsg_field_read(const char* path, double** values, size_t* count);
LSG_API lsg_status lsg_field_write(const char* path, const double* values, size_t count);
LSG_API void lsg_buffer_free(double* values);

/* Boundary presets: sign_x, example33, const:C, linear_x:C, random:SEED[:A]. */
LSG_API lsg_status lsg_boundary_preset(const lsg_grid* grid, const char* spec, double* out);

/* ---- relaxed Dirichlet problem and the DtN map ------------------------- */

typedef struct lsg_certificate {
  double z_sup;
  double g_sup;
  double div_residual;
  double div_max;
  double pairing_defect;
  double sign_defect;
  double sign_defect_max;
  double flux;
} lsg_certificate;

typedef struct lsg_solve_info {
  double primal_energy;  /* Phi_h(u) */
  double dual_energy;    /* rigorous lower bound */
  double gap;
  double phi;            /* <g, h> */
  double div_residual;
  double div_max;
  int iterations;
  int converged;
  lsg_certificate certificate;
} lsg_solve_info;

/* Minimizes tv(u) + int |h - Tu|. anisotropic != 0 uses the l1 edge norm.
 * u (cells), z_interior (faces) and g (boundary) are optional. */
LSG_API lsg_status lsg_solve_dirichlet(const lsg_grid* grid, const double* h,
                                       const lsg_solver_options* opts, int anisotropic,
                                       double* u, double* z_interior, double* g,
                                       lsg_solve_info* info);

/* Same solve, persisted: u.csv, z.csv, g.csv and report.json in dir. */
LSG_API lsg_status lsg_solve_dirichlet_save(const lsg_grid* grid, const double* h,
                                            const lsg_solver_options* opts, const char* dir,
                                            lsg_solve_info* info);

/* Phi_h(u) for the isotropic or anisotropic norm. */
LSG_API lsg_status lsg_energy(const lsg_grid* grid, const double* h, const double* u,
                              int anisotropic, double* out);

/* Lower bound on min Phi_h from z (interior faces, boundary faces); the
 * field is used as given, so it should satisfy |z| <= 1. */
LSG_API lsg_status lsg_dual_bound(const lsg_grid* grid, const double* h,
                                  const double* z_interior, const double* z_boundary,
                                  double* out);

LSG_API lsg_status lsg_certify(const lsg_grid* grid, const double* h, const double* u,
                               const double* z_interior, const double* z_boundary,
                               lsg_certificate* out);

typedef struct lsg_homogeneity_entry {
  double lambda;
  double phi;
  double deviation;
  double relative_deviation;
  double gap;
  double cross_gap;
  double cross_bound;
  double selection_change;
  int converged;
} lsg_homogeneity_entry;

/* One entry per lambda. *phi_base receives phi(h). */
LSG_API lsg_status lsg_homogeneity(const lsg_grid* grid, const double* h,
                                   const double* lambdas, size_t count,
                                   const lsg_solver_options* opts,
                                   lsg_homogeneity_entry* entries, double* phi_base);

/* ---- Robin problem and resolvent --------------------------------------- */

typedef struct lsg_resolvent_info {
  double phi;
  double gap;
  double div_residual;
  double sign_defect;
  int iterations;
  int converged;
} lsg_resolvent_info;

/* h = J_lambda g. h and g_sel (boundary) are required, u (cells) optional. */
LSG_API lsg_status lsg_resolvent(const lsg_grid* grid, const double* g, double lambda,
                                 const lsg_solver_options* opts, double* h, double* g_sel,
                                 double* u, lsg_resolvent_info* info);

typedef struct lsg_robin_info {
  double energy;
  double dual_energy;
  double gap;
  double div_residual;
  double bc_defect;
  int iterations;
  int converged;
} lsg_robin_info;

/* Truncated Robin problem; u (cells) and flux = [z, nu] (boundary) optional. */
LSG_API lsg_status lsg_robin(const lsg_grid* grid, const double* g, double alpha,
                             const lsg_solver_options* opts, double* u, double* flux,
                             lsg_robin_info* info);

/* ---- evolution --------------------------------------------------------- */

typedef enum lsg_nonlinearity_kind {
  LSG_F_ZERO = 0,
  LSG_F_LINEAR = 1,
  LSG_F_TABLE = 2
} lsg_nonlinearity_kind;

/* LINEAR: f(h) = omega h. TABLE: piecewise linear through the knots,
 * f(0) = 0, every slope bounded by omega. */
typedef struct lsg_nonlinearity {
  lsg_nonlinearity_kind kind;
  double omega;
  const double* knot_x;
  const double* knot_y;
  size_t num_knots;
} lsg_nonlinearity;

/* Implicit Euler steps of h' + Lambda h + f(h) = source up to t_end.
 * source (boundary, constant in time) and f are optional (zero).
 * Returns LSG_NOT_CONVERGED with a valid *out if some step did not converge. */
LSG_API lsg_status lsg_evolve(const lsg_grid* grid, const double* h0, double t_end,
                              double tau, const double* source, const lsg_nonlinearity* f,
                              const lsg_solver_options* opts, lsg_trajectory** out);
LSG_API void lsg_trajectory_free(lsg_trajectory* traj);

LSG_API size_t lsg_trajectory_num_states(const lsg_trajectory* traj);
LSG_API lsg_status lsg_trajectory_time(const lsg_trajectory* traj, size_t index, double* t);
LSG_API lsg_status lsg_trajectory_state(const lsg_trajectory* traj, size_t index, double* h);

typedef struct lsg_step_diagnostics {
  double time;
  double mass;
  double phi;
  double dhdt_l1;
  double dhdt_l2;
  double dhdt_linf;
  double gap;
  double div_residual;
  double sign_defect;
  int iterations;
  int converged;
} lsg_step_diagnostics;

LSG_API lsg_status lsg_trajectory_diagnostics(const lsg_trajectory* traj, size_t index,
                                              lsg_step_diagnostics* out);

typedef struct lsg_evolution_report {
  int decay_checks_apply;
  double phi_scale;
  double mass_drift;
  double phi_increase;
  double decay_ratio;
  double ab_ratio;
  double ab_pointwise_ratio;
  double energy_excess;
  double energy_scale;
  double spread_initial;
  double spread_final;
  double stabilization_time;  /* negative when not reached */
} lsg_evolution_report;

LSG_API lsg_status lsg_trajectory_report(const lsg_trajectory* traj, lsg_evolution_report* out);

/* Diagnostic CSVs and report.json in dir; states != 0 also writes one CSV
 * per state. */
LSG_API lsg_status lsg_trajectory_save(const lsg_trajectory* traj, const char* dir, int states);

typedef struct lsg_comparison {
  /* [q][mode], q in {1, 2, inf}, mode 0 = positive part, 1 = full */
  double max_excess[3][2];
  int ordered;
  double order_violation;
} lsg_comparison;

/* Both trajectories must share grid, tau and step count. */
LSG_API lsg_status lsg_trajectory_compare(const lsg_trajectory* a, const lsg_trajectory* b,
                                          lsg_comparison* out);

/* ---- p-Laplace approximation ------------------------------------------- */

typedef struct lsg_plap_options {
  double p;
  double epsilon;
  double newton_tol;
  int max_newton;
  double eps_start;
  double eps_factor;
} lsg_plap_options;

LSG_API void lsg_plap_options_default(lsg_plap_options* opts);

typedef struct lsg_plap_info {
  double energy;
  double residual;
  int newton_iterations;
  int converged;
} lsg_plap_info;

LSG_API lsg_status lsg_plap_solve(const lsg_grid* grid, const double* g, double alpha,
                                  const lsg_plap_options* opts, double* u,
                                  lsg_plap_info* info);

typedef struct lsg_continuation_entry {
  double p;
  double distance;
  double flux_deviation;
  double energy;
  double residual;
  int newton_iterations;
  int converged;
} lsg_continuation_entry;

/* One entry per p in the schedule; u_limit (cells) optional. */
LSG_API lsg_status lsg_plap_continuation(const lsg_grid* grid, const double* g, double alpha,
                                         const double* schedule, size_t count,
                                         const lsg_plap_options* opts,
                                         const lsg_solver_options* tv_opts,
                                         lsg_continuation_entry* entries, double* u_limit);

/* ---- exact reference solvers ------------------------------------------- */

/* Exact minimum of the anisotropic relaxed functional by min-cuts.
 * LSG_SIZE_LIMIT beyond the desk-scale caps. u (cells) optional. */
LSG_API lsg_status lsg_oracle_min_phi(const lsg_grid* grid, const double* h, double* value,
                                      double* u, int* nested);
LSG_API lsg_status lsg_oracle_exhaustive(const lsg_grid* grid, const double* h, double* value);

/* ---- experiments ------------------------------------------------------- */

LSG_API size_t lsg_recipe_count(void);
LSG_API const char* lsg_recipe_name(size_t index);

typedef struct lsg_experiment_info {
  int converged;
  uint64_t digest;  /* hash of the written directory */
} lsg_experiment_info;

/* config: JSON object or key-value text. overrides: optional JSON object of
 * dotted keys applied on top. */
LSG_API lsg_status lsg_experiment_run(const char* config, const char* overrides,
                                      const char* out_dir, lsg_experiment_info* info);
LSG_API lsg_status lsg_directory_digest(const char* dir, uint64_t* digest);

#ifdef __cplusplus
}
#endif

#endif
