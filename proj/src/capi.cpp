#include "lsgrad/lsgrad.h"

#include <cstring>
#include <filesystem>
#include <new>
#include <string>
#include <utility>

#include "dtn.hpp"
#include "evolution.hpp"
#include "io.hpp"
#include "lab.hpp"
#include "oracle.hpp"
#include "plap.hpp"
#include "resolvent.hpp"
#include "tvmin.hpp"

struct lsg_grid {
  lsgrad::Grid grid;
};

struct lsg_trajectory {
  lsgrad::Grid grid;
  lsgrad::BoundaryData h0;
  lsgrad::Trajectory traj;
};

namespace {

using namespace lsgrad;

thread_local std::string g_last_error;

lsg_status fail(lsg_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
lsg_status guarded(F&& body) {
  try {
    return body();
  } catch (const SizeLimitError& e) {
    return fail(LSG_SIZE_LIMIT, e.what());
  } catch (const io::IoError& e) {
    return fail(LSG_IO_ERROR, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(LSG_IO_ERROR, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(LSG_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(LSG_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LSG_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LSG_INTERNAL, e.what());
  } catch (...) {
    return fail(LSG_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

const Grid& grid_of(const lsg_grid* g) {
  require(g != nullptr, "grid handle is NULL");
  return g->grid;
}

std::vector<double> copy_in(const double* p, std::size_t n, const char* name) {
  if (n > 0 && p == nullptr) throw std::invalid_argument(std::string(name) + " is NULL");
  return n == 0 ? std::vector<double>{} : std::vector<double>(p, p + n);
}

BoundaryData boundary_in(const Grid& g, const double* p, const char* name) {
  return BoundaryData{copy_in(p, g.num_boundary(), name)};
}

void copy_out(const std::vector<double>& v, double* out) {
  if (out != nullptr && !v.empty()) std::memcpy(out, v.data(), v.size() * sizeof(double));
}

SolverOptions options_in(const lsg_solver_options* o) {
  SolverOptions s;
  if (o != nullptr) {
    s.max_iters = o->max_iters;
    s.tolerance = o->tolerance;
    s.div_tolerance = o->div_tolerance;
    s.abs_tolerance = o->abs_tolerance;
    s.seed = o->seed;
    s.check_every = o->check_every;
    s.adaptive_steps = o->adaptive_steps != 0;
  }
  validate(s);
  return s;
}

PlapOptions plap_in(const lsg_plap_options* o) {
  PlapOptions p;
  if (o != nullptr) {
    p.p = o->p;
    p.epsilon = o->epsilon;
    p.newton_tol = o->newton_tol;
    p.max_newton = o->max_newton;
    p.eps_start = o->eps_start;
    p.eps_factor = o->eps_factor;
  }
  p.validate();
  return p;
}

NemytskiiSpec nonlinearity_in(const lsg_nonlinearity* f) {
  if (f == nullptr) return NemytskiiSpec::zero();
  switch (f->kind) {
    case LSG_F_ZERO:
      return NemytskiiSpec::zero();
    case LSG_F_LINEAR:
      return NemytskiiSpec::linear(f->omega);
    case LSG_F_TABLE: {
      require(f->num_knots == 0 || (f->knot_x != nullptr && f->knot_y != nullptr),
              "nonlinearity knots are NULL");
      std::vector<std::pair<double, double>> knots;
      for (std::size_t i = 0; i < f->num_knots; ++i) knots.emplace_back(f->knot_x[i], f->knot_y[i]);
      return NemytskiiSpec::table(std::move(knots), f->omega);
    }
  }
  throw std::invalid_argument("unknown nonlinearity kind");
}

lsg_certificate certificate_out(const CertificateReport& c) {
  return {c.z_sup, c.g_sup, c.div_residual, c.div_max, c.pairing_defect,
          c.sign_defect, c.sign_defect_max, c.flux};
}

void solve_info_out(const TvSolution& sol, const BoundaryData& h, const Grid& grid,
                    lsg_solve_info* info) {
  if (info == nullptr) return;
  info->primal_energy = sol.primal_energy;
  info->dual_energy = sol.dual_energy;
  info->gap = sol.gap;
  info->phi = inner_boundary(grid, sol.s, h);
  info->div_residual = sol.div_residual;
  info->div_max = sol.div_max;
  info->iterations = sol.iterations;
  info->converged = sol.converged ? 1 : 0;
  info->certificate = certificate_out(certify(grid, h, sol));
}

lsg_status converged_status(bool converged) {
  if (converged) return LSG_OK;
  return fail(LSG_NOT_CONVERGED, "solver stopped at the iteration limit");
}

const lsg_trajectory& traj_of(const lsg_trajectory* t) {
  require(t != nullptr, "trajectory handle is NULL");
  return *t;
}

}  // namespace

extern "C" {

const char* lsg_version(void) { return "1.0.0"; }

const char* lsg_last_error(void) { return g_last_error.c_str(); }

const char* lsg_status_name(lsg_status status) {
  switch (status) {
    case LSG_OK: return "ok";
    case LSG_INVALID_ARGUMENT: return "invalid argument";
    case LSG_NOT_CONVERGED: return "not converged";
    case LSG_IO_ERROR: return "i/o error";
    case LSG_SIZE_LIMIT: return "size limit exceeded";
    case LSG_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void lsg_solver_options_default(lsg_solver_options* opts) {
  if (opts == nullptr) return;
  const SolverOptions s;
  *opts = {s.max_iters, s.tolerance, s.div_tolerance, s.abs_tolerance,
           s.seed, s.check_every, s.adaptive_steps ? 1 : 0};
}

lsg_status lsg_grid_square(int n, double side, lsg_grid** out) {
  return guarded([&] {
    require(out != nullptr, "output handle pointer is NULL");
    *out = new lsg_grid{build_square_grid(n, side)};
    return LSG_OK;
  });
}

lsg_status lsg_grid_disk(int n, double radius, lsg_grid** out) {
  return guarded([&] {
    require(out != nullptr, "output handle pointer is NULL");
    *out = new lsg_grid{build_disk_grid(n, radius)};
    return LSG_OK;
  });
}

lsg_status lsg_grid_resolve(const char* spec, lsg_grid** out) {
  return guarded([&] {
    require(out != nullptr && spec != nullptr, "NULL argument");
    *out = new lsg_grid{io::resolve_grid(spec)};
    return LSG_OK;
  });
}

lsg_status lsg_grid_save(const lsg_grid* grid, const char* path) {
  return guarded([&] {
    require(path != nullptr, "path is NULL");
    io::save_grid(path, grid_of(grid));
    return LSG_OK;
  });
}

void lsg_grid_free(lsg_grid* grid) { delete grid; }

size_t lsg_grid_num_cells(const lsg_grid* grid) { return grid ? grid->grid.num_cells() : 0; }
size_t lsg_grid_num_faces(const lsg_grid* grid) { return grid ? grid->grid.num_faces() : 0; }
size_t lsg_grid_num_boundary(const lsg_grid* grid) {
  return grid ? grid->grid.num_boundary() : 0;
}
double lsg_grid_area(const lsg_grid* grid) { return grid ? grid->grid.area() : 0.0; }
double lsg_grid_perimeter(const lsg_grid* grid) { return grid ? grid->grid.perimeter() : 0.0; }

lsg_status lsg_grid_cell_centers(const lsg_grid* grid, double* xy) {
  return guarded([&] {
    const Grid& g = grid_of(grid);
    require(xy != nullptr, "output is NULL");
    for (const Cell& c : g.cells()) {
      *xy++ = c.center.x;
      *xy++ = c.center.y;
    }
    return LSG_OK;
  });
}

lsg_status lsg_grid_boundary_midpoints(const lsg_grid* grid, double* xy) {
  return guarded([&] {
    const Grid& g = grid_of(grid);
    require(xy != nullptr, "output is NULL");
    for (const BoundaryFace& b : g.boundary()) {
      *xy++ = b.midpoint.x;
      *xy++ = b.midpoint.y;
    }
    return LSG_OK;
  });
}

lsg_status lsg_grid_boundary_lengths(const lsg_grid* grid, double* lengths) {
  return guarded([&] {
    const Grid& g = grid_of(grid);
    require(lengths != nullptr, "output is NULL");
    for (const BoundaryFace& b : g.boundary()) *lengths++ = b.length;
    return LSG_OK;
  });
}

lsg_status lsg_field_read(const char* path, double** values, size_t* count) {
  return guarded([&] {
    require(path != nullptr && values != nullptr && count != nullptr, "NULL argument");
    const std::vector<double> v = io::read_field(path);
    *values = static_cast<double*>(::operator new(std::max<std::size_t>(v.size(), 1) * sizeof(double)));
    std::memcpy(*values, v.data(), v.size() * sizeof(double));
    *count = v.size();
    return LSG_OK;
  });
}

lsg_status lsg_field_write(const char* path, const double* values, size_t count) {
  return guarded([&] {
    require(path != nullptr, "path is NULL");
    io::write_field(path, copy_in(values, count, "values"));
    return LSG_OK;
  });
}

void lsg_buffer_free(double* values) { ::operator delete(values); }

lsg_status lsg_boundary_preset(const lsg_grid* grid, const char* spec, double* out) {
  return guarded([&] {
    require(spec != nullptr && out != nullptr, "NULL argument");
    copy_out(lab::boundary_preset(grid_of(grid), spec).values, out);
    return LSG_OK;
  });
}

lsg_status lsg_solve_dirichlet(const lsg_grid* grid, const double* h,
                               const lsg_solver_options* opts, int anisotropic, double* u,
                               double* z_interior, double* g, lsg_solve_info* info) {
  return guarded([&] {
    const Grid& gr = grid_of(grid);
    const BoundaryData hb = boundary_in(gr, h, "h");
    const SolverOptions so = options_in(opts);
    const TvSolution sol = anisotropic ? solve_relaxed_dirichlet_anisotropic(gr, hb, so)
                                       : solve_relaxed_dirichlet(gr, hb, so);
    copy_out(sol.u.values, u);
    copy_out(sol.z.interior, z_interior);
    copy_out(sol.s.values, g);
    solve_info_out(sol, hb, gr, info);
    return converged_status(sol.converged);
  });
}

lsg_status lsg_solve_dirichlet_save(const lsg_grid* grid, const double* h,
                                    const lsg_solver_options* opts, const char* dir,
                                    lsg_solve_info* info) {
  return guarded([&] {
    require(dir != nullptr, "directory is NULL");
    const Grid& gr = grid_of(grid);
    const BoundaryData hb = boundary_in(gr, h, "h");
    const SolverOptions so = options_in(opts);
    const DtNRecord rec = evaluate(gr, hb, so);
    io::write_csv(std::filesystem::path(dir) / "h.csv", hb.values);
    lab::save_solution(dir, rec.solution, rec.certificate,
                       {{"phi", rec.phi}, {"phi_primal", rec.phi_primal},
                        {"phi_dual", rec.phi_dual}, {"flux", rec.flux},
                        {"options", lab::to_json(so)}});
    solve_info_out(rec.solution, hb, gr, info);
    return converged_status(rec.converged);
  });
}

lsg_status lsg_energy(const lsg_grid* grid, const double* h, const double* u, int anisotropic,
                      double* out) {
  return guarded([&] {
    const Grid& gr = grid_of(grid);
    require(out != nullptr, "output is NULL");
    const BoundaryData hb = boundary_in(gr, h, "h");
    const BulkField ub{copy_in(u, gr.num_cells(), "u")};
    *out = anisotropic ? energy_phi_h_anisotropic(gr, hb, ub) : energy_phi_h(gr, hb, ub);
    return LSG_OK;
  });
}

lsg_status lsg_dual_bound(const lsg_grid* grid, const double* h, const double* z_interior,
                          const double* z_boundary, double* out) {
  return guarded([&] {
    const Grid& gr = grid_of(grid);
    require(out != nullptr, "output is NULL");
    const DualField z{copy_in(z_interior, gr.num_faces(), "z_interior"),
                      copy_in(z_boundary, gr.num_boundary(), "z_boundary")};
    *out = dual_bound(gr, boundary_in(gr, h, "h"), z);
    return LSG_OK;
  });
}

lsg_status lsg_certify(const lsg_grid* grid, const double* h, const double* u,
                       const double* z_interior, const double* z_boundary,
                       lsg_certificate* out) {
  return guarded([&] {
    const Grid& gr = grid_of(grid);
    require(out != nullptr, "output is NULL");
    const DualField z{copy_in(z_interior, gr.num_faces(), "z_interior"),
                      copy_in(z_boundary, gr.num_boundary(), "z_boundary")};
    const BulkField ub{copy_in(u, gr.num_cells(), "u")};
    *out = certificate_out(certify(gr, boundary_in(gr, h, "h"), ub, z));
    return LSG_OK;
  });
}

lsg_status lsg_homogeneity(const lsg_grid* grid, const double* h, const double* lambdas,
                           size_t count, const lsg_solver_options* opts,
                           lsg_homogeneity_entry* entries, double* phi_base) {
  return guarded([&] {
    const Grid& gr = grid_of(grid);
    require(count == 0 || entries != nullptr, "entries is NULL");
    const HomogeneityReport rep = homogeneity_report(
        gr, boundary_in(gr, h, "h"), copy_in(lambdas, count, "lambdas"), options_in(opts));
    bool ok = rep.base.converged;
    for (std::size_t i = 0; i < rep.entries.size(); ++i) {
      const HomogeneityEntry& e = rep.entries[i];
      entries[i] = {e.lambda, e.phi, e.deviation, e.relative_deviation, e.gap,
                    e.cross_gap, e.cross_bound, e.selection_change, e.converged ? 1 : 0};
      ok = ok && e.converged;
    }
    if (phi_base != nullptr) *phi_base = rep.base.phi;
    return converged_status(ok);
  });
}

lsg_status lsg_resolvent(const lsg_grid* grid, const double* g, double lambda,
                         const lsg_solver_options* opts, double* h, double* g_sel, double* u,
                         lsg_resolvent_info* info) {
  return guarded([&] {
    const Grid& gr = grid_of(grid);
    require(h != nullptr && g_sel != nullptr, "output is NULL");
    const ResolventResult r = resolvent_apply(gr, boundary_in(gr, g, "g"), lambda, options_in(opts));
    copy_out(r.h.values, h);
    copy_out(r.g_sel.values, g_sel);
    copy_out(r.u.values, u);
    if (info != nullptr) {
      *info = {r.phi, r.gap, r.div_residual, r.sign_defect, r.iterations, r.converged ? 1 : 0};
    }
    return converged_status(r.converged);
  });
}

lsg_status lsg_robin(const lsg_grid* grid, const double* g, double alpha,
                     const lsg_solver_options* opts, double* u, double* flux,
                     lsg_robin_info* info) {
  return guarded([&] {
    const Grid& gr = grid_of(grid);
    const RobinSolution r = solve_robin(gr, boundary_in(gr, g, "g"), alpha, options_in(opts));
    copy_out(r.u.values, u);
    copy_out(r.conormal_g.values, flux);
    if (info != nullptr) {
      *info = {r.primal_energy, r.dual_energy, r.gap, r.div_residual, r.bc_defect,
               r.iterations, r.converged ? 1 : 0};
    }
    return converged_status(r.converged);
  });
}

lsg_status lsg_evolve(const lsg_grid* grid, const double* h0, double t_end, double tau,
                      const double* source, const lsg_nonlinearity* f,
                      const lsg_solver_options* opts, lsg_trajectory** out) {
  return guarded([&] {
    const Grid& gr = grid_of(grid);
    require(out != nullptr, "output handle pointer is NULL");
    const BoundaryData hb = boundary_in(gr, h0, "h0");
    SourceSeries src;
    if (source != nullptr) src.push_back(boundary_in(gr, source, "source"));
    Trajectory traj = evolve(gr, hb, t_end, tau, src, nonlinearity_in(f), options_in(opts));
    const bool ok = traj.converged;
    *out = new lsg_trajectory{gr, hb, std::move(traj)};
    return converged_status(ok);
  });
}

void lsg_trajectory_free(lsg_trajectory* traj) { delete traj; }

size_t lsg_trajectory_num_states(const lsg_trajectory* traj) {
  return traj ? traj->traj.states.size() : 0;
}

lsg_status lsg_trajectory_time(const lsg_trajectory* traj, size_t index, double* t) {
  return guarded([&] {
    require(t != nullptr, "output is NULL");
    *t = traj_of(traj).traj.times.at(index);
    return LSG_OK;
  });
}

lsg_status lsg_trajectory_state(const lsg_trajectory* traj, size_t index, double* h) {
  return guarded([&] {
    require(h != nullptr, "output is NULL");
    copy_out(traj_of(traj).traj.states.at(index).values, h);
    return LSG_OK;
  });
}

lsg_status lsg_trajectory_diagnostics(const lsg_trajectory* traj, size_t index,
                                      lsg_step_diagnostics* out) {
  return guarded([&] {
    require(out != nullptr, "output is NULL");
    const Trajectory& t = traj_of(traj).traj;
    const StepDiagnostics& d = t.diagnostics.at(index);
    *out = {t.times.at(index), d.mass, d.phi, d.dhdt_norms[0], d.dhdt_norms[1],
            d.dhdt_norms[2], d.gap, d.div_residual, d.sign_defect, d.iterations,
            d.converged ? 1 : 0};
    return LSG_OK;
  });
}

lsg_status lsg_trajectory_report(const lsg_trajectory* traj, lsg_evolution_report* out) {
  return guarded([&] {
    require(out != nullptr, "output is NULL");
    const lsg_trajectory& t = traj_of(traj);
    const DiagnosticsReport d = diagnostics_report(t.traj, t.h0, t.grid);
    *out = {d.decay_checks_apply ? 1 : 0, d.phi_scale, d.mass_drift, d.phi_increase,
            d.decay_ratio, d.ab_ratio, d.ab_pointwise_ratio, d.energy_excess,
            d.energy_scale, d.spread_initial, d.spread_final, d.stabilization_time};
    return LSG_OK;
  });
}

lsg_status lsg_trajectory_save(const lsg_trajectory* traj, const char* dir, int states) {
  return guarded([&] {
    require(dir != nullptr, "directory is NULL");
    const lsg_trajectory& t = traj_of(traj);
    lab::save_trajectory(dir, t.grid, t.traj, t.h0, states != 0);
    return LSG_OK;
  });
}

lsg_status lsg_trajectory_compare(const lsg_trajectory* a, const lsg_trajectory* b,
                                  lsg_comparison* out) {
  return guarded([&] {
    require(out != nullptr, "output is NULL");
    const lsg_trajectory& ta = traj_of(a);
    const lsg_trajectory& tb = traj_of(b);
    require(ta.grid.num_boundary() == tb.grid.num_boundary(), "trajectories use different grids");
    const ComparisonReport r = compare_trajectories(ta.grid, ta.traj, tb.traj);
    for (int q = 0; q < 3; ++q) {
      for (int m = 0; m < 2; ++m) out->max_excess[q][m] = r.max_excess[q][m];
    }
    out->ordered = r.ordered ? 1 : 0;
    out->order_violation = r.order_violation;
    return LSG_OK;
  });
}

void lsg_plap_options_default(lsg_plap_options* opts) {
  if (opts == nullptr) return;
  const PlapOptions p;
  *opts = {p.p, p.epsilon, p.newton_tol, p.max_newton, p.eps_start, p.eps_factor};
}

lsg_status lsg_plap_solve(const lsg_grid* grid, const double* g, double alpha,
                          const lsg_plap_options* opts, double* u, lsg_plap_info* info) {
  return guarded([&] {
    const Grid& gr = grid_of(grid);
    const PlapResult r = solve_robin_p(gr, boundary_in(gr, g, "g"), alpha, plap_in(opts));
    copy_out(r.u.values, u);
    if (info != nullptr) *info = {r.energy, r.residual, r.newton_iterations, r.converged ? 1 : 0};
    return converged_status(r.converged);
  });
}

lsg_status lsg_plap_continuation(const lsg_grid* grid, const double* g, double alpha,
                                 const double* schedule, size_t count,
                                 const lsg_plap_options* opts, const lsg_solver_options* tv_opts,
                                 lsg_continuation_entry* entries, double* u_limit) {
  return guarded([&] {
    const Grid& gr = grid_of(grid);
    require(count == 0 || entries != nullptr, "entries is NULL");
    const ContinuationReport rep =
        continuation(gr, boundary_in(gr, g, "g"), alpha, copy_in(schedule, count, "schedule"),
                     plap_in(opts), options_in(tv_opts));
    bool ok = rep.limit.converged;
    for (std::size_t i = 0; i < rep.entries.size(); ++i) {
      const ContinuationEntry& e = rep.entries[i];
      entries[i] = {e.p, e.distance, e.flux_deviation, e.energy, e.residual,
                    e.newton_iterations, e.converged ? 1 : 0};
      ok = ok && e.converged;
    }
    copy_out(rep.limit.u.values, u_limit);
    return converged_status(ok);
  });
}

lsg_status lsg_oracle_min_phi(const lsg_grid* grid, const double* h, double* value, double* u,
                              int* nested) {
  return guarded([&] {
    const Grid& gr = grid_of(grid);
    require(value != nullptr, "output is NULL");
    const OracleResult r = coarea_mincut_min_phi(gr, boundary_in(gr, h, "h"));
    *value = r.value;
    copy_out(r.u.values, u);
    if (nested != nullptr) *nested = r.nested ? 1 : 0;
    return LSG_OK;
  });
}

lsg_status lsg_oracle_exhaustive(const lsg_grid* grid, const double* h, double* value) {
  return guarded([&] {
    const Grid& gr = grid_of(grid);
    require(value != nullptr, "output is NULL");
    *value = exhaustive_min_phi(gr, boundary_in(gr, h, "h"));
    return LSG_OK;
  });
}

size_t lsg_recipe_count(void) { return lab::recipe_names().size(); }

const char* lsg_recipe_name(size_t index) {
  const auto& names = lab::recipe_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

lsg_status lsg_experiment_run(const char* config, const char* overrides, const char* out_dir,
                              lsg_experiment_info* info) {
  return guarded([&] {
    require(config != nullptr && out_dir != nullptr, "NULL argument");
    lab::Config cfg = lab::Config::from_text(config);
    if (overrides != nullptr && *overrides != '\0') {
      nlohmann::json extra;
      try {
        extra = nlohmann::json::parse(overrides);
      } catch (const nlohmann::json::parse_error& e) {
        throw lab::ConfigError(std::string("malformed overrides: ") + e.what());
      }
      require(extra.is_object(), "overrides must be a JSON object");
      for (const auto& [k, v] : extra.items()) cfg.set(k, v);
    }
    const lab::ExperimentResult res = lab::run_experiment(cfg, out_dir);
    if (info != nullptr) {
      info->converged = res.converged ? 1 : 0;
      info->digest = lab::directory_digest(out_dir);
    }
    return converged_status(res.converged);
  });
}

lsg_status lsg_directory_digest(const char* dir, uint64_t* digest) {
  return guarded([&] {
    require(dir != nullptr && digest != nullptr, "NULL argument");
    require(std::filesystem::is_directory(dir), "not a directory");
    *digest = lab::directory_digest(dir);
    return LSG_OK;
  });
}

}  // extern "C"
