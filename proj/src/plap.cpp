#include "plap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace lsgrad {

void PlapOptions::validate() const {
  if (!(p > 1.0 && p <= 2.0)) throw std::invalid_argument("p must lie in (1, 2]");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  if (!(newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be positive");
  if (max_newton < 1) throw std::invalid_argument("max_newton must be >= 1");
  if (!(eps_factor > 0.0 && eps_factor < 1.0)) {
    throw std::invalid_argument("eps_factor must lie in (0, 1)");
  }
}

namespace {

struct Problem {
  const Grid& grid;
  const BoundaryData& g;
  double alpha;
  double p;
  double eps;
};

// Gradient components of group gi: up to two (face index, value).
int group_gradient(const Grid& grid, const FaceGroup& grp, const std::vector<double>& u,
                   double v[2]) {
  int m = 0;
  for (int a = 0; a < 2; ++a) {
    v[a] = 0.0;
    if (grp.faces[a] < 0) continue;
    const Face& f = grid.faces()[grp.faces[a]];
    v[a] = (u[f.hi] - u[f.lo]) / f.dist;
    ++m;
  }
  return m;
}

double energy(const Problem& pr, const std::vector<double>& u) {
  double e = 0.0;
  for (const FaceGroup& grp : pr.grid.groups()) {
    double v[2];
    group_gradient(pr.grid, grp, u, v);
    e += grp.weight * std::pow(v[0] * v[0] + v[1] * v[1] + pr.eps * pr.eps, 0.5 * pr.p) / pr.p;
  }
  const auto& bdry = pr.grid.boundary();
  for (std::size_t k = 0; k < bdry.size(); ++k) {
    e += bdry[k].length * gamma_potential(pr.g.values[k], pr.alpha, u[bdry[k].cell]);
  }
  return e;
}

// Gradient of the energy and, when `hess` is set, its (generalized) Hessian.
void derivatives(const Problem& pr, const std::vector<double>& u, Eigen::VectorXd& grad,
                 std::vector<Eigen::Triplet<double>>* hess) {
  const Grid& grid = pr.grid;
  grad.setZero(static_cast<Eigen::Index>(grid.num_cells()));
  if (hess) hess->clear();
  for (const FaceGroup& grp : grid.groups()) {
    double v[2];
    group_gradient(grid, grp, u, v);
    const double s = v[0] * v[0] + v[1] * v[1] + pr.eps * pr.eps;
    const double a = std::pow(s, 0.5 * pr.p - 1.0);
    const double b = (pr.p - 2.0) * std::pow(s, 0.5 * pr.p - 2.0);
    int lo[2], hi[2];
    double inv[2];
    for (int k = 0; k < 2; ++k) {
      if (grp.faces[k] < 0) {
        lo[k] = hi[k] = -1;
        inv[k] = 0.0;
        continue;
      }
      const Face& f = grid.faces()[grp.faces[k]];
      lo[k] = f.lo;
      hi[k] = f.hi;
      inv[k] = 1.0 / f.dist;
    }
    for (int k = 0; k < 2; ++k) {
      if (lo[k] < 0) continue;
      const double flux = grp.weight * a * v[k] * inv[k];
      grad[hi[k]] += flux;
      grad[lo[k]] -= flux;
    }
    if (!hess) continue;
    for (int k = 0; k < 2; ++k) {
      if (lo[k] < 0) continue;
      for (int l = 0; l < 2; ++l) {
        if (lo[l] < 0) continue;
        const double m = grp.weight * ((k == l ? a : 0.0) + b * v[k] * v[l]) * inv[k] * inv[l];
        hess->emplace_back(hi[k], hi[l], m);
        hess->emplace_back(lo[k], lo[l], m);
        hess->emplace_back(hi[k], lo[l], -m);
        hess->emplace_back(lo[k], hi[l], -m);
      }
    }
  }
  const auto& bdry = grid.boundary();
  for (std::size_t k = 0; k < bdry.size(); ++k) {
    const int c = bdry[k].cell;
    const double w = pr.g.values[k] - pr.alpha * u[c];
    grad[c] -= bdry[k].length * truncator(w);
    if (hess && std::abs(w) < 1.0) hess->emplace_back(c, c, bdry[k].length * pr.alpha);
  }
}

double relative_residual(const Grid& grid, const Eigen::VectorXd& grad) {
  return grad.lpNorm<1>() / grid.perimeter();
}

struct StageOutcome {
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

StageOutcome newton_stage(const Problem& pr, std::vector<double>& u, double tol, int max_it,
                          std::vector<double>* res_hist, std::vector<double>* e_hist) {
  const std::size_t n = pr.grid.num_cells();
  Eigen::VectorXd grad;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::SparseMatrix<double> H(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  StageOutcome out;
  double e = energy(pr, u);
  double shift = 1e-12;
  std::vector<double> trial(n);
  for (int it = 0; it < max_it; ++it) {
    derivatives(pr, u, grad, &trip);
    out.residual = relative_residual(pr.grid, grad);
    if (res_hist) res_hist->push_back(out.residual);
    if (e_hist) e_hist->push_back(e);
    if (out.residual <= tol) {
      out.converged = true;
      return out;
    }
    double diag_scale = 0.0;
    for (const auto& t : trip) {
      if (t.row() == t.col()) diag_scale = std::max(diag_scale, t.value());
    }
    bool stepped = false;
    for (int attempt = 0; attempt < 8 && !stepped; ++attempt) {
      std::vector<Eigen::Triplet<double>> shifted = trip;
      for (std::size_t i = 0; i < n; ++i) {
        shifted.emplace_back(static_cast<int>(i), static_cast<int>(i),
                             shift * diag_scale * pr.grid.cells()[i].area / pr.grid.area() *
                                 static_cast<double>(n));
      }
      H.setFromTriplets(shifted.begin(), shifted.end());
      ldlt.compute(H);
      if (ldlt.info() != Eigen::Success) {
        shift *= 100.0;
        continue;
      }
      const Eigen::VectorXd d = ldlt.solve(-grad);
      const double slope = grad.dot(d);
      if (!(slope < 0.0)) {
        shift *= 100.0;
        continue;
      }
      // Armijo backtracking on the convex energy. Close to the minimizer the
      // predicted decrease drops below the rounding of the energy; there a
      // step is accepted when the energy stays within rounding and the
      // residual shrinks.
      const double noise = 1e-13 * (std::abs(e) + 1e-300);
      for (double t = 1.0; t > 1e-10; t *= 0.5) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + t * d[static_cast<Eigen::Index>(i)];
        const double et = energy(pr, trial);
        bool accept = et <= e + 1e-4 * t * slope && -t * slope > noise;
        if (!accept && et <= e + noise) {
          Eigen::VectorXd gt;
          derivatives(pr, trial, gt, nullptr);
          accept = relative_residual(pr.grid, gt) <= (1.0 - 1e-4 * t) * out.residual;
        }
        if (accept) {
          u.swap(trial);
          e = std::min(e, et);
          stepped = true;
          break;
        }
      }
      if (!stepped) shift *= 100.0;
    }
    out.iterations = it + 1;
    if (!stepped) break;
    shift = std::max(1e-12, shift * 0.1);
  }
  derivatives(pr, u, grad, nullptr);
  out.residual = relative_residual(pr.grid, grad);
  out.converged = out.residual <= tol;
  return out;
}

}  // namespace

double plap_energy(const Grid& grid, const BoundaryData& g, double alpha, double p,
                   double eps, const BulkField& u) {
  check_shape(grid, g);
  check_shape(grid, u);
  return energy(Problem{grid, g, alpha, p, eps}, u.values);
}

PlapResult solve_robin_p(const Grid& grid, const BoundaryData& g, double alpha,
                         const PlapOptions& opts, const BulkField* warm) {
  opts.validate();
  check_shape(grid, g);
  for (double v : g.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("boundary data contains NaN or inf");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be positive");

  const double scale = std::max(sup_norm(g.values), 1.0) / alpha;
  const double eps_final = opts.epsilon * scale;
  std::vector<double> u;
  if (warm != nullptr) {
    check_shape(grid, *warm);
    u = warm->values;
  } else {
    u.assign(grid.num_cells(), boundary_mean(grid, g) / alpha);
  }

  PlapResult res;
  double eps = std::max(opts.eps_start * scale, eps_final);
  while (true) {
    const bool last = eps <= eps_final;
    const Problem pr{grid, g, alpha, opts.p, last ? eps_final : eps};
    const double tol = last ? opts.newton_tol : std::max(opts.newton_tol, 1e-6);
    if (last) {
      res.residual_history.clear();
      res.energy_history.clear();
    }
    const StageOutcome st = newton_stage(pr, u, tol, opts.max_newton, &res.residual_history,
                                         last ? &res.energy_history : nullptr);
    res.newton_iterations += st.iterations;
    if (last) {
      res.residual = st.residual;
      res.converged = st.converged;
      res.energy = energy(pr, u);
      break;
    }
    eps = std::max(eps * opts.eps_factor, eps_final);
  }
  res.u = BulkField{std::move(u)};
  return res;
}

ContinuationReport continuation(const Grid& grid, const BoundaryData& g, double alpha,
                                const std::vector<double>& p_schedule,
                                const PlapOptions& opts, const SolverOptions& tv_opts) {
  for (std::size_t i = 0; i < p_schedule.size(); ++i) {
    if (!(p_schedule[i] > 1.0 && p_schedule[i] <= 2.0)) {
      throw std::invalid_argument("schedule entries must lie in (1, 2]");
    }
    if (i > 0 && !(p_schedule[i] < p_schedule[i - 1])) {
      throw std::invalid_argument("schedule must be strictly decreasing");
    }
  }
  ContinuationReport rep;
  rep.limit = solve_robin(grid, g, alpha, tv_opts);
  const auto& bdry = grid.boundary();
  BulkField warm;
  for (std::size_t i = 0; i < p_schedule.size(); ++i) {
    PlapOptions o = opts;
    o.p = p_schedule[i];
    const PlapResult r = solve_robin_p(grid, g, alpha, o, i == 0 ? nullptr : &warm);
    ContinuationEntry e;
    e.p = o.p;
    e.energy = r.energy;
    e.residual = r.residual;
    e.newton_iterations = r.newton_iterations;
    e.converged = r.converged;
    for (std::size_t c = 0; c < grid.num_cells(); ++c) {
      e.distance += grid.cells()[c].area * std::abs(r.u.values[c] - rep.limit.u.values[c]);
    }
    e.distance /= grid.area();
    for (std::size_t k = 0; k < bdry.size(); ++k) {
      const double flux = truncator(g.values[k] - alpha * r.u.values[bdry[k].cell]);
      e.flux_deviation = std::max(e.flux_deviation, std::abs(flux - rep.limit.conormal_g.values[k]));
    }
    rep.entries.push_back(e);
    warm = r.u;
  }
  return rep;
}

}  // namespace lsgrad
