#include "dtn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lsgrad {

DtNRecord evaluate(const Grid& grid, const BoundaryData& h, const SolverOptions& opts) {
  DtNRecord rec;
  rec.h = h;
  rec.solution = solve_relaxed_dirichlet(grid, h, opts);
  rec.g = BoundaryData{rec.solution.z.boundary};
  rec.phi = inner_boundary(grid, rec.g, h);
  rec.phi_primal = rec.solution.primal_energy;
  rec.phi_dual = rec.solution.dual_energy;
  rec.flux = boundary_integral(grid, rec.g);
  rec.certificate = certify(grid, h, rec.solution);
  rec.converged = rec.solution.converged;
  return rec;
}

double phi_via_min(const Grid& grid, const BoundaryData& h, const SolverOptions& opts) {
  return solve_relaxed_dirichlet(grid, h, opts).primal_energy;
}

HomogeneityReport homogeneity_report(const Grid& grid, const BoundaryData& h,
                                     const std::vector<double>& lambdas,
                                     const SolverOptions& opts) {
  HomogeneityReport rep;
  rep.base = evaluate(grid, h, opts);
  const double base_phi = rep.base.phi_primal;
  for (double lambda : lambdas) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw std::invalid_argument("homogeneity factors must be nonnegative");
    }
    BoundaryData scaled = h;
    for (double& v : scaled.values) v *= lambda;
    const TvSolution sol = solve_relaxed_dirichlet(grid, scaled, opts);

    HomogeneityEntry e;
    e.lambda = lambda;
    e.phi = sol.primal_energy;
    e.gap = sol.gap;
    e.deviation = std::abs(e.phi - lambda * base_phi);
    const double scale = std::max(lambda * base_phi, 1e-300);
    e.relative_deviation = e.deviation == 0.0 ? 0.0 : e.deviation / scale;
    e.converged = sol.converged;
    for (std::size_t k = 0; k < grid.num_boundary(); ++k) {
      e.selection_change = std::max(
          e.selection_change, std::abs(sol.z.boundary[k] - rep.base.g.values[k]));
    }
    if (lambda > 0.0) {
      e.cross = certify(grid, h, rep.base.solution.u, sol.z);
      e.cross_gap = base_phi - dual_bound(grid, h, sol.z);
      e.cross_bound = std::max(rep.base.solution.gap, 0.0) + std::max(sol.gap, 0.0) / lambda;
    }
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

StabilityReport stability_probe(const Grid& grid, const BoundaryData& h,
                                const std::vector<BoundaryData>& perturbations,
                                const std::vector<BoundaryData>& tests,
                                const SolverOptions& opts) {
  for (const auto& xi : tests) check_shape(grid, xi);
  StabilityReport rep;
  rep.base = evaluate(grid, h, opts);
  for (const auto& hn : perturbations) {
    check_shape(grid, hn);
    const DtNRecord rn = evaluate(grid, hn, opts);
    StabilityEntry e;
    BoundaryData diff = hn;
    for (std::size_t k = 0; k < diff.values.size(); ++k) diff.values[k] -= h.values[k];
    e.distance = boundary_norm(grid, diff, 1.0);
    e.phi = rn.phi_primal;
    e.phi_deviation = std::abs(rn.phi_primal - rep.base.phi_primal);
    e.gap = rn.solution.gap;
    e.converged = rn.converged;
    BoundaryData dg = rn.g;
    for (std::size_t k = 0; k < dg.values.size(); ++k) dg.values[k] -= rep.base.g.values[k];
    for (const auto& xi : tests) {
      e.pairing_deviation.push_back(std::abs(inner_boundary(grid, dg, xi)));
    }
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

double smooth_truncation(double k, double r) {
  const double s = std::clamp(k * r, -1.0, 1.0);
  return 0.5 * (3.0 * s - s * s * s);
}

std::vector<double> monotonicity_pairing(const Grid& grid, const DtNRecord& a,
                                         const DtNRecord& b, const std::vector<double>& ks) {
  check_shape(grid, a.h);
  check_shape(grid, b.h);
  const auto& bdry = grid.boundary();
  std::vector<double> out;
  for (double k : ks) {
    double acc = 0.0;
    for (std::size_t j = 0; j < bdry.size(); ++j) {
      acc += bdry[j].length * (a.g.values[j] - b.g.values[j]) *
             smooth_truncation(k, a.h.values[j] - b.h.values[j]);
    }
    out.push_back(acc);
  }
  return out;
}

double entropy_ratio(const Grid& grid, const DtNRecord& rec) {
  const double mean = boundary_mean(grid, rec.h);
  BoundaryData c = rec.h;
  for (double& v : c.values) v -= mean;
  const double spread = boundary_norm(grid, c, 1.0);
  if (rec.phi_primal <= 0.0 || spread == 0.0) return 0.0;
  return spread / rec.phi_primal;
}

}  // namespace lsgrad
