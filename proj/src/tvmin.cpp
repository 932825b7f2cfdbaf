#include "tvmin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lsgrad {

namespace {

void check_finite(const BoundaryData& h) {
  for (double v : h.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("boundary data contains NaN or inf");
  }
}

TvSolution solve(const Grid& grid, const BoundaryData& h,
                 const SolverOptions& opts, TvNorm norm) {
  check_shape(grid, h);
  check_finite(h);
  SaddleProblem prob{&grid, h.values, 0.0, 0.0, norm};
  PdhgResult res = run_pdhg(prob, opts);

  TvSolution sol;
  sol.u = BulkField{std::move(res.u)};
  sol.z = DualField{std::move(res.q), res.r};
  sol.s = BoundaryData{std::move(res.r)};
  sol.primal_energy = norm == TvNorm::kIsotropic
                          ? energy_phi_h(grid, h, sol.u)
                          : energy_phi_h_anisotropic(grid, h, sol.u);
  sol.dual_energy = res.dual;
  sol.gap = sol.primal_energy - sol.dual_energy;
  sol.iterations = res.iterations;
  sol.div_residual = res.div_residual;
  sol.div_max = res.div_max;
  sol.converged = res.converged;
  sol.history = std::move(res.history);
  return sol;
}

double boundary_l1_misfit(const Grid& grid, const BoundaryData& h,
                          const BulkField& u) {
  double e = 0.0;
  const auto& bdry = grid.boundary();
  for (std::size_t k = 0; k < bdry.size(); ++k) {
    e += bdry[k].length * std::abs(h.values[k] - u.values[bdry[k].cell]);
  }
  return e;
}

}  // namespace

double dual_bound(const Grid& grid, const BoundaryData& h, const DualField& z) {
  check_shape(grid, h);
  check_shape(grid, z);
  SaddleProblem prob{&grid, h.values, 0.0, 0.0, TvNorm::kIsotropic};
  return saddle_dual(prob, z.interior, z.boundary);
}

bool CertificateReport::valid(double tol) const {
  return z_sup <= 1.0 + 1e-12 && g_sup <= 1.0 + 1e-12 && total() <= tol;
}

double energy_phi_h(const Grid& grid, const BoundaryData& h, const BulkField& u) {
  check_shape(grid, h);
  return tv(grid, u) + boundary_l1_misfit(grid, h, u);
}

double energy_phi_h_anisotropic(const Grid& grid, const BoundaryData& h,
                                const BulkField& u) {
  check_shape(grid, h);
  return tv_anisotropic(grid, u) + boundary_l1_misfit(grid, h, u);
}

TvSolution solve_relaxed_dirichlet(const Grid& grid, const BoundaryData& h,
                                   const SolverOptions& opts) {
  return solve(grid, h, opts, TvNorm::kIsotropic);
}

TvSolution solve_relaxed_dirichlet_anisotropic(const Grid& grid,
                                               const BoundaryData& h,
                                               const SolverOptions& opts) {
  return solve(grid, h, opts, TvNorm::kAnisotropic);
}

CertificateReport certify(const Grid& grid, const BoundaryData& h,
                          const BulkField& u, const DualField& z) {
  check_shape(grid, h);
  check_shape(grid, u);
  check_shape(grid, z);
  CertificateReport rep;
  rep.z_sup = dual_sup_norm(grid, z);
  rep.g_sup = sup_norm(z.boundary);

  const BulkField div = divergence(grid, z);
  for (std::size_t i = 0; i < grid.num_cells(); ++i) {
    const double a = std::abs(div.values[i]);
    rep.div_residual += grid.cells()[i].area * a;
    rep.div_max = std::max(rep.div_max, a);
  }

  rep.pairing_defect = tv(grid, u) - inner_faces(grid, gradient(grid, u), z);

  const auto& bdry = grid.boundary();
  for (std::size_t k = 0; k < bdry.size(); ++k) {
    const double w = h.values[k] - u.values[bdry[k].cell];
    const double defect = std::abs(w) - z.boundary[k] * w;
    rep.sign_defect += bdry[k].length * defect;
    rep.sign_defect_max = std::max(rep.sign_defect_max, defect);
    rep.flux += bdry[k].length * z.boundary[k];
  }
  return rep;
}

CertificateReport certify(const Grid& grid, const BoundaryData& h,
                          const TvSolution& sol) {
  return certify(grid, h, sol.u, sol.z);
}

}  // namespace lsgrad
