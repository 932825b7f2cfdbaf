#pragma once

// Relaxed Dirichlet problem for the least gradient problem:
//   min_v  tv(v) + sum_b s_b |h_b - (T v)_b|
// solved by the primal-dual engine, returning the minimizer together with
// the dual certificate z (|z| <= 1, div z = 0, [z, nu] in sign(h - Tu)).

#include <string>

#include "grid.hpp"
#include "pdhg.hpp"

namespace lsgrad {

struct TvSolution {
  BulkField u;
  DualField z;     // z.boundary is the boundary dual s = [z, nu]
  BoundaryData s;
  double primal_energy = 0.0;
  double dual_energy = 0.0;
  double gap = 0.0;
  int iterations = 0;
  double div_residual = 0.0;  // integral of |div z|
  double div_max = 0.0;       // max over cells of |div z|
  bool converged = false;
  std::vector<IterateRecord> history;
};

struct CertificateReport {
  double z_sup = 0.0;           // max |z| over groups and boundary faces
  double g_sup = 0.0;           // max |[z, nu]|
  double div_residual = 0.0;    // integral of |div z|
  double div_max = 0.0;
  double pairing_defect = 0.0;  // tv(u) - <grad u, z>, >= 0 when |z| <= 1
  double sign_defect = 0.0;     // sum_b s_b (|h - Tu| - g (h - Tu))
  double sign_defect_max = 0.0; // max_b (|h - Tu| - g (h - Tu))^+
  double flux = 0.0;            // <g, 1> on the boundary

  // Aggregate defect; bounded by the duality gap of (u, z).
  double total() const { return pairing_defect + sign_defect + div_residual; }
  bool valid(double tol) const;
};

double energy_phi_h(const Grid& grid, const BoundaryData& h, const BulkField& u);
double energy_phi_h_anisotropic(const Grid& grid, const BoundaryData& h,
                                const BulkField& u);

TvSolution solve_relaxed_dirichlet(const Grid& grid, const BoundaryData& h,
                                   const SolverOptions& opts = {});

// Same problem with the l1 edge norm; kept for exact comparisons against the
// min-cut reference solver.
TvSolution solve_relaxed_dirichlet_anisotropic(const Grid& grid,
                                               const BoundaryData& h,
                                               const SolverOptions& opts = {});

// Rigorous lower bound on min Phi_h from any z with |z| <= 1.
double dual_bound(const Grid& grid, const BoundaryData& h, const DualField& z);

CertificateReport certify(const Grid& grid, const BoundaryData& h,
                          const BulkField& u, const DualField& z);
CertificateReport certify(const Grid& grid, const BoundaryData& h,
                          const TvSolution& sol);

}  // namespace lsgrad
