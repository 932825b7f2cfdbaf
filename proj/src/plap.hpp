#pragma once

// Regularized p-Laplace Robin problem, p in (1, 2]:
//   min_u  sum_g w_g (|G_g u|^2 + eps^2)^{p/2} / p + sum_b s_b Gamma(g_b, alpha, u_b)
// solved by damped Newton with continuation in eps. As p decreases to 1 its
// minimizers approach a solution of the truncated Robin problem for the
// 1-Laplacian.

#include <vector>

#include "grid.hpp"
#include "resolvent.hpp"

namespace lsgrad {

struct PlapOptions {
  double p = 1.5;
  double epsilon = 1e-6;      // relative to the data scale max(|g|, 1) / alpha
  double newton_tol = 1e-9;   // sum_i |dE/du_i| relative to the perimeter
  int max_newton = 400;       // Newton steps per eps stage
  double eps_start = 1.0;     // first stage of the eps continuation
  double eps_factor = 0.1;    // eps reduction per stage

  void validate() const;
};

struct PlapResult {
  BulkField u;
  double energy = 0.0;
  double residual = 0.0;      // final weak-form residual, relative
  int newton_iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;
  std::vector<double> energy_history;  // per Newton step of the last stage
};

double plap_energy(const Grid& grid, const BoundaryData& g, double alpha, double p,
                   double eps, const BulkField& u);

PlapResult solve_robin_p(const Grid& grid, const BoundaryData& g, double alpha,
                         const PlapOptions& opts, const BulkField* warm = nullptr);

struct ContinuationEntry {
  double p = 0.0;
  double distance = 0.0;        // ||u_p - u_TV||_1 / area
  double flux_deviation = 0.0;  // max_b |T1(g - alpha u_p) - [z, nu]|
  double energy = 0.0;
  double residual = 0.0;
  int newton_iterations = 0;
  bool converged = false;
};

struct ContinuationReport {
  RobinSolution limit;
  std::vector<ContinuationEntry> entries;
};

ContinuationReport continuation(const Grid& grid, const BoundaryData& g, double alpha,
                                const std::vector<double>& p_schedule,
                                const PlapOptions& opts,
                                const SolverOptions& tv_opts = {});

}  // namespace lsgrad
