#pragma once

// Truncated Robin problem for the 1-Laplacian and the resolvent of the
// Dirichlet-to-Neumann operator built on it.
//
// Robin problem:  -div z = 0 in the domain, [z, nu] = T1(g - alpha u) on the
// boundary. It is the Euler-Lagrange system of
//   tv(u) + sum_b s_b Gamma(g_b, alpha, (Tu)_b),
// where Gamma(g, alpha, .) is the convex antiderivative of -T1(g - alpha t)
// vanishing at 0.

#include "grid.hpp"
#include "pdhg.hpp"

namespace lsgrad {

// Clamp to [-1, 1].
double truncator(double s);

// Huber function with unit threshold: s^2/2 on |s| <= 1, |s| - 1/2 outside.
double huber_unit(double s);

// Gamma(t) = (H(g - alpha t) - H(g)) / alpha with H = huber_unit.
double gamma_potential(double g, double alpha, double t);

struct RobinSolution {
  BulkField u;
  DualField z;
  BoundaryData conormal_g;
  double alpha = 1.0;
  double primal_energy = 0.0;
  double dual_energy = 0.0;
  double gap = 0.0;
  double div_residual = 0.0;
  double div_max = 0.0;
  double bc_defect = 0.0;  // max_b |[z,nu]_b - T1(g_b - alpha (Tu)_b)|
  int iterations = 0;
  bool converged = false;
};

double robin_energy(const Grid& grid, const BoundaryData& g, double alpha,
                    const BulkField& u);

RobinSolution solve_robin(const Grid& grid, const BoundaryData& g, double alpha,
                          const SolverOptions& opts = {});

// h = J_lambda g, i.e. h + lambda * Lambda(h) contains g.
struct ResolventResult {
  BoundaryData h;
  BoundaryData g_sel;  // (g - h) / lambda = [z, nu], a selection of Lambda(h)
  BulkField u;         // Dirichlet solution for h certified by z
  DualField z;
  double lambda = 0.0;
  double phi = 0.0;    // <g_sel, h> = phi(h)
  double gap = 0.0;
  double div_residual = 0.0;
  double sign_defect = 0.0;  // sum_b s_b (|h - Tu| - g_sel (h - Tu))
  int iterations = 0;
  bool converged = false;
};

struct ResolventWarmStart {
  const BulkField* u = nullptr;
  const DualField* z = nullptr;
};

ResolventResult resolvent_apply(const Grid& grid, const BoundaryData& g,
                                double lambda, const SolverOptions& opts = {},
                                const ResolventWarmStart& warm = {});

}  // namespace lsgrad
