#pragma once

// Dirichlet-to-Neumann operator of the 1-Laplacian: a certified selection
// g = [z, nu] of Lambda(h) and the energy phi(h) = <g, h> = min Phi_h.

#include <vector>

#include "grid.hpp"
#include "tvmin.hpp"

namespace lsgrad {

struct DtNRecord {
  BoundaryData h;
  BoundaryData g;     // |g| <= 1
  double phi = 0.0;   // <g, h>
  double phi_primal = 0.0;  // Phi_h(u), an upper bound on phi(h)
  double phi_dual = 0.0;    // rigorous lower bound on phi(h)
  double flux = 0.0;        // <g, 1>, zero up to the divergence residual
  TvSolution solution;
  CertificateReport certificate;
  bool converged = false;
};

DtNRecord evaluate(const Grid& grid, const BoundaryData& h, const SolverOptions& opts = {});

double phi_via_min(const Grid& grid, const BoundaryData& h, const SolverOptions& opts = {});

struct HomogeneityEntry {
  double lambda = 0.0;
  double phi = 0.0;              // phi(lambda h)
  double deviation = 0.0;        // |phi(lambda h) - lambda phi(h)|
  double relative_deviation = 0.0;
  double gap = 0.0;              // duality gap of the scaled solve
  // z(lambda h) reused as a certificate for u(h) and data h.
  CertificateReport cross;
  double cross_gap = 0.0;        // Phi_h(u(h)) - dual_bound(h, z(lambda h))
  double cross_bound = 0.0;      // gap(h) + gap(lambda h) / lambda
  double selection_change = 0.0; // max |g(lambda h) - g(h)|, monitored only
  bool converged = false;
};

struct HomogeneityReport {
  DtNRecord base;
  std::vector<HomogeneityEntry> entries;
};

HomogeneityReport homogeneity_report(const Grid& grid, const BoundaryData& h,
                                     const std::vector<double>& lambdas,
                                     const SolverOptions& opts = {});

struct StabilityEntry {
  double distance = 0.0;       // ||h_n - h||_1
  double phi = 0.0;
  double phi_deviation = 0.0;  // |phi(h_n) - phi(h)| from primal energies
  double gap = 0.0;
  std::vector<double> pairing_deviation;  // |<g_n - g, xi>| per test function
  bool converged = false;
};

struct StabilityReport {
  DtNRecord base;
  std::vector<StabilityEntry> entries;
};

StabilityReport stability_probe(const Grid& grid, const BoundaryData& h,
                                const std::vector<BoundaryData>& perturbations,
                                const std::vector<BoundaryData>& tests,
                                const SolverOptions& opts = {});

// Smooth nondecreasing truncation p_k(r) = psi(clamp(k r, -1, 1)) with
// psi(s) = (3 s - s^3) / 2.
double smooth_truncation(double k, double r);

// <g - g2, p_k(h - h2)> for every k in `ks`; nonnegative for an accretive
// operator.
std::vector<double> monotonicity_pairing(const Grid& grid, const DtNRecord& a,
                                         const DtNRecord& b,
                                         const std::vector<double>& ks = {1.0, 10.0, 100.0});

// ||h - mean(h)||_1 / phi(h); zero when phi vanishes.
double entropy_ratio(const Grid& grid, const DtNRecord& rec);

}  // namespace lsgrad
