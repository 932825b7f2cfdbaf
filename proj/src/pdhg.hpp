#pragma once

// First-order primal-dual engine shared by the Dirichlet and Robin solvers.
//
// Every problem handled here has the form
//
//   min_u  TV(u) + sum_b s_b * huber_kappa(beta_b - u_b) + constant
//
// where huber_0 = |.| (relaxed Dirichlet problem) and, for kappa > 0,
// huber_kappa(w) = w^2 / (2 kappa) for |w| <= kappa and |w| - kappa / 2
// otherwise. Its saddle-point form is
//
//   min_u max_{|q_g| <= 1, |r_b| <= 1}
//       sum_e len_e q_e (u_hi - u_lo)
//     + sum_b s_b [ r_b (beta_b - u_b) - kappa r_b^2 / 2 ] + constant.
//
// The dual variables are exactly the DualField of the grid: q on interior
// faces, r on boundary faces (r = [z, nu]). The primal variable is kept in a
// box around [min beta, max beta], which always contains a minimizer; the
// box makes the dual function finite everywhere, so every iterate yields a
// rigorous lower bound.

#include <cstdint>
#include <utility>
#include <vector>

#include "grid.hpp"

namespace lsgrad {

enum class TvNorm { kIsotropic, kAnisotropic };

struct SolverOptions {
  int max_iters = 1000000;
  double tolerance = 1e-6;       // relative duality gap
  double div_tolerance = 1e-6;   // integral of |div z|, relative to perimeter
  double abs_tolerance = 0.0;    // absolute floor added to the gap test
  double step_primal = 0.0;      // 0: derived from the operator norm
  double step_dual = 0.0;
  std::uint64_t seed = 0;        // 0: start from the mean of the data
  int check_every = 10;
  bool adaptive_steps = true;    // residual balancing of the step ratio
};

void validate(const SolverOptions& opts);

struct SaddleProblem {
  const Grid* grid = nullptr;
  std::vector<double> beta;  // per boundary face
  double kappa = 0.0;
  double constant = 0.0;
  TvNorm norm = TvNorm::kIsotropic;
};

struct WarmStart {
  const std::vector<double>* u = nullptr;
  const std::vector<double>* q = nullptr;
  const std::vector<double>* r = nullptr;
};

struct IterateRecord {
  int iteration = 0;
  double primal = 0.0;
  double dual = 0.0;
};

struct PdhgResult {
  std::vector<double> u;
  std::vector<double> q;
  std::vector<double> r;
  double primal = 0.0;  // objective at u
  double dual = 0.0;    // lower bound from (q, r)
  double gap = 0.0;
  double div_residual = 0.0;  // sum_i |(K^T y)_i| = integral of |div z|
  double div_max = 0.0;       // max_i |div z|
  int iterations = 0;
  bool converged = false;
  std::vector<IterateRecord> history;
};

double huber(double w, double kappa);

// Objective (primal) value of u for the problem.
double saddle_primal(const SaddleProblem& prob, const std::vector<double>& u);

// Largest eigenvalue of K^T K by power iteration.
double operator_norm_squared(const Grid& grid, TvNorm norm);

// Box [lo, hi] the primal iterate is confined to.
std::pair<double, double> primal_box(const std::vector<double>& beta);

// Lower bound on the optimal value given by dual variables with |q_g| <= 1
// and |r_b| <= 1 (layout of PdhgResult).
double saddle_dual(const SaddleProblem& prob, const std::vector<double>& q,
                   const std::vector<double>& r);

PdhgResult run_pdhg(const SaddleProblem& prob, const SolverOptions& opts,
                    const WarmStart& warm = {});

}  // namespace lsgrad
