#include "resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lsgrad {

double truncator(double s) { return std::clamp(s, -1.0, 1.0); }

double huber_unit(double s) {
  const double a = std::abs(s);
  return a <= 1.0 ? 0.5 * s * s : a - 0.5;
}

double gamma_potential(double g, double alpha, double t) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  return (huber_unit(g - alpha * t) - huber_unit(g)) / alpha;
}

double robin_energy(const Grid& grid, const BoundaryData& g, double alpha,
                    const BulkField& u) {
  check_shape(grid, g);
  double e = tv(grid, u);
  const auto& bdry = grid.boundary();
  for (std::size_t k = 0; k < bdry.size(); ++k) {
    e += bdry[k].length * gamma_potential(g.values[k], alpha, u.values[bdry[k].cell]);
  }
  return e;
}

namespace {

void check_data(const Grid& grid, const BoundaryData& g) {
  check_shape(grid, g);
  for (double v : g.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("boundary data contains NaN or inf");
  }
}

}  // namespace

RobinSolution solve_robin(const Grid& grid, const BoundaryData& g, double alpha,
                          const SolverOptions& opts) {
  check_data(grid, g);
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be positive");
  }
  // s_b Gamma(t) = sup_{|r|<=1} s_b [ r (g/alpha - t) - r^2 / (2 alpha) ]
  //               - s_b H(g) / alpha
  SaddleProblem prob{&grid, g.values, 1.0 / alpha, 0.0, TvNorm::kIsotropic};
  const auto& bdry = grid.boundary();
  for (std::size_t k = 0; k < bdry.size(); ++k) {
    prob.beta[k] = g.values[k] / alpha;
    prob.constant -= bdry[k].length * huber_unit(g.values[k]) / alpha;
  }
  PdhgResult res = run_pdhg(prob, opts);

  RobinSolution sol;
  sol.alpha = alpha;
  sol.u = BulkField{std::move(res.u)};
  sol.z = DualField{std::move(res.q), res.r};
  sol.conormal_g = BoundaryData{std::move(res.r)};
  sol.primal_energy = robin_energy(grid, g, alpha, sol.u);
  sol.dual_energy = res.dual;
  sol.gap = sol.primal_energy - sol.dual_energy;
  sol.div_residual = res.div_residual;
  sol.div_max = res.div_max;
  sol.iterations = res.iterations;
  sol.converged = res.converged;
  for (std::size_t k = 0; k < bdry.size(); ++k) {
    const double target = truncator(g.values[k] - alpha * sol.u.values[bdry[k].cell]);
    sol.bc_defect = std::max(sol.bc_defect, std::abs(sol.conormal_g.values[k] - target));
  }
  return sol;
}

ResolventResult resolvent_apply(const Grid& grid, const BoundaryData& g,
                                double lambda, const SolverOptions& opts,
                                const ResolventWarmStart& warm) {
  check_data(grid, g);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be positive");
  }
  // Robin problem with boundary flux T1((g - Tu) / lambda): the 1/lambda
  // scaling makes h = g - lambda [z, nu] a Dirichlet datum that u attains in
  // the weak sense.
  SaddleProblem prob{&grid, g.values, lambda, 0.0, TvNorm::kIsotropic};
  WarmStart ws;
  if (warm.u != nullptr) ws.u = &warm.u->values;
  if (warm.z != nullptr) {
    ws.q = &warm.z->interior;
    ws.r = &warm.z->boundary;
  }
  PdhgResult res = run_pdhg(prob, opts, ws);

  ResolventResult out;
  out.lambda = lambda;
  out.u = BulkField{std::move(res.u)};
  out.z = DualField{std::move(res.q), res.r};
  out.g_sel = BoundaryData{std::move(res.r)};
  out.h = g;
  const auto& bdry = grid.boundary();
  for (std::size_t k = 0; k < bdry.size(); ++k) {
    out.h.values[k] -= lambda * out.g_sel.values[k];
  }
  out.phi = inner_boundary(grid, out.g_sel, out.h);
  out.gap = res.gap;
  out.div_residual = res.div_residual;
  out.iterations = res.iterations;
  out.converged = res.converged;
  for (std::size_t k = 0; k < bdry.size(); ++k) {
    const double w = out.h.values[k] - out.u.values[bdry[k].cell];
    out.sign_defect += bdry[k].length * (std::abs(w) - out.g_sel.values[k] * w);
  }
  return out;
}

}  // namespace lsgrad
