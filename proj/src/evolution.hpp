#pragma once

// Implicit Euler for dh/dt + Lambda(h) + F(h) = source on the boundary.
// Each step is one resolvent: h_{n+1} = J_tau(h_n + tau (source_n - F(h_n))).

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "grid.hpp"
#include "pdhg.hpp"
#include "resolvent.hpp"

namespace lsgrad {

// Pointwise Lipschitz nonlinearity f with f(0) = 0.
class NemytskiiSpec {
 public:
  enum class Kind { kZero, kLinear, kTable };

  static NemytskiiSpec zero();
  static NemytskiiSpec linear(double omega);
  // Piecewise linear through the knots (x strictly increasing), extended
  // with the end slopes. Throws unless f(0) = 0 and omega bounds every slope.
  static NemytskiiSpec table(std::vector<std::pair<double, double>> knots, double omega);

  Kind kind() const { return kind_; }
  double lipschitz() const { return omega_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

  double value(double h) const;
  double primitive(double h) const;  // integral of f from 0 to h
  BoundaryData apply(const BoundaryData& h) const;

  std::string describe() const;

 private:
  Kind kind_ = Kind::kZero;
  double omega_ = 0.0;
  std::vector<std::pair<double, double>> knots_;
};

// Sources indexed by step: empty means zero, one entry is constant in time,
// otherwise entry n drives step n.
using SourceSeries = std::vector<BoundaryData>;

struct StepResult {
  BoundaryData h;        // h_{n+1}
  BoundaryData step_g;   // selection of Lambda(h_{n+1})
  BulkField u;
  DualField z;
  double phi = 0.0;      // <step_g, h_{n+1}>
  double gap = 0.0;
  double div_residual = 0.0;
  double sign_defect = 0.0;
  int iterations = 0;
  bool converged = false;
};

StepResult implicit_euler_step(const Grid& grid, const BoundaryData& h_n, double tau,
                               const BoundaryData& source_n, const NemytskiiSpec& f,
                               const SolverOptions& opts = {},
                               const ResolventWarmStart& warm = {});

struct StepDiagnostics {
  double mass = 0.0;
  double phi = 0.0;
  std::array<double, 3> dhdt_norms{};  // q = 1, 2, inf
  double gap = 0.0;
  double div_residual = 0.0;
  double sign_defect = 0.0;
  int iterations = 0;
  bool converged = true;
};

struct Trajectory {
  double tau = 0.0;
  NemytskiiSpec f;
  std::vector<double> times;
  std::vector<BoundaryData> states;
  std::vector<BoundaryData> step_g;     // step_g[n] belongs to states[n + 1]
  std::vector<BoundaryData> sources;    // source used by each step
  std::vector<StepDiagnostics> diagnostics;  // one per state
  BulkField final_u;
  DualField final_z;
  bool converged = true;
};

const BoundaryData& source_at(const Grid& grid, const SourceSeries& source, std::size_t n,
                              BoundaryData& zero);

Trajectory evolve(const Grid& grid, const BoundaryData& h0, double t_end, double tau,
                  const SourceSeries& source, const NemytskiiSpec& f,
                  const SolverOptions& opts = {});

struct DiagnosticsReport {
  bool decay_checks_apply = false;  // f = 0 and no source
  double phi_scale = 0.0;
  double mass_drift = 0.0;          // max |mass(t) - mass(0)| / ||h0||_1
  double phi_increase = 0.0;        // max (phi_{n+1} - phi_n)^+
  double decay_ratio = 0.0;         // max phi(t) t / (2 ||h0||_2^2)
  double ab_ratio = 0.0;            // max |step_g| t / (2 ||h0||_inf)
  double ab_pointwise_ratio = 0.0;  // max_b |step_g_b| t / (2 |h0_b|)
  double energy_excess = 0.0;       // max (lhs - rhs) of the energy inequality
  double energy_scale = 0.0;
  double spread_initial = 0.0;      // ||h0 - mean||_1
  double spread_final = 0.0;
  double stabilization_time = -1.0; // first t with spread <= 0.05 spread_initial
  std::vector<double> entropy_ratio;  // ||h - mean||_1 / phi, 0 where phi = 0
  std::vector<double> spread;
  std::vector<double> energy_lhs;
  std::vector<double> energy_rhs;
};

DiagnosticsReport diagnostics_report(const Trajectory& traj, const BoundaryData& h0,
                                     const Grid& grid);

struct ComparisonReport {
  // [q][mode]: q in {1, 2, inf}; mode 0 = positive part, 1 = full difference.
  std::array<std::array<double, 2>, 3> max_excess{};
  std::vector<std::array<std::array<double, 2>, 3>> lhs;
  std::vector<std::array<std::array<double, 2>, 3>> rhs;
  bool ordered = true;       // a <= b at every time when a0 <= b0
  double order_violation = 0.0;
};

ComparisonReport compare_trajectories(const Grid& grid, const Trajectory& a,
                                      const Trajectory& b);

}  // namespace lsgrad
