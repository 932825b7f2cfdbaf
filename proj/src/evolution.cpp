#include "evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dtn.hpp"

namespace lsgrad {

NemytskiiSpec NemytskiiSpec::zero() { return {}; }

NemytskiiSpec NemytskiiSpec::linear(double omega) {
  if (!(omega >= 0.0) || !std::isfinite(omega)) {
    throw std::invalid_argument("linear nonlinearity needs omega >= 0");
  }
  NemytskiiSpec f;
  f.kind_ = Kind::kLinear;
  f.omega_ = omega;
  return f;
}

NemytskiiSpec NemytskiiSpec::table(std::vector<std::pair<double, double>> knots,
                                   double omega) {
  if (knots.size() < 2) throw std::invalid_argument("table needs at least two knots");
  for (const auto& [x, y] : knots) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw std::invalid_argument("table knots must be finite");
    }
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i].first > knots[i - 1].first)) {
      throw std::invalid_argument("table abscissae must be strictly increasing");
    }
  }
  double slope_max = 0.0;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    const double s = (knots[i].second - knots[i - 1].second) /
                     (knots[i].first - knots[i - 1].first);
    slope_max = std::max(slope_max, std::abs(s));
  }
  if (!(omega >= slope_max * (1.0 - 1e-12))) {
    throw std::invalid_argument("declared Lipschitz constant " + std::to_string(omega) +
                                " is below the table slope " + std::to_string(slope_max));
  }
  NemytskiiSpec f;
  f.kind_ = Kind::kTable;
  f.omega_ = omega;
  f.knots_ = std::move(knots);
  if (std::abs(f.value(0.0)) > 1e-14) {
    throw std::invalid_argument("table nonlinearity must satisfy f(0) = 0");
  }
  return f;
}

double NemytskiiSpec::value(double h) const {
  switch (kind_) {
    case Kind::kZero:
      return 0.0;
    case Kind::kLinear:
      return omega_ * h;
    case Kind::kTable:
      break;
  }
  const auto& k = knots_;
  std::size_t i = 1;
  while (i + 1 < k.size() && h > k[i].first) ++i;
  const double t = (h - k[i - 1].first) / (k[i].first - k[i - 1].first);
  return k[i - 1].second + t * (k[i].second - k[i - 1].second);
}

double NemytskiiSpec::primitive(double h) const {
  switch (kind_) {
    case Kind::kZero:
      return 0.0;
    case Kind::kLinear:
      return 0.5 * omega_ * h * h;
    case Kind::kTable:
      break;
  }
  // Exact integral of the piecewise linear interpolant between 0 and h.
  std::vector<double> pts{0.0, h};
  for (const auto& kn : knots_) {
    if (kn.first > std::min(0.0, h) && kn.first < std::max(0.0, h)) pts.push_back(kn.first);
  }
  std::sort(pts.begin(), pts.end());
  double acc = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    acc += 0.5 * (pts[i] - pts[i - 1]) * (value(pts[i]) + value(pts[i - 1]));
  }
  return h >= 0.0 ? acc : -acc;
}

BoundaryData NemytskiiSpec::apply(const BoundaryData& h) const {
  BoundaryData out = h;
  for (double& v : out.values) v = value(v);
  return out;
}

std::string NemytskiiSpec::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::kZero:
      return "zero";
    case Kind::kLinear:
      os << "linear(" << omega_ << ")";
      return os.str();
    case Kind::kTable:
      os << "table(" << knots_.size() << " knots, omega=" << omega_ << ")";
      return os.str();
  }
  return "unknown";
}

const BoundaryData& source_at(const Grid& grid, const SourceSeries& source, std::size_t n,
                              BoundaryData& zero) {
  if (source.empty()) {
    if (zero.values.size() != grid.num_boundary()) zero = make_boundary(grid, 0.0);
    return zero;
  }
  if (source.size() == 1) return source.front();
  if (n >= source.size()) throw std::invalid_argument("source series is shorter than the run");
  return source[n];
}

StepResult implicit_euler_step(const Grid& grid, const BoundaryData& h_n, double tau,
                               const BoundaryData& source_n, const NemytskiiSpec& f,
                               const SolverOptions& opts, const ResolventWarmStart& warm) {
  check_shape(grid, h_n);
  check_shape(grid, source_n);
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  if (f.kind() != NemytskiiSpec::Kind::kZero && tau * f.lipschitz() >= 1.0) {
    throw std::invalid_argument("time step violates tau * omega < 1");
  }
  BoundaryData w = h_n;
  for (std::size_t k = 0; k < w.values.size(); ++k) {
    w.values[k] += tau * (source_n.values[k] - f.value(h_n.values[k]));
  }
  ResolventResult res = resolvent_apply(grid, w, tau, opts, warm);
  StepResult step;
  step.h = std::move(res.h);
  step.step_g = std::move(res.g_sel);
  step.u = std::move(res.u);
  step.z = std::move(res.z);
  step.phi = res.phi;
  step.gap = res.gap;
  step.div_residual = res.div_residual;
  step.sign_defect = res.sign_defect;
  step.iterations = res.iterations;
  step.converged = res.converged;
  return step;
}

namespace {

std::array<double, 3> norms3(const Grid& grid, const BoundaryData& b) {
  return {boundary_norm(grid, b, 1.0), boundary_norm(grid, b, 2.0),
          boundary_norm(grid, b, std::numeric_limits<double>::infinity())};
}

}  // namespace

Trajectory evolve(const Grid& grid, const BoundaryData& h0, double t_end, double tau,
                  const SourceSeries& source, const NemytskiiSpec& f,
                  const SolverOptions& opts) {
  check_shape(grid, h0);
  for (const auto& s : source) check_shape(grid, s);
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("t_end must be nonnegative");
  }
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / tau - 1e-9));
  if (source.size() > 1 && source.size() < steps) {
    throw std::invalid_argument("source series is shorter than the run");
  }

  Trajectory traj;
  traj.tau = tau;
  traj.f = f;
  traj.times.push_back(0.0);
  traj.states.push_back(h0);

  const DtNRecord initial = evaluate(grid, h0, opts);
  StepDiagnostics d0;
  d0.mass = boundary_integral(grid, h0);
  d0.phi = initial.phi;
  d0.gap = initial.solution.gap;
  d0.div_residual = initial.solution.div_residual;
  d0.sign_defect = initial.certificate.sign_defect;
  d0.iterations = initial.solution.iterations;
  d0.converged = initial.converged;
  traj.diagnostics.push_back(d0);
  traj.converged = initial.converged;

  // Near extinction the step energies vanish and a purely relative gap test
  // cannot be met; the floor keeps the error of the selection (of order
  // sqrt(gap / tau)) well below tolerance * phi(h0).
  SolverOptions step_opts = opts;
  if (step_opts.abs_tolerance == 0.0) {
    step_opts.abs_tolerance =
        1e-2 * opts.tolerance * std::min(tau, 1.0) * std::max(initial.phi_primal, 0.0);
  }

  BoundaryData zero;
  BulkField u = initial.solution.u;
  DualField z = initial.solution.z;
  for (std::size_t n = 0; n < steps; ++n) {
    const BoundaryData& src = source_at(grid, source, n, zero);
    ResolventWarmStart warm{&u, &z};
    StepResult st = implicit_euler_step(grid, traj.states.back(), tau, src, f, step_opts, warm);

    StepDiagnostics d;
    d.mass = boundary_integral(grid, st.h);
    d.phi = st.phi;
    BoundaryData rate = st.h;
    for (std::size_t k = 0; k < rate.values.size(); ++k) {
      rate.values[k] = (st.h.values[k] - traj.states.back().values[k]) / tau;
    }
    d.dhdt_norms = norms3(grid, rate);
    d.gap = st.gap;
    d.div_residual = st.div_residual;
    d.sign_defect = st.sign_defect;
    d.iterations = st.iterations;
    d.converged = st.converged;
    traj.converged = traj.converged && st.converged;

    traj.times.push_back(static_cast<double>(n + 1) * tau);
    traj.states.push_back(std::move(st.h));
    traj.step_g.push_back(std::move(st.step_g));
    traj.sources.push_back(src);
    traj.diagnostics.push_back(d);
    u = std::move(st.u);
    z = std::move(st.z);
  }
  traj.final_u = std::move(u);
  traj.final_z = std::move(z);
  return traj;
}

DiagnosticsReport diagnostics_report(const Trajectory& traj, const BoundaryData& h0,
                                     const Grid& grid) {
  check_shape(grid, h0);
  if (traj.states.empty()) throw std::invalid_argument("empty trajectory");
  DiagnosticsReport rep;
  const double inf = std::numeric_limits<double>::infinity();
  bool sourced = false;
  for (const auto& s : traj.sources) sourced = sourced || sup_norm(s.values) > 0.0;
  rep.decay_checks_apply = traj.f.kind() == NemytskiiSpec::Kind::kZero && !sourced;

  const double l1 = boundary_norm(grid, h0, 1.0);
  const double l2 = boundary_norm(grid, h0, 2.0);
  const double linf = boundary_norm(grid, h0, inf);
  const double mass0 = traj.diagnostics.front().mass;
  rep.phi_scale = std::max(traj.diagnostics.front().phi, 0.0);

  auto spread = [&](const BoundaryData& h) {
    const double m = boundary_mean(grid, h);
    BoundaryData c = h;
    for (double& v : c.values) v -= m;
    return boundary_norm(grid, c, 1.0);
  };
  auto energy = [&](const BoundaryData& h, double phi) {
    double e = phi;
    const auto& bdry = grid.boundary();
    for (std::size_t k = 0; k < bdry.size(); ++k) {
      e += bdry[k].length * traj.f.primitive(h.values[k]);
    }
    return e;
  };

  rep.spread_initial = spread(h0);
  const double e0 = energy(traj.states.front(), traj.diagnostics.front().phi);
  rep.energy_scale = std::max({std::abs(e0), l2 * l2, 1e-300});
  double dissipated = 0.0, forced = 0.0;
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const auto& h = traj.states[n];
    const auto& d = traj.diagnostics[n];
    const double t = traj.times[n];
    const double sp = spread(h);
    rep.spread.push_back(sp);
    if (rep.stabilization_time < 0.0 && sp <= 0.05 * rep.spread_initial) {
      rep.stabilization_time = t;
    }
    rep.entropy_ratio.push_back(d.phi > 0.0 ? sp / d.phi : 0.0);

    if (n > 0) {
      const double r2 = d.dhdt_norms[1];
      dissipated += 0.5 * traj.tau * r2 * r2;
      const double s2 = boundary_norm(grid, traj.sources[n - 1], 2.0);
      forced += 0.5 * traj.tau * s2 * s2;
      rep.phi_increase = std::max(rep.phi_increase, d.phi - traj.diagnostics[n - 1].phi);
    }
    rep.energy_lhs.push_back(dissipated + energy(h, d.phi));
    rep.energy_rhs.push_back(e0 + forced);
    rep.energy_excess = std::max(rep.energy_excess, rep.energy_lhs.back() - rep.energy_rhs.back());

    if (l1 > 0.0) rep.mass_drift = std::max(rep.mass_drift, std::abs(d.mass - mass0) / l1);
    if (n > 0 && l2 > 0.0) {
      rep.decay_ratio = std::max(rep.decay_ratio, d.phi * t / (2.0 * l2 * l2));
    }
    if (n > 0) {
      const auto& g = traj.step_g[n - 1];
      if (linf > 0.0) rep.ab_ratio = std::max(rep.ab_ratio, sup_norm(g.values) * t / (2.0 * linf));
      for (std::size_t k = 0; k < g.values.size(); ++k) {
        const double a = std::abs(g.values[k]);
        if (a == 0.0) continue;
        const double bound = 2.0 * std::abs(h0.values[k]);
        rep.ab_pointwise_ratio =
            std::max(rep.ab_pointwise_ratio, bound > 0.0 ? a * t / bound : inf);
      }
    }
  }
  rep.spread_final = rep.spread.back();
  return rep;
}

ComparisonReport compare_trajectories(const Grid& grid, const Trajectory& a,
                                      const Trajectory& b) {
  if (a.states.size() != b.states.size() || a.tau != b.tau) {
    throw std::invalid_argument("trajectories use different time grids");
  }
  const double omega = std::max(a.f.lipschitz(), b.f.lipschitz());
  const double tau = a.tau;
  ComparisonReport rep;
  const std::size_t nb = grid.num_boundary();

  auto diff_norms = [&](const BoundaryData& x, const BoundaryData& y) {
    BoundaryData full = x, pos = x;
    for (std::size_t k = 0; k < nb; ++k) {
      full.values[k] = x.values[k] - y.values[k];
      pos.values[k] = std::max(full.values[k], 0.0);
    }
    const auto nf = norms3(grid, full);
    const auto np = norms3(grid, pos);
    std::array<std::array<double, 2>, 3> out{};
    for (int q = 0; q < 3; ++q) out[q] = {np[q], nf[q]};
    return out;
  };

  bool initially_ordered = true;
  for (std::size_t k = 0; k < nb; ++k) {
    initially_ordered = initially_ordered && a.states[0].values[k] <= b.states[0].values[k];
  }
  rep.ordered = initially_ordered;

  const auto e0 = diff_norms(a.states[0], b.states[0]);
  // Accumulated forcing: sum_k e^{omega (t_n - t_k)} tau ||src_a - src_b||.
  std::array<std::array<double, 2>, 3> forcing{};
  for (std::size_t n = 0; n < a.states.size(); ++n) {
    if (n > 0) {
      const auto ds = diff_norms(a.sources[n - 1], b.sources[n - 1]);
      const double grow = std::exp(omega * tau);
      for (int q = 0; q < 3; ++q) {
        for (int m = 0; m < 2; ++m) forcing[q][m] = grow * (forcing[q][m] + tau * ds[q][m]);
      }
    }
    const double t = a.times[n];
    const auto lhs = diff_norms(a.states[n], b.states[n]);
    std::array<std::array<double, 2>, 3> rhs{};
    for (int q = 0; q < 3; ++q) {
      for (int m = 0; m < 2; ++m) {
        rhs[q][m] = std::exp(omega * t) * e0[q][m] + forcing[q][m];
        rep.max_excess[q][m] = std::max(rep.max_excess[q][m], lhs[q][m] - rhs[q][m]);
      }
    }
    rep.lhs.push_back(lhs);
    rep.rhs.push_back(rhs);
    if (initially_ordered) {
      for (std::size_t k = 0; k < nb; ++k) {
        rep.order_violation =
            std::max(rep.order_violation, a.states[n].values[k] - b.states[n].values[k]);
      }
    }
  }
  rep.ordered = initially_ordered && rep.order_violation <= 0.0;
  return rep;
}

}  // namespace lsgrad
