// Acceptance suite. One PASS/FAIL line per criterion; exit status 1 if any
// criterion fails. Golden values come from closed forms evaluated here or
// from the exact min-cut solver.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "dtn.hpp"
#include "evolution.hpp"
#include "lab.hpp"
#include "oracle.hpp"
#include "plap.hpp"
#include "resolvent.hpp"
#include "tvmin.hpp"

using namespace lsgrad;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("violated: ") + what;
    }
  }
  void note(const char* fmt, double v) {
    char buf[128];
    std::snprintf(buf, sizeof buf, fmt, v);
    detail += (detail.empty() ? "" : ", ") + std::string(buf);
  }
};

SolverOptions options(double tol) {
  SolverOptions o;
  o.tolerance = tol;
  o.div_tolerance = tol;
  o.max_iters = 3000000;
  return o;
}

BoundaryData random_boundary(const Grid& g, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> U(lo, hi);
  return sample_boundary(g, [&](Vec2) { return U(rng); });
}

BoundaryData minus(const BoundaryData& a, const BoundaryData& b) {
  BoundaryData d = a;
  for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] -= b.values[k];
  return d;
}

// Trajectories collected for the energy inequality.
struct Recorded {
  std::string name;
  Grid grid;
  Trajectory traj;
};
std::vector<Recorded> g_trajectories;

// Left side minus right side of
//   1/2 sum tau ||dh/tau||^2 + E(h_n) <= E(h_0) + 1/2 sum tau ||source||^2,
// maximized over n, with E(h) = phi(h) + int F(h) and relative to the scale
// max(|E(h_0)|, ||h_0||_2^2). Computed from the stored states only.
double energy_excess(const Grid& g, const Trajectory& t, double* scale_out) {
  auto energy = [&](std::size_t n) {
    double e = t.diagnostics[n].phi;
    for (std::size_t k = 0; k < g.num_boundary(); ++k) {
      e += g.boundary()[k].length * t.f.primitive(t.states[n].values[k]);
    }
    return e;
  };
  const double e0 = energy(0);
  const double l2 = boundary_norm(g, t.states[0], 2.0);
  const double scale = std::max({std::abs(e0), l2 * l2, 1e-300});
  double dissipated = 0.0, forced = 0.0, worst = -kInf;
  for (std::size_t n = 1; n < t.states.size(); ++n) {
    BoundaryData rate = minus(t.states[n], t.states[n - 1]);
    for (double& v : rate.values) v /= t.tau;
    const double r = boundary_norm(g, rate, 2.0);
    const double s = boundary_norm(g, t.sources[n - 1], 2.0);
    dissipated += 0.5 * t.tau * r * r;
    forced += 0.5 * t.tau * s * s;
    worst = std::max(worst, dissipated + energy(n) - e0 - forced);
  }
  *scale_out = scale;
  return worst / scale;
}

// ---------------------------------------------------------------------------

Outcome constants() {
  Outcome out;
  const Grid disk = build_disk_grid(32, 1.0);
  const Grid square = build_square_grid(16, 2.0);
  const SolverOptions o = options(1e-8);
  double worst_phi = 0.0, worst_res = 0.0, worst_flow = 0.0;
  for (const Grid* g : {&disk, &square}) {
    for (double c : {0.7, -2.3}) {
      const BoundaryData h = make_boundary(*g, c);
      const DtNRecord rec = evaluate(*g, h, o);
      const double bound = 1e-8 * std::abs(c) * g->perimeter();
      worst_phi = std::max(worst_phi, std::abs(rec.phi_primal) / bound);
      out.require(std::abs(rec.phi_primal) <= bound && std::abs(rec.phi) <= bound,
                  "phi(c) bound");

      for (double lambda : {0.1, 1.0, 10.0}) {
        const ResolventResult r = resolvent_apply(*g, h, lambda, o);
        for (double v : r.h.values) worst_res = std::max(worst_res, std::abs(v - c));
      }
      const Trajectory t = evolve(*g, h, 100 * 0.05, 0.05, {}, NemytskiiSpec::zero(), o);
      out.require(t.states.size() == 101, "100 steps");
      for (const auto& s : t.states) {
        for (double v : s.values) worst_flow = std::max(worst_flow, std::abs(v - c));
      }
      g_trajectories.push_back({"constant", *g, t});
    }
  }
  out.require(worst_res <= 1e-6, "J_lambda(c) = c");
  out.require(worst_flow <= 1e-6, "flow of c stays c");
  out.note("phi/bound %.2e", worst_phi);
  out.note("resolvent dev %.2e", worst_res);
  out.note("flow dev %.2e", worst_flow);
  return out;
}

Outcome oracle_equivalence() {
  Outcome out;
  const Grid g = build_square_grid(8, 1.0);
  std::mt19937_64 rng(20);
  const SolverOptions o = options(1e-8);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const BoundaryData h = random_boundary(g, rng);
    const double exact = coarea_mincut_min_phi(g, h).value;
    const TvSolution sol = solve_relaxed_dirichlet_anisotropic(g, h, o);
    const double rel = std::abs(sol.primal_energy - exact) / exact;
    worst = std::max(worst, rel);
    out.require(rel <= 1e-5, "relative error <= 1e-5");
  }
  out.note("max relative error %.2e", worst);
  return out;
}

// Closed form of the relaxed energy of the disk family, evaluated by
// quadrature. The gradient part lives in four caps beyond |x| or |y| =
// 1/sqrt 2 where u = +-2 x^2 (resp. y^2): each cap carries
// int 4|x| dA = 8 int_c^1 x sqrt(1 - x^2) dx. The jump part sits on the four
// chords of length sqrt 2 bounding the central square: jumps |1 - lambda|
// (x caps) and |1 + lambda| (y caps).
double family_energy_by_quadrature(double lambda) {
  const double c = 1.0 / std::sqrt(2.0);
  const int n = 20000;  // composite Simpson, even
  const double dx = (1.0 - c) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = c + i * dx;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * x * std::sqrt(std::max(1.0 - x * x, 0.0));
  }
  const double cap = 8.0 * s * dx / 3.0;
  const double chord = 2.0 * std::sqrt(1.0 - c * c);
  return 4.0 * cap + 2.0 * chord * (std::abs(1.0 - lambda) + std::abs(1.0 + lambda));
}

Outcome disk_nonuniqueness() {
  Outcome out;
  const double closed = 20.0 * std::sqrt(2.0) / 3.0;
  double quad_dev = 0.0;
  for (double lam : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    quad_dev = std::max(quad_dev, std::abs(family_energy_by_quadrature(lam) - closed));
  }
  out.require(quad_dev <= 1e-6, "quadrature reproduces the closed form");
  out.note("quadrature dev %.1e", quad_dev);
  if (!out.pass) return out;

  const Grid g = build_disk_grid(128, 1.0);
  const BoundaryData h = lab::boundary_preset(g, "example33");
  std::vector<double> e;
  for (double lam : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    const BulkField u = sample_bulk(g, [lam](Vec2 p) { return lab::example33_family(lam, p.x, p.y); });
    e.push_back(energy_phi_h(g, h, u));
  }
  const auto [mn, mx] = std::minmax_element(e.begin(), e.end());
  const double spread = (*mx - *mn) / *mn;
  out.require(spread <= 0.005, "family spread <= 0.5%");
  const TvSolution sol = solve_relaxed_dirichlet(g, h, options(1e-6));
  out.require(sol.converged, "solver converged");
  out.require(sol.primal_energy <= *mn * 1.01, "solver <= min family * 1.01");
  for (double v : e) out.require(std::abs(v - closed) <= 0.03 * closed, "within 3% of 20 sqrt2/3");
  out.require(std::abs(sol.primal_energy - closed) <= 0.03 * closed, "solver within 3%");
  out.note("spread %.3e", spread);
  out.note("family min %.5f", *mn);
  out.note("solver %.5f", sol.primal_energy);
  out.note("closed form %.5f", closed);
  return out;
}

Outcome sign_data() {
  Outcome out;
  auto sign_x = [](const Grid& g) { return sample_boundary(g, [](Vec2 p) { return p.x > 0 ? 1.0 : -1.0; }); };
  const Grid g32 = build_disk_grid(32, 1.0), g64 = build_disk_grid(64, 1.0);
  const double v32 = coarea_mincut_min_phi(g32, sign_x(g32)).value;
  const double v64 = coarea_mincut_min_phi(g64, sign_x(g64)).value;
  const double extrapolated = 2.0 * v64 - v32;

  const Grid g = build_disk_grid(128, 1.0);
  const DtNRecord rec = evaluate(g, sign_x(g), options(1e-6));
  out.require(rec.converged, "solver converged");
  out.require(std::abs(rec.phi - extrapolated) <= 0.02 * extrapolated, "within 2% of oracle");
  out.require(std::abs(rec.phi - 4.0) <= 0.03 * 4.0, "within 3% of 4");
  out.note("phi %.6f", rec.phi);
  out.note("oracle extrapolated %.6f", extrapolated);
  return out;
}

Outcome homogeneity() {
  Outcome out;
  const Grid g = build_disk_grid(24, 1.0);
  std::mt19937_64 rng(5);
  const SolverOptions o = options(1e-6);
  double worst = 0.0, worst_cross = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const BoundaryData h = random_boundary(g, rng);
    const HomogeneityReport rep = homogeneity_report(g, h, {0.5, 2.0, 10.0}, o);
    out.require(rep.base.converged, "base solve converged");
    for (const auto& e : rep.entries) {
      worst = std::max(worst, e.relative_deviation);
      out.require(e.converged, "scaled solve converged");
      out.require(e.relative_deviation <= 1e-4, "relative deviation <= 1e-4");
      // A rigorous bound: z(lambda h) certifies u(h) within the two gaps.
      const double allow = e.cross_bound * (1 + 1e-9) + 1e-12 * rep.base.phi_primal;
      out.require(e.cross.z_sup <= 1.0 + 1e-12, "cross certificate feasible");
      out.require(e.cross_gap <= allow, "cross gap within combined tolerance");
      worst_cross = std::max(worst_cross, e.cross_gap / std::max(allow, 1e-300));
    }
  }
  out.note("max relative deviation %.2e", worst);
  out.note("max cross gap / allowance %.3f", worst_cross);
  return out;
}

Outcome contraction_and_order() {
  Outcome out;
  const Grid g = build_square_grid(8, 1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> L(0.05, 1.0);
  const SolverOptions o = options(1e-7);
  const double qs[3] = {1.0, 2.0, kInf};
  double worst[3] = {-kInf, -kInf, -kInf}, worst_order = -kInf;
  for (int trial = 0; trial < 20; ++trial) {
    const BoundaryData g1 = random_boundary(g, rng), g2 = random_boundary(g, rng);
    const double lambda = L(rng);
    BoundaryData g3 = g1;
    for (std::size_t k = 0; k < g3.values.size(); ++k) g3.values[k] = std::max(g1.values[k], g2.values[k]);
    const ResolventResult a = resolvent_apply(g, g1, lambda, o);
    const ResolventResult b = resolvent_apply(g, g2, lambda, o);
    const ResolventResult c = resolvent_apply(g, g3, lambda, o);
    out.require(a.converged && b.converged && c.converged, "resolvents converged");
    const BoundaryData dh = minus(a.h, b.h), dg = minus(g1, g2);
    for (int i = 0; i < 3; ++i) {
      worst[i] = std::max(worst[i], boundary_norm(g, dh, qs[i]) - boundary_norm(g, dg, qs[i]));
    }
    // g1 <= g3 and g2 <= g3 pointwise.
    for (std::size_t k = 0; k < a.h.values.size(); ++k) {
      worst_order = std::max({worst_order, a.h.values[k] - c.h.values[k], b.h.values[k] - c.h.values[k]});
    }
  }
  for (double w : worst) out.require(w <= 1e-6, "contraction slack 1e-6");
  out.require(worst_order <= 1e-6, "order slack 1e-6");
  out.note("L1 excess %.2e", worst[0]);
  out.note("L2 excess %.2e", worst[1]);
  out.note("Linf excess %.2e", worst[2]);
  out.note("order excess %.2e", worst_order);

  // Trajectories of h' + Lambda h + f(h) = 0 with f(h) = h / 2: an unordered
  // pair and an ordered pair.
  const NemytskiiSpec f = NemytskiiSpec::linear(0.5);
  const SolverOptions to = options(1e-7);
  const BoundaryData a0 = random_boundary(g, rng), b0 = random_boundary(g, rng);
  BoundaryData c0 = a0;
  std::uniform_real_distribution<double> bump(0.0, 0.5);
  for (double& v : c0.values) v += bump(rng);
  const double t_end = 20 * 0.1;
  Trajectory ta = evolve(g, a0, t_end, 0.1, {}, f, to);
  Trajectory tb = evolve(g, b0, t_end, 0.1, {}, f, to);
  Trajectory tc = evolve(g, c0, t_end, 0.1, {}, f, to);
  out.require(ta.states.size() == 21, "20 steps");
  out.require(ta.converged && tb.converged && tc.converged, "trajectories converged");
  // Independent check of the quasi-contraction with the exact factor e^{omega t}.
  double traj_excess = -kInf;
  for (const auto* pair : {&tb, &tc}) {
    for (std::size_t n = 0; n < ta.states.size(); ++n) {
      const double grow = std::exp(0.5 * ta.times[n]);
      BoundaryData d = minus(ta.states[n], pair->states[n]), d0 = minus(a0, pair->states[0]);
      BoundaryData dp = d, d0p = d0;
      for (double& v : dp.values) v = std::max(v, 0.0);
      for (double& v : d0p.values) v = std::max(v, 0.0);
      for (int i = 0; i < 3; ++i) {
        traj_excess = std::max(traj_excess, boundary_norm(g, d, qs[i]) - grow * boundary_norm(g, d0, qs[i]));
        traj_excess = std::max(traj_excess, boundary_norm(g, dp, qs[i]) - grow * boundary_norm(g, d0p, qs[i]));
      }
    }
  }
  const ComparisonReport rep = compare_trajectories(g, ta, tc);
  out.require(traj_excess <= 1e-5, "trajectory quasi-contraction slack 1e-5");
  out.require(rep.ordered && rep.order_violation <= 1e-6, "ordered trajectories stay ordered");
  for (const auto& q : rep.max_excess) {
    for (double v : q) out.require(v <= 1e-5, "reported comparison excess");
  }
  out.note("trajectory excess %.2e", traj_excess);
  g_trajectories.push_back({"pair a", g, std::move(ta)});
  g_trajectories.push_back({"pair b", g, std::move(tb)});
  g_trajectories.push_back({"pair c", g, std::move(tc)});
  return out;
}

Outcome semigroup() {
  Outcome out;
  static const Grid g = build_disk_grid(32, 1.0);
  const BoundaryData h0 = sample_boundary(g, [](Vec2 p) { return p.x > 0 ? 1.0 : -1.0; });
  const double tau = 0.05, t_end = 5.0;
  Trajectory t = evolve(g, h0, t_end, tau, {}, NemytskiiSpec::zero(), options(1e-6));
  out.require(t.converged, "steps converged");

  const double l1 = boundary_norm(g, h0, 1.0), l2 = boundary_norm(g, h0, 2.0);
  const double linf = sup_norm(h0.values);
  const double m0 = boundary_integral(g, h0);
  const double mean0 = boundary_mean(g, h0);
  double drift = 0.0, increase = -kInf, decay = 0.0, ab = 0.0;
  for (std::size_t n = 0; n < t.states.size(); ++n) {
    drift = std::max(drift, std::abs(boundary_integral(g, t.states[n]) - m0) / l1);
    if (n == 0) continue;
    const double time = t.times[n];
    increase = std::max(increase, t.diagnostics[n].phi - t.diagnostics[n - 1].phi);
    decay = std::max(decay, t.diagnostics[n].phi * time / (2.0 * l2 * l2));
    ab = std::max(ab, sup_norm(t.step_g[n - 1].values) * time / (2.0 * linf));
  }
  BoundaryData c0 = h0, cT = t.states.back();
  for (double& v : c0.values) v -= mean0;
  const double meanT = boundary_mean(g, cT);
  for (double& v : cT.values) v -= meanT;
  const double ratio = boundary_norm(g, cT, 1.0) / boundary_norm(g, c0, 1.0);

  out.require(drift <= 1e-4, "mass drift <= 1e-4");
  out.require(increase <= 1e-6, "phi nonincreasing");
  out.require(decay <= 1.05, "phi t <= 2 ||h0||_2^2 * 1.05");
  out.require(ab <= 1.05, "|step_g| <= 2 ||h0||_inf / t * 1.05");
  out.require(ratio <= 0.05, "||h(T) - mean||_1 <= 0.05 ||h0 - mean||_1");
  out.note("mass drift %.2e", drift);
  out.note("max phi increase %.2e", increase);
  out.note("decay ratio %.3f", decay);
  out.note("pointwise ratio %.3f", ab);
  out.note("final spread ratio %.2e", ratio);
  g_trajectories.push_back({"semigroup", g, std::move(t)});
  return out;
}

Outcome energy_inequality() {
  Outcome out;
  // One more trajectory with a source; the estimate carries the source term
  // for f = 0.
  static const Grid g = build_square_grid(10, 1.0);
  std::mt19937_64 rng(8);
  const BoundaryData h0 = random_boundary(g, rng);
  const BoundaryData src = sample_boundary(g, [](Vec2 p) { return std::sin(3.0 * p.x) - p.y; });
  g_trajectories.push_back(
      {"source", g, evolve(g, h0, 2.0, 0.1, {src}, NemytskiiSpec::zero(), options(1e-8))});

  double worst = -kInf;
  for (const auto& r : g_trajectories) {
    double scale = 0.0;
    const double excess = energy_excess(r.grid, r.traj, &scale);
    worst = std::max(worst, excess);
    out.require(excess <= 1e-5, "energy inequality on '" + r.name + "'");
  }
  out.note("trajectories %.0f", static_cast<double>(g_trajectories.size()));
  out.note("max relative excess %.2e", worst);
  return out;
}

Outcome p_continuation() {
  Outcome out;
  const Grid g = build_square_grid(16, 1.0);
  std::mt19937_64 rng(11);
  const BoundaryData data = random_boundary(g, rng, -2.0, 2.0);
  const std::vector<double> schedule{1.8, 1.4, 1.2, 1.1, 1.05};
  const ContinuationReport rep = continuation(g, data, 1.0, schedule, PlapOptions{}, options(1e-8));
  out.require(rep.limit.converged, "limit converged");
  out.require(rep.entries.size() == schedule.size(), "one entry per p");
  for (std::size_t k = 0; k < rep.entries.size(); ++k) {
    out.require(rep.entries[k].converged, "Newton converged");
    if (k > 0) {
      out.require(rep.entries[k].distance <= 1.1 * rep.entries[k - 1].distance,
                  "distance nonincreasing within 10%");
    }
  }
  out.require(rep.entries.back().distance <= 0.5 * rep.entries.front().distance,
              "final distance <= half of the first");
  for (const auto& e : rep.entries) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "d(%.2f) %%.3e", e.p);
    out.note(buf, e.distance);
  }
  return out;
}

Outcome stability() {
  Outcome out;
  const Grid g = build_disk_grid(32, 1.0);
  std::mt19937_64 rng(13);
  const double tol = 1e-6;
  const BoundaryData h = sample_boundary(g, [](Vec2 p) { return p.x > 0 ? 1.0 : -1.0; });
  const BoundaryData rho = random_boundary(g, rng);
  std::vector<BoundaryData> seq;
  for (double n : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    BoundaryData hn = h;
    for (std::size_t k = 0; k < hn.values.size(); ++k) hn.values[k] += rho.values[k] / n;
    seq.push_back(std::move(hn));
  }
  const StabilityReport rep = stability_probe(g, h, seq, {make_boundary(g, 1.0)}, options(tol));
  out.require(rep.base.converged, "base converged");
  double worst = -kInf;
  for (std::size_t k = 0; k < rep.entries.size(); ++k) {
    const auto& e = rep.entries[k];
    // Each phi carries a relative error of at most the tolerance.
    const double allow = e.distance + 2.0 * tol * std::max(e.phi, rep.base.phi_primal);
    const double direct = boundary_norm(g, minus(seq[k], h), 1.0);
    out.require(e.converged, "perturbed solve converged");
    out.require(std::abs(direct - e.distance) <= 1e-12 * direct, "distance");
    out.require(e.phi_deviation <= allow, "|phi(h_n) - phi(h)| <= ||h_n - h||_1 + 2 tol");
    worst = std::max(worst, e.phi_deviation / allow);
  }
  out.note("max deviation / allowance %.3f", worst);
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget;  // seconds
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, "constants", 5, constants},
      {2, "oracle equivalence", 30, oracle_equivalence},
      {3, "disk non-uniqueness", 120, disk_nonuniqueness},
      {4, "sign data", 120, sign_data},
      {5, "homogeneity", 120, homogeneity},
      {6, "contraction and order", 180, contraction_and_order},
      {7, "semigroup laws", 300, semigroup},
      {8, "energy inequality", kInf, energy_inequality},
      {9, "p-continuation", 300, p_continuation},
      {10, "stability", 120, stability},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget) {
      o.pass = false;
      o.detail += "; over the runtime budget";
    }
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
