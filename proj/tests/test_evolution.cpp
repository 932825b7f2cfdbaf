#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "evolution.hpp"

using namespace lsgrad;

namespace {

BoundaryData random_boundary(const Grid& g, std::uint64_t seed, double shift = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  return sample_boundary(g, [&](Vec2) { return U(rng) + shift; });
}

SolverOptions tight(double tol = 1e-7) {
  SolverOptions o;
  o.tolerance = tol;
  o.div_tolerance = tol;
  return o;
}

}  // namespace

TEST(Nemytskii, LinearAndZero) {
  const NemytskiiSpec f = NemytskiiSpec::linear(0.5);
  EXPECT_EQ(f.value(2.0), 1.0);
  EXPECT_EQ(f.primitive(2.0), 1.0);
  EXPECT_EQ(NemytskiiSpec::zero().value(3.0), 0.0);
  EXPECT_THROW(NemytskiiSpec::linear(-1.0), std::invalid_argument);
}

TEST(Nemytskii, TableInterpolatesAndIntegrates) {
  const NemytskiiSpec f = NemytskiiSpec::table({{-1, -2}, {0, 0}, {1, 1}}, 2.0);
  EXPECT_DOUBLE_EQ(f.value(0.5), 0.5);
  EXPECT_DOUBLE_EQ(f.value(-0.5), -1.0);
  EXPECT_DOUBLE_EQ(f.value(3.0), 3.0);    // end slope 1
  EXPECT_DOUBLE_EQ(f.value(-2.0), -4.0);  // end slope 2
  EXPECT_DOUBLE_EQ(f.primitive(1.0), 0.5);
  EXPECT_DOUBLE_EQ(f.primitive(-1.0), 1.0);
  // Trapezoid check of the primitive on a longer stretch.
  double s = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const double a = -2.0 + 4.0 * i / n, b = -2.0 + 4.0 * (i + 1) / n;
    s += 0.5 * (f.value(a) + f.value(b)) * (b - a);
  }
  EXPECT_NEAR(f.primitive(2.0) - f.primitive(-2.0), s, 1e-9);
}

TEST(Nemytskii, TableValidation) {
  EXPECT_THROW(NemytskiiSpec::table({{0, 0}}, 1.0), std::invalid_argument);
  EXPECT_THROW(NemytskiiSpec::table({{0, 0}, {0, 1}}, 1.0), std::invalid_argument);
  EXPECT_THROW(NemytskiiSpec::table({{-1, 1}, {1, 2}}, 1.0), std::invalid_argument);
  EXPECT_THROW(NemytskiiSpec::table({{0, 0}, {1, 5}}, 1.0), std::invalid_argument);
}

TEST(Evolution, StepRejectsLargeTau) {
  const Grid g = build_square_grid(4, 1.0);
  const BoundaryData h = make_boundary(g, 1.0);
  EXPECT_THROW(implicit_euler_step(g, h, 2.0, make_boundary(g), NemytskiiSpec::linear(0.5)),
               std::invalid_argument);
  EXPECT_THROW(implicit_euler_step(g, h, 0.0, make_boundary(g), NemytskiiSpec::zero()),
               std::invalid_argument);
}

TEST(Evolution, ConstantStaysConstant) {
  const Grid g = build_disk_grid(12, 1.0);
  const Trajectory t = evolve(g, make_boundary(g, 0.75), 1.0, 0.1, {}, NemytskiiSpec::zero(),
                              tight());
  ASSERT_EQ(t.states.size(), 11u);
  for (const auto& s : t.states) {
    for (double v : s.values) EXPECT_NEAR(v, 0.75, 1e-9);
  }
}

TEST(Evolution, MassIsConservedAndPhiDecreases) {
  const Grid g = build_square_grid(8, 1.0);
  const BoundaryData h0 = random_boundary(g, 8);
  const Trajectory t = evolve(g, h0, 1.0, 0.1, {}, NemytskiiSpec::zero(), tight(1e-6));
  EXPECT_TRUE(t.converged);
  const DiagnosticsReport d = diagnostics_report(t, h0, g);
  EXPECT_TRUE(d.decay_checks_apply);
  EXPECT_LE(d.mass_drift, 1e-5);
  EXPECT_LE(d.phi_increase, 1e-6 * d.phi_scale);
  EXPECT_LE(d.energy_excess, 1e-5 * d.energy_scale);
  EXPECT_LT(d.spread_final, d.spread_initial);
}

TEST(Evolution, SourceSeriesShape) {
  const Grid g = build_square_grid(4, 1.0);
  const BoundaryData h0 = make_boundary(g, 0.0);
  const SourceSeries two{make_boundary(g, 1.0), make_boundary(g, 1.0)};
  EXPECT_THROW(evolve(g, h0, 1.0, 0.25, two, NemytskiiSpec::zero()), std::invalid_argument);
  // A constant source raises a constant state at unit rate.
  const Trajectory t = evolve(g, h0, 1.0, 0.25, {make_boundary(g, 1.0)}, NemytskiiSpec::zero(),
                              tight());
  for (double v : t.states.back().values) EXPECT_NEAR(v, 1.0, 1e-8);
}

TEST(Evolution, OrderedPairsStayOrdered) {
  const Grid g = build_square_grid(6, 1.0);
  const BoundaryData a0 = random_boundary(g, 1);
  BoundaryData b0 = a0;
  for (double& v : b0.values) v += 0.3;
  const NemytskiiSpec f = NemytskiiSpec::linear(0.5);
  const Trajectory a = evolve(g, a0, 1.0, 0.1, {}, f, tight(1e-8));
  const Trajectory b = evolve(g, b0, 1.0, 0.1, {}, f, tight(1e-8));
  const ComparisonReport c = compare_trajectories(g, a, b);
  EXPECT_TRUE(c.ordered);
  EXPECT_LE(c.order_violation, 1e-6);
  for (const auto& q : c.max_excess) {
    for (double v : q) EXPECT_LE(v, 1e-5);
  }
}

TEST(Evolution, ComparisonNeedsMatchingTimes) {
  const Grid g = build_square_grid(4, 1.0);
  const auto h = make_boundary(g, 0.0);
  const Trajectory a = evolve(g, h, 1.0, 0.1, {}, NemytskiiSpec::zero());
  const Trajectory b = evolve(g, h, 1.0, 0.2, {}, NemytskiiSpec::zero());
  EXPECT_THROW(compare_trajectories(g, a, b), std::invalid_argument);
}
