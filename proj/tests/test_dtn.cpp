#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dtn.hpp"

using namespace lsgrad;

namespace {

BoundaryData random_boundary(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  return sample_boundary(g, [&](Vec2) { return U(rng); });
}

SolverOptions tight(double tol = 1e-7) {
  SolverOptions o;
  o.tolerance = tol;
  o.div_tolerance = tol;
  return o;
}

}  // namespace

TEST(Dtn, EvaluateSignData) {
  const Grid g = build_square_grid(16, 1.0);
  const BoundaryData h = sample_boundary(g, [](Vec2 p) { return p.x > 0 ? 1.0 : -1.0; });
  const DtNRecord rec = evaluate(g, h, tight());
  ASSERT_TRUE(rec.converged);
  EXPECT_NEAR(rec.phi, 2.0, 1e-5);
  EXPECT_LE(rec.phi_dual, rec.phi_primal);
  EXPECT_NEAR(rec.flux, 0.0, 1e-5);
  for (double v : rec.g.values) EXPECT_LE(std::abs(v), 1.0);
  EXPECT_NEAR(phi_via_min(g, h, tight()), 2.0, 1e-5);
}

TEST(Dtn, ConstantsAreInTheKernel) {
  const Grid g = build_disk_grid(16, 1.0);
  const DtNRecord rec = evaluate(g, make_boundary(g, 4.0), tight());
  EXPECT_LE(std::abs(rec.phi), 1e-8 * 4.0 * g.perimeter());
  EXPECT_EQ(entropy_ratio(g, rec), 0.0);
}

TEST(Dtn, HomogeneityOfDegreeOne) {
  const Grid g = build_square_grid(8, 1.0);
  const BoundaryData h = random_boundary(g, 3);
  const HomogeneityReport rep = homogeneity_report(g, h, {0.0, 0.5, 3.0}, tight(1e-8));
  ASSERT_EQ(rep.entries.size(), 3u);
  EXPECT_NEAR(rep.entries[0].phi, 0.0, 1e-10);
  for (const auto& e : rep.entries) {
    EXPECT_LE(e.relative_deviation, 1e-5) << e.lambda;
    if (e.lambda > 0) EXPECT_LE(e.cross_gap, e.cross_bound + 1e-12) << e.lambda;
  }
  EXPECT_THROW(homogeneity_report(g, h, {-1.0}), std::invalid_argument);
}

TEST(Dtn, SmoothTruncation) {
  EXPECT_EQ(smooth_truncation(10, 0.0), 0.0);
  EXPECT_EQ(smooth_truncation(10, 5.0), 1.0);
  EXPECT_EQ(smooth_truncation(10, -5.0), -1.0);
  EXPECT_NEAR(smooth_truncation(1, 0.5), (1.5 - 0.125) / 2, 1e-15);
  double prev = -2;
  for (double r = -1.5; r <= 1.5; r += 0.01) {
    const double v = smooth_truncation(3, r);
    EXPECT_GE(v, prev);
    EXPECT_NEAR(v, -smooth_truncation(3, -r), 1e-15);
    prev = v;
  }
}

TEST(Dtn, MonotonicityPairingsAreNonnegative) {
  const Grid g = build_square_grid(8, 1.0);
  const DtNRecord a = evaluate(g, random_boundary(g, 1), tight(1e-8));
  const DtNRecord b = evaluate(g, random_boundary(g, 2), tight(1e-8));
  for (double v : monotonicity_pairing(g, a, b)) EXPECT_GE(v, -1e-6);
}

TEST(Dtn, StabilityProbeIsLipschitz) {
  const Grid g = build_square_grid(8, 1.0);
  const BoundaryData h = random_boundary(g, 5), rho = random_boundary(g, 6);
  std::vector<BoundaryData> seq;
  for (double n : {1.0, 4.0}) {
    BoundaryData x = h;
    for (std::size_t k = 0; k < x.values.size(); ++k) x.values[k] += rho.values[k] / n;
    seq.push_back(x);
  }
  const StabilityReport rep = stability_probe(g, h, seq, {make_boundary(g, 1.0)}, tight());
  ASSERT_EQ(rep.entries.size(), 2u);
  for (const auto& e : rep.entries) {
    EXPECT_LE(e.phi_deviation, e.distance + 1e-5);
    EXPECT_EQ(e.pairing_deviation.size(), 1u);
  }
  EXPECT_GT(rep.entries[0].distance, rep.entries[1].distance);
}
