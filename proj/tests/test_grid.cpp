#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "grid.hpp"

using namespace lsgrad;

namespace {

BulkField random_bulk(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  return sample_bulk(g, [&](Vec2) { return U(rng); });
}

DualField random_dual(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  DualField z = make_dual(g);
  for (double& v : z.interior) v = U(rng);
  for (double& v : z.boundary) v = U(rng);
  return z;
}

}  // namespace

TEST(Grid, SquareCounts) {
  const Grid g = build_square_grid(4, 2.0);
  EXPECT_EQ(g.num_cells(), 16u);
  EXPECT_EQ(g.num_faces(), 24u);
  EXPECT_EQ(g.num_boundary(), 16u);
  EXPECT_NEAR(g.area(), 4.0, 1e-14);
  EXPECT_NEAR(g.perimeter(), 8.0, 1e-14);
}

TEST(Grid, DiskStaircasePerimeter) {
  // The staircase boundary of a digital disk has the perimeter of the
  // bounding square.
  for (int n : {8, 16, 33, 64}) {
    const Grid g = build_disk_grid(n, 1.0);
    EXPECT_NEAR(g.perimeter(), 8.0, 1e-12) << n;
    EXPECT_NEAR(g.area(), M_PI, 8.0 / n) << n;
  }
}

TEST(Grid, RejectsBadSizes) {
  EXPECT_THROW(build_square_grid(1, 1.0), std::invalid_argument);
  EXPECT_THROW(build_square_grid(4, -1.0), std::invalid_argument);
  EXPECT_THROW(build_disk_grid(4, 1.0), std::invalid_argument);
  EXPECT_THROW(grid_kind_from_string("torus"), std::invalid_argument);
}

TEST(Grid, SummationByParts) {
  for (const Grid& g : {build_square_grid(7, 1.3), build_disk_grid(20, 1.0)}) {
    const BulkField u = random_bulk(g, 1);
    const DualField z = random_dual(g, 2);
    const double lhs = inner_cells(g, u, divergence(g, z)) + inner_faces(g, gradient(g, u), z);
    const double rhs = inner_boundary(g, trace(g, u), conormal(g, z));
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1 + std::abs(rhs)));
  }
}

TEST(Grid, GradientOfConstantVanishes) {
  const Grid g = build_disk_grid(16, 1.0);
  const DualField d = gradient(g, make_bulk(g, 3.0));
  for (double v : d.interior) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(tv(g, make_bulk(g, 3.0)), 0.0);
}

TEST(Grid, TotalVariationOfHalfPlane) {
  // A step across x = 1/2 has variation equal to the length of the cut.
  const Grid g = build_square_grid(10, 1.0);
  const BulkField u = sample_bulk(g, [](Vec2 p) { return p.x > 0.5 ? 1.0 : 0.0; });
  EXPECT_NEAR(tv(g, u), 1.0, 1e-12);
  EXPECT_NEAR(tv_anisotropic(g, u), 1.0, 1e-12);
}

TEST(Grid, DiagonalStepIsotropicBelowAnisotropic) {
  const Grid g = build_square_grid(16, 1.0);
  // Staircase above the anti-diagonal: one jump in each of 15 rows and columns.
  const BulkField u = sample_bulk(g, [](Vec2 p) { return p.x + p.y > 1.02 ? 1.0 : 0.0; });
  EXPECT_LT(tv(g, u), tv_anisotropic(g, u));
  EXPECT_NEAR(tv_anisotropic(g, u), 2.0 * 15.0 / 16.0, 1e-12);
}

TEST(Grid, LinearTotalVariationIsExact) {
  const Grid g = build_square_grid(8, 1.0);
  const BulkField u = sample_bulk(g, [](Vec2 p) { return 3 * p.x - 4 * p.y; });
  const double interior = 1.0 - 1.0 / 8;  // faces only span cell centers
  EXPECT_GT(tv(g, u), 0.0);
  EXPECT_LE(tv(g, u), 5.0 + 1e-12);
  EXPECT_NEAR(tv_anisotropic(g, u), 7.0 * interior, 1e-12);
}

TEST(Grid, BoundaryNorms) {
  const Grid g = build_square_grid(6, 1.0);
  const BoundaryData b = sample_boundary(g, [](Vec2 p) { return p.x > 0.5 ? 2.0 : -1.0; });
  EXPECT_NEAR(boundary_integral(g, b), 2.0 * 2.0 - 2.0, 1e-12);
  EXPECT_NEAR(boundary_mean(g, b), 0.5, 1e-12);
  EXPECT_NEAR(boundary_norm(g, b, 1.0), 6.0, 1e-12);
  EXPECT_NEAR(boundary_norm(g, b, 2.0), std::sqrt(10.0), 1e-12);
  EXPECT_EQ(boundary_norm(g, b, INFINITY), 2.0);
}

TEST(Grid, ShapeChecks) {
  const Grid g = build_square_grid(4, 1.0);
  EXPECT_THROW(check_shape(g, BulkField{{1.0}}), std::invalid_argument);
  EXPECT_THROW(check_shape(g, BoundaryData{{1.0}}), std::invalid_argument);
  EXPECT_THROW(check_shape(g, DualField{}), std::invalid_argument);
  EXPECT_NO_THROW(check_shape(g, make_dual(g)));
}

TEST(Grid, DualSupNormUsesGroups) {
  const Grid g = build_square_grid(4, 1.0);
  DualField z = make_dual(g);
  const FaceGroup& grp = g.groups().front();
  for (int e : grp.faces) {
    if (e >= 0) z.interior[e] = 0.6;
  }
  EXPECT_NEAR(dual_sup_norm(g, z), grp.size() == 2 ? std::sqrt(0.72) : 0.6, 1e-12);
}
