#include <gtest/gtest.h>

#include <cmath>

#include "rangeshift/grid.hpp"

using namespace rangeshift;

TEST(Grid, SpacingFromBoundsAndCounts) {
  const Grid2D a = build_grid(-1, 1, -1, 1, 9, 9);
  EXPECT_DOUBLE_EQ(a.hx, 0.25);
  EXPECT_DOUBLE_EQ(a.hy, 0.25);
  const Grid2D b = build_grid(0, 10, 0, 5, 101, 51);
  EXPECT_NEAR(b.hx, 0.1, 1e-15);
  EXPECT_NEAR(b.hy, 0.1, 1e-15);
  EXPECT_NEAR(b.x(100), 10.0, 1e-12);
}

TEST(Grid, RejectsInvertedBounds) {
  try {
    build_grid(1, -1, 0, 1, 9, 9);
    FAIL() << "expected a config error";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "grid.xmin");
  }
  EXPECT_THROW(build_grid(0, 1, 2, 1, 9, 9), ConfigError);
  EXPECT_THROW(build_grid(0, 1, 0, 1, 3, 9), ConfigError);
}

TEST(Grid, IndexIsXMajor) {
  const Grid2D g = build_grid(0, 1, 0, 1, 10, 12);
  EXPECT_EQ(g.index(0, 1), 1u);
  EXPECT_EQ(g.index(1, 0), 12u);
  EXPECT_TRUE(g.on_boundary(0, 5));
  EXPECT_TRUE(g.on_boundary(4, 11));
  EXPECT_FALSE(g.on_boundary(4, 5));
}

TEST(InitialField, GaussIsPointSymmetric) {
  const Grid2D g = build_grid(-5, 5, -5, 5, 41, 41);
  const Field2D f = initial_field(g, {BumpKind::Gauss, 0, 0, 1.0, 1.0, {}, {}});
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) EXPECT_EQ(f(i, j), f(g.nx - 1 - i, g.ny - 1 - j));
  EXPECT_DOUBLE_EQ(f(20, 20), 1.0);
  EXPECT_TRUE(f.admissible());
}

TEST(InitialField, CosSquaredHasCompactSupport) {
  const Grid2D g = build_grid(-5, 5, -5, 5, 81, 81);
  const Field2D f = initial_field(g, {BumpKind::CosSquared, 0.3, -0.2, 1.0, 1.0, {}, {}});
  std::size_t positive = 0;
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) {
      const double d = std::hypot(g.x(i) - 0.3, g.y(j) + 0.2);
      if (d > 2.0) EXPECT_EQ(f(i, j), 0.0);
      if (f(i, j) > 0) ++positive;
    }
  EXPECT_GT(positive, 100u);
}

TEST(InitialField, ZeroAmplitudeGivesZeroField) {
  const Grid2D g = build_grid(-5, 5, -5, 5, 21, 21);
  const Field2D f = initial_field(g, {BumpKind::Gauss, 0, 0, 1.0, 0.0, {}, {}});
  for (double v : f.values) EXPECT_EQ(v, 0.0);
}

TEST(InitialField, CentreOutsideInteriorIsAConfigError) {
  const Grid2D g = build_grid(-5, 5, -5, 5, 21, 21);
  try {
    initial_field(g, {BumpKind::Gauss, 7, 0, 1.0, 1.0, {}, {}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "initial.x0");
  }
}

TEST(Envelope, ResolvedConstantsDominateTheDatum) {
  const Grid2D g = build_grid(-10, 10, -10, 10, 81, 81);
  const InitialSpec s = resolve_envelope(g, {BumpKind::Gauss, 1, 1, 1.0, 0.2, {}, {}},
                                         {TailEnvelope::Kind::Radial, 1.0});
  ASSERT_TRUE(s.C0 && s.mu0);
  const Field2D f = initial_field(g, s);
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j)
      EXPECT_LE(f(i, j), *s.C0 * std::exp(-*s.mu0 * (std::abs(g.x(i)) + std::abs(g.y(j)))) * (1 + 1e-12));
  const Field2D n0 = initial_field(g, {BumpKind::Gauss, 1, 1, 1.0, 0.2, {}, {}});
  for (double mu : {0.1, 0.3, 0.7, 1.5})
    EXPECT_LE(2.0 * *s.C0 / *s.mu0,
              2.0 * envelope_constant(n0, {TailEnvelope::Kind::Radial, 1.0}, mu) / mu * (1 + 1e-12));
}

TEST(Envelope, DeclaredConstantTooSmallIsRejected) {
  const Grid2D g = build_grid(-10, 10, -10, 10, 81, 81);
  InitialSpec s{BumpKind::Gauss, 0, 0, 1.0, 1.0, 0.5, 1.0};
  EXPECT_THROW(resolve_envelope(g, s, {}), ConfigError);
}

TEST(TotalMass, TrapezoidOfGaussian) {
  const Grid2D g = build_grid(-10, 10, -10, 10, 201, 201);
  const Field2D f = initial_field(g, {BumpKind::Gauss, 0, 0, 1.0, 1.0, {}, {}});
  EXPECT_NEAR(total_mass(f), 2.0 * std::acos(-1.0), 1e-9);
}
