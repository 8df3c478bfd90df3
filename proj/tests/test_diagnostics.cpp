#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rangeshift/diagnostics.hpp"

using namespace rangeshift;

namespace {

Trajectory synthetic(std::size_t n, double dt) {
  Trajectory tr;
  tr.grid = build_grid(-10, 10, -10, 10, 21, 21);
  for (std::size_t k = 0; k < n; ++k) {
    tr.times.push_back(dt * double(k));
    tr.total_mass.push_back(1);
    tr.sup_col_mass.push_back(1);
    tr.front_minus.push_back(-1.0);
    tr.front_plus.push_back(1.0);
    tr.mass_at_origin.push_back(0.5);
    tr.mass_at_lag.push_back(0.5);
    tr.harnack_ratio.push_back(std::nullopt);
    tr.mass_leak_accum.push_back(0);
  }
  return tr;
}

}  // namespace

TEST(ColumnMass, ZeroConstantAndGaussian) {
  const Grid2D g = build_grid(-1, 1, -20, 20, 8, 801);
  Field2D f(g);
  for (double v : column_mass(f)) EXPECT_EQ(v, 0.0);
  for (std::size_t j = 1; j + 1 < g.ny; ++j) f(2, j) = 1.0;
  EXPECT_NEAR(column_mass(f)[2], 40.0, 2 * g.hy);
  const double sigma = 4 * g.hy, amp = 1.7;
  for (std::size_t j = 0; j < g.ny; ++j) f(3, j) = amp * std::exp(-g.y(j) * g.y(j) / (2 * sigma * sigma));
  EXPECT_NEAR(column_mass(f)[3], amp * sigma * std::sqrt(2 * std::numbers::pi), 1e-6);
  const auto M = row_mass(f);
  EXPECT_NEAR(M[400], (1.0 + amp) * g.hx, 1e-12);
}

TEST(MassBound, Formula) {
  ModelParams p;
  InitialSpec s;
  s.C0 = 1.0;
  s.mu0 = 1.0;
  EXPECT_DOUBLE_EQ(mass_bound(p, s), 2.0);
  p.kernel = ConstantKernel{0.1};
  s.C0 = 0.5;
  EXPECT_DOUBLE_EQ(mass_bound(p, s), 10.0);
  EXPECT_THROW(mass_bound(p, InitialSpec{}), ConfigError);
}

TEST(Fronts, AbsentPlateauAndTranslation) {
  std::vector<double> N(101, 0.0);
  EXPECT_FALSE(front_positions(N, 0.0, 0.1, 0.5).plus);
  EXPECT_FALSE(front_positions(N, 0.0, 0.1, 0.5).minus);
  for (std::size_t i = 30; i <= 60; ++i) N[i] = 1.0;
  const Fronts f = front_positions(N, 0.0, 0.1, 0.5);
  EXPECT_NEAR(*f.minus, 3.0, 0.1);
  EXPECT_NEAR(*f.plus, 6.0, 0.1);
  // Shifting a smooth profile by k nodes shifts both fronts by k*h.
  std::vector<double> prev;
  double last_plus = 0;
  for (int k = 0; k < 5; ++k) {
    std::vector<double> S(101);
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double x = 0.1 * double(i) - 0.3 * k;
      S[i] = 1.0 / (1.0 + std::exp(4 * (x - 5))) * 1.0 / (1.0 + std::exp(-4 * (x - 2)));
    }
    const Fronts fr = front_positions(S, 0.0, 0.1, 0.1);
    if (k > 0) EXPECT_NEAR(*fr.plus - last_plus, 0.3, 1e-3);
    last_plus = *fr.plus;
  }
}

TEST(FitSpeed, SyntheticAndGuards) {
  std::mt19937 rng(11);
  std::normal_distribution<double> noise(0.0, 1e-3);
  std::vector<double> t, x, flat;
  for (int k = 0; k <= 100; ++k) {
    t.push_back(0.5 * k);
    x.push_back(0.97 * t.back() + noise(rng));
    flat.push_back(3.0);
  }
  EXPECT_NEAR(fit_speed(t, x).slope, 0.97, 1e-2);
  EXPECT_NEAR(fit_speed(t, flat).slope, 0.0, 1e-15);
  EXPECT_THROW(fit_speed({1, 2}, {1, 2}), DiagnosticError);
}

TEST(FitAsymptoticSpeed, RemovesLogarithmicDelay) {
  std::vector<double> t, x;
  for (int k = 20; k <= 120; ++k) {
    t.push_back(0.5 * k);
    x.push_back(3.0 + 0.7 * t.back() - 1.5 * std::log(t.back()));
  }
  const FitResult f = fit_asymptotic_speed(t, x, 1.0);
  EXPECT_NEAR(f.slope, 0.7, 1e-9);
  EXPECT_NEAR(f.intercept, 3.0, 1e-7);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_LT(fit_speed(t, x, 1.0).slope, 0.69);
}

TEST(DecayRate, SyntheticAndGuards) {
  std::vector<double> t, v, flat;
  for (int k = 0; k <= 60; ++k) {
    t.push_back(k);
    v.push_back(std::exp(-0.3 * k));
    flat.push_back(2.0);
  }
  EXPECT_NEAR(decay_rate(t, v).slope, -0.3, 1e-3);
  EXPECT_NEAR(decay_rate(t, flat).slope, 0.0, 1e-15);
  v.back() = 0.0;
  EXPECT_THROW(decay_rate(t, v), DiagnosticError);
}

TEST(TailSlope, ExponentialGaussianAndFlat) {
  ModelParams p;
  p.B = 1.0;
  const Grid2D g = build_grid(-10, 10, -40, 40, 41, 401);
  Field2D f(g);
  for (std::size_t i = 1; i + 1 < g.nx; ++i)
    for (std::size_t j = 1; j + 1 < g.ny; ++j) f(i, j) = std::exp(-0.7 * std::abs(g.y(j) - g.x(i)));
  const TailFit t = tail_slope(f, p, TailDirection::TraitDistance, 20);
  EXPECT_NEAR(t.fit.slope, -0.7, 0.035);
  EXPECT_GE(t.decades, 3.0);
  EXPECT_FALSE(t.nonlinear);

  Field2D gauss(g);
  for (std::size_t i = 1; i + 1 < g.nx; ++i)
    for (std::size_t j = 1; j + 1 < g.ny; ++j) gauss(i, j) = std::exp(-0.05 * std::pow(g.y(j) - g.x(i), 2));
  EXPECT_TRUE(tail_slope(gauss, p, TailDirection::TraitDistance, 20).nonlinear);

  Field2D flat(g);
  for (std::size_t i = 1; i + 1 < g.nx; ++i)
    for (std::size_t j = 1; j + 1 < g.ny; ++j) flat(i, j) = 1.0;
  EXPECT_THROW(tail_slope(flat, p, TailDirection::TraitDistance, 20), DiagnosticError);
}

TEST(TailSlope, SpaceDirection) {
  ModelParams p;
  p.B = 0.5;
  const Grid2D g = build_grid(-10, 40, -10, 25, 201, 141);
  Field2D f(g);
  for (std::size_t i = 1; i + 1 < g.nx; ++i)
    for (std::size_t j = 1; j + 1 < g.ny; ++j)
      f(i, j) = std::exp(-0.4 * std::max(g.x(i), 0.0) - std::pow(g.y(j) - 0.5 * g.x(i), 2));
  EXPECT_NEAR(tail_slope(f, p, TailDirection::SpaceRight).fit.slope, -0.4, 0.02);
}

TEST(Harnack, ConstantAndExponential) {
  const Grid2D g = build_grid(-4, 4, -4, 4, 81, 81);
  Field2D c(g);
  for (double& v : c.values) v = 3.0;
  EXPECT_LT(harnack_ratio(c, 0, 0, 1, 0.1), 1.0);
  Field2D e(g);
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) e(i, j) = std::exp(-std::abs(g.y(j)));
  EXPECT_NEAR(harnack_ratio(e, 0, 0, 1, 0), std::exp(1.0), 1e-12);
  EXPECT_THROW(harnack_ratio(e, 3.5, 0, 1, 0), DiagnosticError);
}

TEST(Profile, SampleAndMedian) {
  const std::vector<double> N{0, 1, 2, 1, 0};
  EXPECT_DOUBLE_EQ(sample_profile(N, 0, 1, 1.5), 1.5);
  EXPECT_DOUBLE_EQ(sample_profile(N, 0, 1, -1), 0.0);
  EXPECT_NEAR(*profile_median(N, 0, 1), 2.0, 1e-12);
  EXPECT_FALSE(profile_median({0, 0, 0}, 0, 1));
}

TEST(Classify, ExtinctionFromExponentialDecay) {
  Trajectory tr = synthetic(81, 1.0);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    tr.sup_col_mass[k] = std::exp(-0.3 * tr.times[k]);
    tr.mass_at_origin[k] = tr.sup_col_mass[k];
  }
  const Classification c = classify_outcome(tr, Case::Confined, {});
  EXPECT_EQ(c.regime, Regime::Extinction);
  ASSERT_TRUE(c.decay);
  EXPECT_NEAR(c.decay->slope, -0.3, 1e-9);
}

TEST(Classify, FollowingFromConstantOriginMass) {
  const Trajectory tr = synthetic(81, 1.0);
  EXPECT_EQ(classify_outcome(tr, Case::Confined, {}).regime, Regime::SurvivalFollowing);
  EXPECT_EQ(classify_outcome(tr, Case::Mixed, {}).regime, Regime::SurvivalFollowing);
}

TEST(Classify, GrowingRangeAndLagging) {
  Trajectory tr = synthetic(81, 1.0);
  for (std::size_t k = 0; k < tr.size(); ++k) tr.front_minus[k] = -0.4 * tr.times[k];
  EXPECT_EQ(classify_outcome(tr, Case::Mixed, {}).regime, Regime::ExpandingRange);
  EXPECT_EQ(classify_outcome(tr, Case::Unconfined, {}).regime, Regime::UnconfinedInvasion);
  for (std::size_t k = 0; k < tr.size(); ++k) tr.mass_at_origin[k] = 0.5 * std::exp(-0.2 * tr.times[k]);
  EXPECT_EQ(classify_outcome(tr, Case::Mixed, {}).regime, Regime::SurvivalLagging);
  EXPECT_EQ(classify_outcome(tr, Case::Unconfined, {}).regime, Regime::EvolutionRescue);
}

TEST(Classify, ShortOrAmbiguousIsIndeterminate) {
  EXPECT_EQ(classify_outcome(synthetic(1, 1.0), Case::Confined, {}).regime, Regime::Indeterminate);
  Trajectory tr = synthetic(81, 1.0);
  for (std::size_t k = 0; k < tr.size(); ++k) tr.mass_at_origin[k] = 1e-5;
  const Classification c = classify_outcome(tr, Case::Confined, {});
  EXPECT_EQ(c.regime, Regime::Indeterminate);
  EXPECT_FALSE(c.evidence.empty());
}
