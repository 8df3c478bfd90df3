#include <gtest/gtest.h>

#include <cmath>

#include "rangeshift/growth.hpp"

using namespace rangeshift;

namespace {

ModelParams make(Case k, double A, double B, double eps, double Bprime = 1.0) {
  ModelParams p;
  p.model_case = k;
  p.A = A;
  p.B = B;
  p.Bprime = Bprime;
  p.epsilon = eps;
  return p;
}

}  // namespace

TEST(Growth, ConfinedValues) {
  const ModelParams p = make(Case::Confined, 1, 1, 0.1);
  EXPECT_DOUBLE_EQ(eval_growth(p, 0, 0), 1.0);
  EXPECT_NEAR(eval_growth(p, 1, 1), 0.9, 1e-15);
  EXPECT_NEAR(eval_growth(p, 0, 1), 0.0, 1e-15);
}

TEST(Growth, MixedUsesSlopeByHalfPlane) {
  const ModelParams p = make(Case::Mixed, 1, 1, 0.1, 2.0);
  EXPECT_NEAR(eval_growth(p, 1, 2), 0.9, 1e-15);
  EXPECT_NEAR(eval_growth(p, -1, -1), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(optimal_trait(p, -2), -2.0);
  EXPECT_DOUBLE_EQ(optimal_trait(p, 2), 4.0);
}

TEST(Growth, UnconfinedIsInvariantAlongTheOptimalLine) {
  const ModelParams p = make(Case::Unconfined, 0.25, 1.5, 0);
  for (double s : {-30.0, -1.0, 0.0, 2.5, 40.0})
    EXPECT_NEAR(eval_growth(p, 0.3 + s, -0.7 + 1.5 * s), eval_growth(p, 0.3, -0.7), 1e-12);
}

TEST(Clamp, Cases) {
  EXPECT_EQ(clamp_growth(-100, 50), -50);
  EXPECT_EQ(clamp_growth(0.5, 50), 0.5);
  EXPECT_EQ(clamp_growth(-50, 50), -50);
  const GrowthFn r = GrowthFn::clamped(make(Case::Confined, 1, 1, 0.1));
  EXPECT_EQ(r(100, -100), -50.0);
}

TEST(Kernel, ConstantAndGaussian) {
  EXPECT_EQ(eval_kernel(ConstantKernel{1.0}, 3.0, -7.0), 1.0);
  const KernelSpec g = GaussianKernel{1.0, 1.0, 0.1};
  EXPECT_NEAR(eval_kernel(g, 0.4, 0.4), 1.1, 1e-15);
  EXPECT_NEAR(eval_kernel(g, 0.0, 12.0), 0.1, 1e-12);
  EXPECT_NEAR(eval_kernel(g, -20.0, 5.0), 0.1, 1e-12);
  EXPECT_DOUBLE_EQ(k_minus(g), 0.1);
  EXPECT_DOUBLE_EQ(k_plus(g), 1.1);
}

TEST(Validate, NamesTheOffendingKey) {
  try {
    validate(make(Case::Unconfined, 0.25, 1, 0.01));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "model.epsilon");
  }
  EXPECT_THROW(validate(make(Case::Confined, 0.25, 1, 0)), ConfigError);
  EXPECT_THROW(validate(make(Case::Confined, -1, 1, 0.1)), ConfigError);
  ModelParams p = make(Case::Confined, 0.25, 1, 0.1);
  p.kernel = GaussianKernel{1.0, 1.0, 0.0};
  EXPECT_THROW(validate(p), ConfigError);
  EXPECT_NO_THROW(validate(make(Case::Mixed, 0.25, 1, 0.1, 0.5)));
}

TEST(GrowthFn, UnconfinedPartDropsConfinement) {
  const GrowthFn r(make(Case::Mixed, 0.25, 1.5, 0.1, 0.5), 50.0);
  const GrowthFn u = r.unconfined_part();
  EXPECT_EQ(u.params().model_case, Case::Unconfined);
  EXPECT_EQ(u.params().epsilon, 0.0);
  EXPECT_EQ(u(-2, -3), r(-2, -3));
  EXPECT_NEAR(u(4, 6), 1.0, 1e-15);
}
