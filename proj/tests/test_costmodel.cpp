#include <gtest/gtest.h>

#include <optional>

#include "earlywarn/costmodel.hpp"

namespace ew = earlywarn;

namespace {

ew::CostParameters params(double lambda, double kappa, double alpha_min) {
  ew::CostParameters p;
  p.lambda = lambda;
  p.kappa = kappa;
  p.alpha_min = alpha_min;
  return p;
}

}  // namespace

TEST(AlphaAt, Examples) {
  EXPECT_EQ(ew::alpha_at(1, 10, params(0, 0, 0.0)), 1.0);
  EXPECT_EQ(ew::alpha_at(10, 10, params(0, 0, 0.25)), 0.25);
  for (int l = 1; l <= 12; ++l) {
    for (int j = 1; j <= l; ++j) EXPECT_EQ(ew::alpha_at(j, l, params(0, 0, 1.0)), 1.0);
  }
  EXPECT_EQ(ew::alpha_at(1, 1, params(0, 0, 0.0)), 1.0);
  EXPECT_DOUBLE_EQ(ew::alpha_at(2, 3, params(0, 0, 0.0)), 0.5);
}

TEST(AlphaAt, EndpointsAndRangeErrors) {
  for (int l = 2; l <= 30; ++l) {
    EXPECT_EQ(ew::alpha_at(1, l, params(0, 0, 0.3)), 1.0);
    EXPECT_DOUBLE_EQ(ew::alpha_at(l, l, params(0, 0, 0.3)), 0.3);
  }
  EXPECT_THROW(ew::alpha_at(0, 3, params(0, 0, 0.3)), ew::DomainError);
  EXPECT_THROW(ew::alpha_at(4, 3, params(0, 0, 0.3)), ew::DomainError);
}

TEST(ExpectedCost, Examples) {
  EXPECT_EQ(ew::expected_cost(true, 1, 7, params(0.25, 0.0, 0.0)), 25.0);
  EXPECT_EQ(ew::expected_cost(false, std::nullopt, 7, params(0.25, 0.5, 0.0)), 0.0);
  EXPECT_EQ(ew::expected_cost(true, std::nullopt, 7, params(0.25, 0.5, 0.0)), 100.0);
  EXPECT_EQ(ew::expected_cost(false, 3, 7, params(0.25, 0.5, 1.0)), 75.0);
}

TEST(ExpectedCost, LateAlarmOnDeviation) {
  // alpha(3, 5) with alpha_min 0 is 0.5: half the penalty remains.
  EXPECT_DOUBLE_EQ(ew::expected_cost(true, 3, 5, params(0.1, 0.2, 0.0)), 10.0 + 50.0);
  EXPECT_DOUBLE_EQ(ew::expected_cost(false, 3, 5, params(0.1, 0.2, 0.0)), 10.0 + 0.5 * 20.0);
  EXPECT_THROW(ew::expected_cost(true, 6, 5, params(0.1, 0.2, 0.0)), ew::DomainError);
}

TEST(ExpectedCost, MonotoneAndBoundedForDeviations) {
  ew::Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = params(ew::uniform01(rng), ew::uniform01(rng), ew::uniform01(rng));
    const int l = ew::uniform_int(rng, 1, 40);
    double previous = -1.0;
    for (int j = 1; j <= l; ++j) {
      const double c = ew::expected_cost(true, j, l, p);
      EXPECT_GE(c, previous);
      EXPECT_GE(c, p.adaptation_cost());
      EXPECT_LE(c, p.adaptation_cost() + p.penalty);
      previous = c;
    }
  }
}

TEST(ExpectedCost, FalseAlarmCostsOnlyAdaptationWithoutCompensation) {
  for (int l = 1; l <= 10; ++l) {
    for (int j = 1; j <= l; ++j) EXPECT_EQ(ew::expected_cost(false, j, l, params(0.4, 0.0, 1.0)), 40.0);
  }
}

TEST(ExpectedCost, PenaltyScales) {
  auto p = params(0.25, 0.5, 1.0);
  p.penalty = 10.0;
  EXPECT_EQ(ew::expected_cost(false, 1, 3, p), 7.5);
  EXPECT_EQ(ew::expected_cost(true, std::nullopt, 3, p), 10.0);
}

TEST(CostParameters, Validation) {
  EXPECT_NO_THROW(ew::validate(params(0, 1, 0.5)));
  EXPECT_THROW(ew::validate(params(-0.1, 0, 1)), ew::ConfigError);
  EXPECT_THROW(ew::validate(params(0, 1.1, 1)), ew::ConfigError);
  EXPECT_THROW(ew::validate(params(0, 0, 2)), ew::ConfigError);
  auto p = params(0, 0, 1);
  p.penalty = 0.0;
  EXPECT_THROW(ew::validate(p), ew::ConfigError);
}

TEST(SampleEnvelope, ZeroWidthIsIdentity) {
  ew::Rng rng(1);
  const auto p = params(0.25, 0.75, 0.5);
  EXPECT_EQ(ew::sample_envelope(p, {0.0}, rng), p);
}

TEST(SampleEnvelope, StaysInsideClampedEnvelope) {
  ew::Rng rng(2);
  const auto p = params(0.25, 0.0, 1.0);
  bool lambda_moved = false;
  for (int k = 0; k < 2000; ++k) {
    const auto s = ew::sample_envelope(p, {0.1}, rng);
    EXPECT_GE(s.lambda, 0.15);
    EXPECT_LE(s.lambda, 0.35);
    EXPECT_GE(s.kappa, 0.0);
    EXPECT_LE(s.kappa, 0.1);
    EXPECT_GE(s.alpha_min, 0.9);
    EXPECT_LE(s.alpha_min, 1.0);
    EXPECT_EQ(s.penalty, p.penalty);
    EXPECT_EQ(s.alpha_max, 1.0);
    lambda_moved = lambda_moved || s.lambda != p.lambda;
  }
  EXPECT_TRUE(lambda_moved);
}

TEST(SampleEnvelope, DeterministicForSeed) {
  ew::Rng a(77);
  ew::Rng b(77);
  const auto p = params(0.5, 0.5, 0.5);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(ew::sample_envelope(p, {0.2}, a), ew::sample_envelope(p, {0.2}, b));
  EXPECT_THROW(ew::sample_envelope(p, {-0.1}, a), ew::ConfigError);
}
