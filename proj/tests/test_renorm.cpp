#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fgsgd/error.hpp"
#include "fgsgd/renorm.hpp"

namespace {

using fgsgd::LayerGeometry;
using fgsgd::ManifoldKind;
using fgsgd::ManifoldSpec;
using fgsgd::ScaleState;

TEST(Gamma, Examples) {
  EXPECT_NEAR(fgsgd::gamma({36, 384}), 0.048795, 1e-6);
  EXPECT_DOUBLE_EQ(fgsgd::gamma({36, 384}), std::sqrt(1.0 / 420.0));
  EXPECT_DOUBLE_EQ(fgsgd::gamma({1, 1}), 1.0 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(fgsgd::gamma({3, 1}), 0.5);
  EXPECT_THROW(fgsgd::gamma({0, 1}), fgsgd::ValueError);
}

TEST(GammaCondition, Examples) {
  EXPECT_TRUE(fgsgd::check_gamma_condition({36, 384}, 3));
  EXPECT_TRUE(fgsgd::check_gamma_condition({1, 1}, 2));
  EXPECT_FALSE(fgsgd::check_gamma_condition({1, 1}, 3));
}

TEST(UpdateLambda, ConstantBatchKeepsFloor) {
  const ScaleState s = fgsgd::update_lambda(ScaleState::make(0.5), std::vector<double>(8, 3.0));
  EXPECT_EQ(s.lambda, 1.0);
  EXPECT_EQ(s.re, 0.5);
}

TEST(UpdateLambda, MovingAverage) {
  // Population std of {-1, 3} is 2.
  const ScaleState s = fgsgd::update_lambda(ScaleState::make(0.5), std::vector<double>{-1.0, 3.0});
  EXPECT_DOUBLE_EQ(s.lambda, 1.1);
  EXPECT_DOUBLE_EQ(s.re, 0.5 / 1.1);
}

TEST(UpdateLambda, FixedPoint) {
  ScaleState s = ScaleState::make(0.5);
  s.lambda = 1.1;
  s.re = 0.5 / 1.1;
  const ScaleState t = fgsgd::update_lambda_with_std(s, 1.1);
  EXPECT_NEAR(t.lambda, 1.1, 1e-15);
}

TEST(UpdateLambda, EmptyBatchIsNoOp) {
  const ScaleState s = ScaleState::make(0.3);
  const ScaleState t = fgsgd::update_lambda(s, std::vector<double>{});
  EXPECT_EQ(t.lambda, s.lambda);
  EXPECT_EQ(t.re, s.re);
}

TEST(UpdateLambda, InvariantsHoldAlongAStream) {
  ScaleState s = ScaleState::make(fgsgd::gamma({27, 64}));
  for (int i = 0; i < 200; ++i) {
    s = fgsgd::update_lambda_with_std(s, 0.2 + 0.05 * (i % 60));
    EXPECT_GE(s.lambda, 1.0);
    EXPECT_DOUBLE_EQ(s.re, s.gamma / s.lambda);
    EXPECT_LE(s.re, s.gamma);
  }
}

TEST(PopulationStd, MatchesTwoPassOracle) {
  const std::vector<double> v{0.5, -1.25, 3.0, 2.0, 7.5, -0.25};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  EXPECT_NEAR(fgsgd::population_std(v), std::sqrt(ss / double(v.size())), 1e-14);
}

TEST(RescaleSpecs, UnchangedScaleLeavesPoints) {
  fgsgd::ProductPoint p;
  p.specs = {ManifoldSpec::make(ManifoldKind::stiefel, 4, 2, 0.5)};
  p.parts = {fgsgd::random_point(p.specs[0], 1)};
  ScaleState s = ScaleState::make(0.5);
  const auto q = fgsgd::rescale_specs(p, std::vector<ScaleState>{s});
  EXPECT_EQ(q.parts[0], p.parts[0]);
}

TEST(RescaleSpecs, SphereToQuarterAndEuclideanUntouched) {
  fgsgd::ProductPoint p;
  p.specs = {ManifoldSpec::make(ManifoldKind::sphere, 3, 2, 1.0),
             ManifoldSpec::make(ManifoldKind::euclidean, 3, 2, 1.0),
             ManifoldSpec::make(ManifoldKind::oblique, 3, 2, 1.0),
             ManifoldSpec::make(ManifoldKind::stiefel, 3, 2, 1.0)};
  for (std::size_t i = 0; i < p.specs.size(); ++i) p.parts.push_back(fgsgd::random_point(p.specs[i], i));
  ScaleState s = ScaleState::make(0.5);
  s.lambda = 2.0;
  s.re = 0.25;
  const auto q = fgsgd::rescale_specs(p, std::vector<ScaleState>(4, s));
  EXPECT_NEAR(q.parts[0].squared_norm(), 0.25, 1e-12);
  EXPECT_EQ(q.parts[1], p.parts[1]);
  EXPECT_EQ(q.specs[1], p.specs[1]);
  for (std::size_t i : {0u, 2u, 3u}) {
    EXPECT_EQ(q.specs[i].scale, 0.25);
    EXPECT_LE(fgsgd::check_constraint(q.specs[i], q.parts[i]), 1e-12);
  }
}

TEST(RescaleSpecs, CountMismatch) {
  fgsgd::ProductPoint p;
  p.specs = {ManifoldSpec::make(ManifoldKind::sphere, 3, 1)};
  p.parts = {fgsgd::random_point(p.specs[0], 1)};
  EXPECT_THROW(fgsgd::rescale_specs(p, std::vector<ScaleState>{}), fgsgd::ShapeError);
}

}  // namespace
