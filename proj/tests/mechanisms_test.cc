// Copyright 2026 The LPPM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lppm/mechanisms.h"

#include <cmath>

#include "gtest/gtest.h"
#include "lppm/metrics.h"
#include "lppm/remap.h"
#include "oracles.h"

namespace lppm {
namespace {

using ::lppm::testing::Unwrap;

const DistanceFn kEuclid = DistanceFn::Euclidean();

Prior UniformOn(std::vector<PlanePoint> pts) {
  return Prior::Uniform(Unwrap(PoiSet::Create(std::move(pts))));
}

// Exhaustive check of f[z|x] <= exp(eps d(x, x')) f[z|x'] over all triples.
bool SatisfiesGeoInd(const DiscreteMechanism& m, double eps) {
  const PoiSet& in = m.inputs();
  for (int x = 0; x < m.num_inputs(); ++x) {
    for (int xp = 0; xp < m.num_inputs(); ++xp) {
      const double bound = std::exp(eps * EuclideanKm(in.point(x), in.point(xp)));
      for (int z = 0; z < m.num_outputs(); ++z) {
        if (m(x, z) > bound * m(xp, z) * (1 + 1e-9) + 1e-300) return false;
      }
    }
  }
  return true;
}

TEST(OptimalConstantOutputTest, Examples) {
  const ConstantOutput square = Unwrap(
      OptimalConstantOutput(UniformOn({{0, 0}, {2, 0}, {0, 2}, {2, 2}}), kEuclid));
  EXPECT_NEAR(square.z_star.point.x_km, 1.0, 1e-6);
  EXPECT_NEAR(square.z_star.point.y_km, 1.0, 1e-6);

  const auto inst = testing::MakeRandomInstance(7, 3);
  const Prior prior = testing::MakePrior(inst);
  const ConstantOutput mean =
      Unwrap(OptimalConstantOutput(prior, DistanceFn::SquaredEuclidean()));
  double mx = 0, my = 0;
  for (int i = 0; i < 7; ++i) {
    mx += prior[i] * inst.points[i].x_km;
    my += prior[i] * inst.points[i].y_km;
  }
  EXPECT_NEAR(mean.z_star.point.x_km, mx, 1e-14);
  EXPECT_NEAR(mean.z_star.point.y_km, my, 1e-14);

  const ConstantOutput line =
      Unwrap(OptimalConstantOutput(UniformOn({{0, 0}, {1, 0}, {2, 0}}), kEuclid));
  EXPECT_EQ(line.z_star.point, (PlanePoint{1, 0}));
  EXPECT_NEAR(line.q_star, 2.0 / 3.0, 1e-12);
}

TEST(CoinTest, EndpointsAndMidpoint) {
  const auto inst = testing::MakeRandomInstance(9, 8);
  const Prior prior = testing::MakePrior(inst);
  const ConstantOutput c = Unwrap(OptimalConstantOutput(prior, kEuclid));

  const DiscreteMechanism id = Unwrap(BuildCoin(prior, kEuclid, 0.0));
  EXPECT_EQ(Unwrap(MakeCoinParams(prior, kEuclid, 0.0)).alpha, 1.0);
  for (int x = 0; x < 9; ++x) {
    for (int z = 0; z < id.num_outputs(); ++z) {
      EXPECT_EQ(id(x, z), id.outputs()[z].id == x ? 1.0 : 0.0);
    }
  }

  const DiscreteMechanism constant = Unwrap(BuildCoin(prior, kEuclid, c.q_star));
  EXPECT_EQ(Unwrap(MakeCoinParams(prior, kEuclid, c.q_star)).alpha, 0.0);
  for (int z = 0; z < constant.num_outputs(); ++z) {
    const bool at_z_star = constant.outputs()[z].point == c.z_star.point;
    for (int x = 0; x < 9; ++x) EXPECT_EQ(constant(x, z), at_z_star ? 1.0 : 0.0);
  }

  const double q = c.q_star / 2;
  const CoinParams half = Unwrap(MakeCoinParams(prior, kEuclid, q));
  EXPECT_NEAR(half.alpha, 0.5, 1e-15);
  const DiscreteMechanism coin = Unwrap(BuildCoin(prior, half));
  EXPECT_NEAR(Unwrap(AverageQualityLoss(coin, prior, kEuclid)), q, 1e-12);
  EXPECT_NEAR(Unwrap(AverageAdversaryError(coin, prior, kEuclid)), q, 1e-9);
  EXPECT_NEAR(Unwrap(WorstCaseOutputAdversaryError(coin, prior, kEuclid)), 0.0,
              1e-12);
  EXPECT_EQ(Unwrap(GeoIndistinguishability(coin)), 0.0);
}

TEST(CoinTest, RejectsTargetsBeyondQStar) {
  const Prior prior = UniformOn({{0, 0}, {1, 0}, {2, 0}});
  EXPECT_EQ(BuildCoin(prior, kEuclid, 0.7).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(BuildCoin(prior, kEuclid, -0.1).ok());
}

TEST(ExponentialTest, LimitsAndGeoInd) {
  const auto inst = testing::MakeRandomInstance(10, 4);
  const Prior prior = testing::MakePrior(inst);
  const auto outs = prior.poi().Locations();

  const DiscreteMechanism sharp =
      Unwrap(BuildExponential(prior.poi_ptr(), outs, kEuclid, 1e6));
  EXPECT_TRUE(sharp.matrix().isApprox(Matrix::Identity(10, 10), 1e-12));

  const DiscreteMechanism flat =
      Unwrap(BuildExponential(prior.poi_ptr(), outs, kEuclid, 0.0));
  EXPECT_TRUE(flat.matrix().isApprox(Matrix::Constant(10, 10, 0.1), 1e-15));

  for (double b : {0.1, 0.7, 2.0, 9.0}) {
    const DiscreteMechanism m =
        Unwrap(BuildExponential(prior.poi_ptr(), outs, kEuclid, b));
    for (int x = 0; x < 10; ++x) EXPECT_NEAR(m.matrix().row(x).sum(), 1, 1e-12);
    EXPECT_TRUE(SatisfiesGeoInd(m, 2 * b)) << b;
  }
  EXPECT_FALSE(BuildExponential(prior.poi_ptr(), outs, kEuclid, -1).ok());
}

TEST(BlahutArimotoTest, ZeroRateGivesIdenticalRows) {
  const Prior prior =
      Unwrap(Prior::Create(Unwrap(PoiSet::Create({{0, 0}, {1, 0}, {0, 3}})),
                           {0.5, 0.3, 0.2}));
  const auto outs = prior.poi().Locations();
  BaParams p;
  p.b = 0.0;
  const DiscreteMechanism m = Unwrap(BuildBaUnremapped(prior, outs, kEuclid, p));
  for (int x = 1; x < 3; ++x) {
    EXPECT_TRUE(m.matrix().row(x).isApprox(m.matrix().row(0), 1e-15));
  }
  EXPECT_NEAR(Unwrap(MutualInformation(m, prior)), 0.0, 1e-12);
  // Every input reports an output drawn from the same marginal.
  const std::vector<double> pz = Unwrap(OutputMarginal(m, prior));
  double direct = 0.0;
  for (int x = 0; x < 3; ++x) {
    for (int z = 0; z < 3; ++z) {
      direct += prior[x] * pz[z] * EuclideanKm(prior.poi().point(x),
                                              outs[z].point);
    }
  }
  EXPECT_NEAR(Unwrap(AverageQualityLoss(m, prior, kEuclid)), direct, 1e-12);
}

class BlahutArimotoRandomTest : public ::testing::TestWithParam<double> {};

TEST_P(BlahutArimotoRandomTest, Properties) {
  const double b = GetParam();
  const auto inst = testing::MakeRandomInstance(15, 11);
  const Prior prior = testing::MakePrior(inst);
  const auto outs = prior.poi().Locations();
  BaParams p;
  p.b = b;
  p.record_lagrangian = true;
  const BaTrace trace = Unwrap(RunBlahutArimoto(prior, outs, kEuclid, p));
  ASSERT_TRUE(trace.converged);
  for (size_t i = 1; i < trace.lagrangian.size(); ++i) {
    EXPECT_LE(trace.lagrangian[i], trace.lagrangian[i - 1] + 1e-9) << i;
  }

  const Matrix d = Unwrap(DistanceMatrix(kEuclid, prior.poi(), outs));
  const Matrix again = BlahutArimotoUpdate(prior, d, b, trace.matrix);
  EXPECT_LT((again - trace.matrix).cwiseAbs().maxCoeff(),
            p.convergence_threshold);

  const DiscreteMechanism raw = Unwrap(BuildBaUnremapped(prior, outs, kEuclid, p));
  EXPECT_TRUE(SatisfiesGeoInd(raw, 2 * b));

  const DiscreteMechanism ba = Unwrap(BuildBa(prior, outs, kEuclid, p));
  EXPECT_NEAR(Unwrap(AverageAdversaryError(ba, prior, kEuclid)),
              Unwrap(AverageQualityLoss(ba, prior, kEuclid)), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Rates, BlahutArimotoRandomTest,
                         ::testing::Values(0.3, 1.0, 3.0));

TEST(BlahutArimotoTest, TruncationRemovesGeoIndButKeepsEntropy) {
  const auto inst = testing::MakeRandomInstance(25, 12, 6.0);
  const Prior prior = testing::MakePrior(inst);
  const auto outs = prior.poi().Locations();
  BaParams p;
  p.b = 3.0;
  const DiscreteMechanism ba = Unwrap(BuildBaUnremapped(prior, outs, kEuclid, p));
  EXPECT_GT(Unwrap(GeoIndistinguishability(ba)), 0.0);
  const DiscreteMechanism cut = Unwrap(TruncateMechanism(ba, kEuclid, 4.0));
  EXPECT_EQ(Unwrap(GeoIndistinguishability(cut)), 0.0);
  const double before = Unwrap(ConditionalEntropy(ba, prior));
  const double after = Unwrap(ConditionalEntropy(cut, prior));
  EXPECT_LT(std::abs(after - before), 0.05 * before);
}

TEST(BlahutArimotoTest, WarmStartReachesTheSameFixedPoint) {
  const auto inst = testing::MakeRandomInstance(12, 13);
  const Prior prior = testing::MakePrior(inst);
  const auto outs = prior.poi().Locations();
  BaParams p;
  p.b = 1.0;
  const BaTrace first = Unwrap(RunBlahutArimoto(prior, outs, kEuclid, p));
  p.b = 1.1;
  const BaTrace cold = Unwrap(RunBlahutArimoto(prior, outs, kEuclid, p));
  const BaTrace warm =
      Unwrap(RunBlahutArimoto(prior, outs, kEuclid, p, first.matrix));
  ASSERT_TRUE(cold.converged && warm.converged);
  EXPECT_LT((warm.matrix - cold.matrix).cwiseAbs().maxCoeff(), 1e-6);
  const BaTrace resumed =
      Unwrap(RunBlahutArimoto(prior, outs, kEuclid, p, cold.matrix));
  EXPECT_TRUE(resumed.converged);
  EXPECT_EQ(resumed.iterations, 1);
}

TEST(BlahutArimotoTest, ExtrapolationKeepsTheFixedPoint) {
  const Prior prior = testing::MakePrior(testing::MakeRandomInstance(30, 21, 8.0));
  const auto outs = prior.poi().Locations();
  for (double b : {0.5, 2.0, 5.0}) {
    BaParams p;
    p.b = b;
    p.max_iterations = 1000000;
    p.record_lagrangian = true;
    const BaTrace fast = Unwrap(RunBlahutArimoto(prior, outs, kEuclid, p));
    p.extrapolate = false;
    const BaTrace plain = Unwrap(RunBlahutArimoto(prior, outs, kEuclid, p));
    ASSERT_TRUE(fast.converged && plain.converged) << b;
    EXPECT_LE(fast.iterations, plain.iterations) << b;
    EXPECT_NEAR(fast.lagrangian.back(), plain.lagrangian.back(), 1e-7) << b;
    EXPECT_NEAR(Unwrap(AverageQualityLoss(Unwrap(DiscreteMechanism::Create(
                           prior.poi_ptr(), outs, fast.matrix)),
                       prior, kEuclid)),
                Unwrap(AverageQualityLoss(Unwrap(DiscreteMechanism::Create(
                           prior.poi_ptr(), outs, plain.matrix)),
                       prior, kEuclid)),
                1e-5)
        << b;
    for (size_t i = 1; i < fast.lagrangian.size(); ++i) {
      ASSERT_LE(fast.lagrangian[i], fast.lagrangian[i - 1] + 1e-9) << b << " " << i;
    }
  }
}

TEST(BlahutArimotoTest, BoundedKernelRespectsTheBound) {
  const Prior prior = testing::MakePrior(testing::MakeRandomInstance(30, 16, 8.0));
  const auto outs = prior.poi().Locations();
  for (double b : {0.2, 2.0}) {
    BaParams p;
    p.b = b;
    p.q_max = 1.5;
    const DiscreteMechanism m = Unwrap(BuildBaUnremapped(prior, outs, kEuclid, p));
    EXPECT_LE(Unwrap(WorstCaseQualityLoss(m, prior, kEuclid)), 1.5);
    EXPECT_TRUE(Validate(m).empty());
  }
  BaParams tight;
  tight.q_max = 1e-3;
  const Prior spread = UniformOn({{0, 0}, {1, 0}});
  EXPECT_TRUE(BuildBaUnremapped(spread, spread.poi().Locations(), kEuclid, tight).ok());
  EXPECT_EQ(BuildBaUnremapped(spread, {{{0.5, 0}}}, kEuclid, tight).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(BlahutArimotoTest, IterationCapIsAnError) {
  const auto inst = testing::MakeRandomInstance(12, 14);
  const Prior prior = testing::MakePrior(inst);
  BaParams p;
  p.max_iterations = 2;
  EXPECT_FALSE(
      BuildBaUnremapped(prior, prior.poi().Locations(), kEuclid, p).ok());
}

TEST(TuneBaTest, EndpointsAndIntermediateTarget) {
  const auto inst = testing::MakeRandomInstance(10, 15);
  const Prior prior = testing::MakePrior(inst);
  const auto outs = prior.poi().Locations();
  auto loss = [&](double b) {
    BaParams p;
    p.b = b;
    return Unwrap(
        AverageQualityLoss(Unwrap(BuildBa(prior, outs, kEuclid, p)), prior,
                           kEuclid));
  };
  const double b_lo = 0.2, b_hi = 20.0;
  const double q_lo = loss(b_lo), q_hi = loss(b_hi);
  ASSERT_GT(q_lo, q_hi);

  EXPECT_EQ(Unwrap(TuneBaB(prior, outs, kEuclid, q_lo, b_lo, b_hi)).params.b,
            b_lo);
  EXPECT_EQ(Unwrap(TuneBaB(prior, outs, kEuclid, q_hi, b_lo, b_hi)).params.b,
            b_hi);

  const double target = 0.5 * (q_lo + q_hi);
  const BaTuning t = Unwrap(TuneBaB(prior, outs, kEuclid, target, b_lo, b_hi));
  EXPECT_LE(std::abs(loss(t.params.b) - target), 0.01 * target);
  EXPECT_LE(std::abs(t.q_avg - target), 0.01 * target);

  EXPECT_FALSE(TuneBaB(prior, outs, kEuclid, 2 * q_lo, b_lo, b_hi).ok());
}

}  // namespace
}  // namespace lppm
