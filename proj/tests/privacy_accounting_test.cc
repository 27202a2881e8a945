//
// Copyright 2026 The dpq Authors
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
//

#include "dpq/privacy_accounting.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dpq/noise.h"
#include "dpq/random.h"
#include "dpq/sparse_vector.h"
#include "dpq/testing/oracles.h"
#include "gtest/gtest.h"

namespace dpq {
namespace {

using ::dpq::testing::BruteForceOneSidedLoss;

// f(x') - f(x) all in [0, 1] (or all in [-1, 0] when `down`).
std::pair<std::vector<double>, std::vector<double>> MonotonicPair(
    int64_t k, bool down, RandomSource& rng) {
  std::vector<double> fx(k);
  std::vector<double> fxp(k);
  for (int64_t i = 0; i < k; ++i) {
    fx[i] = rng.Uniform(-5, 5);
    const double step = rng.Uniform() < 0.3 ? 1.0 : rng.Uniform();
    fxp[i] = fx[i] + (down ? -step : step);
  }
  return {fx, fxp};
}

std::pair<std::vector<double>, std::vector<double>> GeneralPair(
    int64_t k, RandomSource& rng) {
  std::vector<double> fx(k);
  std::vector<double> fxp(k);
  for (int64_t i = 0; i < k; ++i) {
    fx[i] = rng.Uniform(-5, 5);
    const double u = rng.Uniform();
    fxp[i] = fx[i] + (u < 0.25 ? -1.0 : u > 0.75 ? 1.0 : rng.Uniform(-1, 1));
  }
  return {fx, fxp};
}

TEST(GuaranteeTest, PointValues) {
  const PrivacyGuarantee monotonic = *GuaranteeFor(
      QueryClass::kMonotonic, NeighborModel::kSwap, NoiseKind::kExponential,
      0.5, 0.5);
  EXPECT_DOUBLE_EQ(*monotonic.eps_dp, 1.0);
  EXPECT_DOUBLE_EQ(*monotonic.gamma_range_bounded, 1.5);
  EXPECT_DOUBLE_EQ(*monotonic.rho_zcdp, 0.28125);

  const PrivacyGuarantee counting = *GuaranteeFor(
      QueryClass::kCountMinusQn, NeighborModel::kAddSubtract,
      NoiseKind::kExponential, 0.5, 0.5, 0.99);
  EXPECT_DOUBLE_EQ(*counting.eps_dp, 0.995);
  EXPECT_FALSE(counting.gamma_range_bounded.has_value());

  const PrivacyGuarantee counting_gumbel = *GuaranteeFor(
      QueryClass::kCountMinusQn, NeighborModel::kAddSubtract,
      NoiseKind::kGumbel, 0.5, 0.5, 0.99);
  EXPECT_DOUBLE_EQ(*counting_gumbel.gamma_range_bounded, 1.0);
  EXPECT_DOUBLE_EQ(*counting_gumbel.rho_zcdp, 0.125);

  const PrivacyGuarantee general = *GuaranteeFor(
      QueryClass::kGeneral, NeighborModel::kSwap, NoiseKind::kLaplace, 0.5,
      0.25);
  EXPECT_DOUBLE_EQ(*general.eps_dp, 1.0);
  EXPECT_DOUBLE_EQ(*general.rho_zcdp, 0.5);

  const PrivacyGuarantee fixed = *GuaranteeFor(
      QueryClass::kFixedThresholdCount, NeighborModel::kAddSubtract,
      NoiseKind::kExponential, 0.3, 0.7);
  EXPECT_DOUBLE_EQ(*fixed.eps_dp, 0.7);
  EXPECT_DOUBLE_EQ(*fixed.gamma_range_bounded, 1.0);
}

TEST(GuaranteeTest, ZcdpIsTightestConversion) {
  for (double e1 : {0.1, 0.5, 1.0}) {
    for (double e2 : {0.1, 0.5, 2.0}) {
      const PrivacyGuarantee g = *GuaranteeFor(
          QueryClass::kMonotonic, NeighborModel::kSwap,
          NoiseKind::kExponential, e1, e2);
      EXPECT_NEAR(*g.rho_zcdp, 0.5 * (e1 / 2 + e2) * (e1 / 2 + e2), 1e-15);
      EXPECT_LE(*g.rho_zcdp, ZcdpFromDp(*g.eps_dp) + 1e-15);
    }
  }
}

TEST(GuaranteeTest, RejectsInvalidCombinations) {
  EXPECT_FALSE(GuaranteeFor(QueryClass::kCountMinusQn, NeighborModel::kSwap,
                            NoiseKind::kExponential, 0.5, 0.5, 0.5)
                   .ok());
  EXPECT_FALSE(GuaranteeFor(QueryClass::kFixedThresholdCount,
                            NeighborModel::kSwap, NoiseKind::kExponential, 0.5,
                            0.5)
                   .ok());
  EXPECT_FALSE(GuaranteeFor(QueryClass::kCountMinusQn,
                            NeighborModel::kAddSubtract,
                            NoiseKind::kExponential, 0.5, 0.5)
                   .ok());
  EXPECT_FALSE(GuaranteeFor(QueryClass::kGeneral, NeighborModel::kSwap,
                            NoiseKind::kGumbel, 0.5, 0.6)
                   .ok());
  EXPECT_FALSE(GuaranteeFor(QueryClass::kGeneral, NeighborModel::kSwap,
                            NoiseKind::kLaplace, 0.0, 0.5)
                   .ok());
}

TEST(OneSidedLossTest, IdenticalSequencesCostNothing) {
  const std::vector<double> f = {0.3, -2.0, 7.0};
  EXPECT_EQ(*OneSidedLoss(f, f, 1.0, 1.0, 1.0), 0.0);
  EXPECT_EQ(*OneSidedLoss(f, f, 1.0, 1.0, 1.0, true), 0.0);
}

TEST(OneSidedLossTest, HandComputedPair) {
  const std::vector<double> fx = {0.0, 1.0, 1.0};
  const std::vector<double> fxp = {1.0, 0.0, 2.0};
  EXPECT_DOUBLE_EQ(*OneSidedLoss(fx, fxp, 1.0, 1.0, 1.0), 3.0);
  EXPECT_DOUBLE_EQ(BruteForceOneSidedLoss(fx, fxp, 1.0, 1.0, 1.0), 3.0);
}

TEST(OneSidedLossTest, MatchesBruteForce) {
  RandomSource rng(1);
  for (int pair = 0; pair < 5000; ++pair) {
    const int64_t k = 1 + static_cast<int64_t>(rng.UniformIndex(12));
    const auto [fx, fxp] = GeneralPair(k, rng);
    const double e1 = rng.Uniform(0.1, 2.0);
    const double e2 = rng.Uniform(0.1, 2.0);
    for (bool relaxed : {false, true}) {
      EXPECT_NEAR(*OneSidedLoss(fx, fxp, e1, e2, 1.0, relaxed),
                  BruteForceOneSidedLoss(fx, fxp, e1, e2, 1.0, relaxed),
                  1e-12);
    }
  }
}

TEST(OneSidedLossTest, RelaxationNeverIncreasesLoss) {
  RandomSource rng(2);
  for (int pair = 0; pair < 5000; ++pair) {
    const auto [fx, fxp] = GeneralPair(8, rng);
    EXPECT_LE(*OneSidedLoss(fx, fxp, 1.0, 1.0, 1.0, true),
              *OneSidedLoss(fx, fxp, 1.0, 1.0, 1.0) + 1e-12);
  }
}

TEST(OneSidedLossTest, GeneralPairsWithinDpBound) {
  RandomSource rng(3);
  for (int pair = 0; pair < 10000; ++pair) {
    const auto [fx, fxp] = GeneralPair(10, rng);
    const double e1 = rng.Uniform(0.1, 2.0);
    const double e2 = rng.Uniform(0.1, 2.0);
    EXPECT_LE(*OneSidedLoss(fx, fxp, e1, e2, 1.0), e1 + 2 * e2 + 1e-12);
    EXPECT_LE(*RangeBoundedOfPair(fx, fxp, e1, e2, 1.0),
              2 * (e1 + 2 * e2) + 1e-12);
  }
}

TEST(OneSidedLossTest, MonotonicPairsWithinBounds) {
  RandomSource rng(4);
  for (int pair = 0; pair < 10000; ++pair) {
    const auto [fx, fxp] = MonotonicPair(10, pair % 2 == 1, rng);
    EXPECT_LE(*OneSidedLoss(fx, fxp, 1.0, 1.0, 1.0), 2.0 + 1e-12);
    EXPECT_LE(*OneSidedLoss(fxp, fx, 1.0, 1.0, 1.0), 2.0 + 1e-12);
    EXPECT_LE(*RangeBoundedOfPair(fx, fxp, 1.0, 1.0, 1.0), 3.0 + 1e-12);
  }
}

TEST(OneSidedLossTest, RejectsMismatchedInputs) {
  const std::vector<double> a = {0.0, 1.0};
  const std::vector<double> b = {0.0};
  EXPECT_FALSE(OneSidedLoss(a, b, 1.0, 1.0, 1.0).ok());
  EXPECT_FALSE(OneSidedLoss(a, a, 1.0, 1.0, 0.0).ok());
  EXPECT_FALSE(OneSidedLoss(a, a, -1.0, 1.0, 1.0).ok());
}

TEST(GumbelExactRatioTest, GeneralPairsWithinUnrelaxedLoss) {
  RandomSource rng(5);
  for (int pair = 0; pair < 2000; ++pair) {
    const int64_t k = 1 + static_cast<int64_t>(rng.UniformIndex(8));
    const auto [fx, fxp] = GeneralPair(k, rng);
    const double eps = rng.Uniform(0.2, 1.5);
    const double threshold = rng.Uniform(-5, 5);
    const GumbelOutcomeDistribution px = *GumbelOutcomes(fx, threshold, eps, 1);
    const GumbelOutcomeDistribution pxp =
        *GumbelOutcomes(fxp, threshold, eps, 1);
    const double bound = *OneSidedLoss(fx, fxp, eps, eps, 1.0);
    for (int64_t j = 0; j < k; ++j) {
      EXPECT_LE(std::log(px.halt[j]) - std::log(pxp.halt[j]), bound + 1e-9);
    }
  }
}

TEST(GumbelExactRatioTest, CountingPairsWithinRelaxedLoss) {
  RandomSource rng(6);
  for (int pair = 0; pair < 2000; ++pair) {
    const int64_t k = 1 + static_cast<int64_t>(rng.UniformIndex(8));
    const double eps = rng.Uniform(0.2, 1.5);
    const int64_t n = 2 + static_cast<int64_t>(rng.UniformIndex(30));
    const double q = rng.Uniform();
    std::vector<double> counts(k);
    for (double& c : counts) c = static_cast<double>(rng.UniformIndex(n + 1));
    std::sort(counts.begin(), counts.end());
    const int64_t entry = static_cast<int64_t>(rng.UniformIndex(k + 1));
    std::vector<double> fx(k);
    std::vector<double> fxp(k);
    for (int64_t i = 0; i < k; ++i) {
      fx[i] = counts[i] - q * static_cast<double>(n);
      fxp[i] = counts[i] + (i >= entry ? 1.0 : 0.0) -
               q * static_cast<double>(n + 1);
    }
    for (int direction = 0; direction < 2; ++direction) {
      const std::vector<double>& a = direction == 0 ? fx : fxp;
      const std::vector<double>& b = direction == 0 ? fxp : fx;
      const GumbelOutcomeDistribution pa = *GumbelOutcomes(a, 0.0, eps, 1.0);
      const GumbelOutcomeDistribution pb = *GumbelOutcomes(b, 0.0, eps, 1.0);
      const double bound = *OneSidedLoss(a, b, eps, eps, 1.0, true);
      for (int64_t j = 0; j < k; ++j) {
        EXPECT_LE(std::log(pa.halt[j]) - std::log(pb.halt[j]), bound + 1e-9);
      }
    }
  }
}

TEST(CompositionTest, ZcdpAdds) {
  EXPECT_EQ(*ComposeZcdp({}), 0.0);
  const std::vector<double> two = {0.1, 0.2};
  EXPECT_NEAR(*ComposeZcdp(two), 0.3, 1e-15);
  const std::vector<double> bad = {0.1, -0.2};
  EXPECT_FALSE(ComposeZcdp(bad).ok());

  RandomSource rng(7);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> abc = {rng.Uniform(), rng.Uniform(),
                                     rng.Uniform()};
    const std::vector<double> ab = {abc[0], abc[1]};
    const std::vector<double> bc = {abc[1], abc[2]};
    const std::vector<double> left = {*ComposeZcdp(ab), abc[2]};
    const std::vector<double> right = {abc[0], *ComposeZcdp(bc)};
    EXPECT_NEAR(*ComposeZcdp(left), *ComposeZcdp(right), 1e-15);
  }
}

TEST(CompositionTest, SequentialDropsMissingBounds) {
  PrivacyGuarantee a;
  a.eps_dp = 1.0;
  a.rho_zcdp = 0.5;
  PrivacyGuarantee b;
  b.rho_zcdp = 0.25;
  const PrivacyGuarantee parts[] = {a, b};
  const PrivacyGuarantee total = ComposeSequential(parts);
  EXPECT_FALSE(total.eps_dp.has_value());
  EXPECT_DOUBLE_EQ(*total.rho_zcdp, 0.75);
}

TEST(MultiQuantileTest, LevelCounts) {
  EXPECT_EQ(MultiQuantileLevels(1), 1);
  EXPECT_EQ(MultiQuantileLevels(2), 2);
  EXPECT_EQ(MultiQuantileLevels(3), 2);
  EXPECT_EQ(MultiQuantileLevels(4), 3);
  EXPECT_EQ(MultiQuantileLevels(7), 3);
  EXPECT_EQ(MultiQuantileLevels(8), 4);
  for (int64_t m = 1; m < 2000; ++m) {
    EXPECT_EQ(MultiQuantileLevels(m),
              static_cast<int>(std::ceil(std::log2(m + 1.0) - 1e-12)));
  }
}

TEST(MultiQuantileTest, TotalsComposeAcrossLevels) {
  const MultiQuantileAccounting swap = *MultiQuantileGuarantee(
      7, NeighborModel::kSwap, NoiseKind::kExponential, 0.5, 0.5);
  EXPECT_EQ(swap.compositions, 3);
  EXPECT_DOUBLE_EQ(*swap.total.eps_dp, 3.0);
  EXPECT_DOUBLE_EQ(*swap.total.rho_zcdp, 3 * 0.28125);

  const MultiQuantileAccounting add = *MultiQuantileGuarantee(
      3, NeighborModel::kAddSubtract, NoiseKind::kGumbel, 0.5, 0.5);
  EXPECT_EQ(add.compositions, 2);
  EXPECT_DOUBLE_EQ(*add.per_level.eps_dp, 1.0);
  EXPECT_DOUBLE_EQ(*add.total.eps_dp, 2.0);
  EXPECT_DOUBLE_EQ(*add.total.rho_zcdp, 4 * 0.125);

  EXPECT_FALSE(MultiQuantileGuarantee(0, NeighborModel::kSwap,
                                      NoiseKind::kExponential, 0.5, 0.5)
                   .ok());
}

TEST(EmpiricalDpTest, IdenticalInputsPass) {
  auto run = [](RandomSource& rng) {
    ValueStream stream({0.0, 0.5, 1.0, 1.5});
    return RunAboveThreshold(
        stream, SvtConfig{0.5, 0.5, NoiseKind::kLaplace, 1.0}, rng);
  };
  const EmpiricalDpReport report =
      *EmpiricalDpCheck(run, run, 0.05, 200000, 4, 11);
  EXPECT_TRUE(report.pass) << report.max_log_ratio_lower;
}

TEST(EmpiricalDpTest, DetectsViolation) {
  auto low = [](RandomSource& rng) {
    ValueStream stream({0.0});
    return RunAboveThreshold(
        stream, SvtConfig{1.0, 1.0, NoiseKind::kLaplace, 0.0}, rng);
  };
  auto high = [](RandomSource& rng) {
    ValueStream stream({10.0});
    return RunAboveThreshold(
        stream, SvtConfig{1.0, 1.0, NoiseKind::kLaplace, 0.0}, rng);
  };
  const EmpiricalDpReport report =
      *EmpiricalDpCheck(low, high, 0.1, 200000, 1, 12);
  EXPECT_FALSE(report.pass);
}

TEST(EmpiricalDpTest, MonotonicNeighborsWithinClaim) {
  // Shifting every query by +1 is a monotonic neighbor with delta = 1.
  auto run_x = [](RandomSource& rng) {
    ValueStream stream({0.0, 0.5, 1.0, 1.5, 2.0}, 1.0, true);
    return RunAboveThreshold(
        stream, SvtConfig{0.5, 0.5, NoiseKind::kExponential, 1.5}, rng);
  };
  auto run_xp = [](RandomSource& rng) {
    ValueStream stream({1.0, 1.5, 2.0, 2.5, 3.0}, 1.0, true);
    return RunAboveThreshold(
        stream, SvtConfig{0.5, 0.5, NoiseKind::kExponential, 1.5}, rng);
  };
  const EmpiricalDpReport report =
      *EmpiricalDpCheck(run_x, run_xp, 1.0, 400000, 5, 13);
  EXPECT_TRUE(report.pass) << report.max_log_ratio_lower;
}

TEST(EmpiricalDpTest, RejectsTooFewTrials) {
  auto run = [](RandomSource& rng) {
    ValueStream stream({0.0});
    return RunAboveThreshold(
        stream, SvtConfig{1.0, 1.0, NoiseKind::kLaplace, 0.0}, rng);
  };
  EXPECT_FALSE(EmpiricalDpCheck(run, run, 1.0, 1000, 1, 1).ok());
}

TEST(NamesTest, RoundTrip) {
  for (QueryClass c :
       {QueryClass::kGeneral, QueryClass::kMonotonic,
        QueryClass::kCountMinusQn, QueryClass::kFixedThresholdCount}) {
    EXPECT_EQ(*ParseQueryClass(QueryClassName(c)), c);
  }
  EXPECT_EQ(*ParseNeighborModel("swap"), NeighborModel::kSwap);
  EXPECT_EQ(*ParseNeighborModel("add-subtract"), NeighborModel::kAddSubtract);
  EXPECT_FALSE(ParseNeighborModel("replace").ok());
}

}  // namespace
}  // namespace dpq
