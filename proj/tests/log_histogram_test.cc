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

#include "dpq/log_histogram.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "dpq/random.h"
#include "dpq/testing/oracles.h"
#include "gtest/gtest.h"
#include "nlohmann/json.hpp"

namespace dpq {
namespace {

using ::dpq::testing::CandidateGrid;
using ::dpq::testing::DirectPrefixCount;

int64_t OnlyBucket(double x, double beta, double ell) {
  const std::vector<double> values = {x};
  const LogBucketHistogram h = *BuildHistogram(values, beta, ell);
  return h.buckets().front().first;
}

TEST(BuildHistogramTest, BucketIndices) {
  EXPECT_EQ(OnlyBucket(10.0, 2.0, 0.0), 3);
  EXPECT_EQ(OnlyBucket(-4.0, 2.0, -4.0), 0);
  EXPECT_EQ(OnlyBucket(7.0, 2.0, 0.0), 3);
  EXPECT_EQ(OnlyBucket(6.999, 2.0, 0.0), 2);
}

TEST(BuildHistogramTest, GridPointsOpenTheirBucket) {
  const double beta = 1.001;
  const std::vector<double> grid = CandidateGrid(beta, 5000);
  for (int64_t i : {1, 10, 693, 4999}) {
    // With ell = 1 the shifted value equals x exactly.
    EXPECT_EQ(OnlyBucket(grid[i], beta, 1.0), i);
    EXPECT_EQ(OnlyBucket(std::nextafter(grid[i], 0.0), beta, 1.0), i - 1);
  }
}

TEST(BuildHistogramTest, Errors) {
  const std::vector<double> below = {1.0, -1.0};
  EXPECT_FALSE(BuildHistogram(below, 2.0, 0.0).ok());
  const std::vector<double> nan = {1.0, NAN};
  EXPECT_FALSE(BuildHistogram(nan, 2.0, 0.0).ok());
  const std::vector<double> ok = {1.0};
  EXPECT_FALSE(BuildHistogram(ok, 1.0, 0.0).ok());
  EXPECT_FALSE(BuildHistogram(ok, INFINITY, 0.0).ok());
  EXPECT_FALSE(BuildHistogram(ok, 2.0, NAN).ok());
  EXPECT_TRUE(BuildHistogram({}, 2.0, 0.0).ok());
}

TEST(BuildHistogramTest, PrefixCountsMatchDirectScan) {
  RandomSource rng(1);
  for (int instance = 0; instance < 200; ++instance) {
    const double beta = std::vector<double>{1.001, 1.01, 1.1}[instance % 3];
    const double ell = rng.Uniform(-100, 100);
    const int64_t n = 1 + static_cast<int64_t>(rng.UniformIndex(2000));
    std::vector<double> values(n);
    for (double& v : values) {
      v = ell + std::exp(rng.Uniform(-3, 9)) - (rng.Uniform() < 0.1 ? 1 : 0);
      v = std::max(v, ell);
    }
    const LogBucketHistogram h = *BuildHistogram(values, beta, ell);
    EXPECT_EQ(h.total(), n);
    const std::vector<double> grid = CandidateGrid(beta, 12000);
    for (int probe = 0; probe < 50; ++probe) {
      const int64_t i = static_cast<int64_t>(rng.UniformIndex(grid.size()));
      ASSERT_EQ(h.PrefixCount(i), DirectPrefixCount(values, ell, grid[i]))
          << "beta " << beta << " index " << i;
    }
  }
}

TEST(BuildHistogramTest, JsonRoundTrip) {
  const std::vector<double> values = {0.0, 0.5, 3.0, 3.0, 100.0, 1e6};
  const LogBucketHistogram h = *BuildHistogram(values, 1.5, 0.0);
  const nlohmann::json j = h.ToJson();
  const LogBucketHistogram back =
      *LogBucketHistogram::FromJson(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.beta(), h.beta());
  EXPECT_EQ(back.lower_bound(), h.lower_bound());
  EXPECT_EQ(back.total(), h.total());
  ASSERT_EQ(back.buckets().size(), h.buckets().size());
  for (size_t i = 0; i < h.buckets().size(); ++i) {
    EXPECT_EQ(back.buckets()[i], h.buckets()[i]);
  }
}

TEST(BuildHistogramTest, FromJsonRejectsMalformed) {
  EXPECT_FALSE(LogBucketHistogram::FromJson(nlohmann::json::array()).ok());
  EXPECT_FALSE(LogBucketHistogram::FromJson(
                   {{"beta", 1.0}, {"ell", 0.0}, {"counts", {{"1", 2}}}})
                   .ok());
  EXPECT_FALSE(LogBucketHistogram::FromJson(
                   {{"beta", 2.0}, {"ell", 0.0}, {"counts", {{"x", 2}}}})
                   .ok());
  EXPECT_FALSE(LogBucketHistogram::FromJson(
                   {{"beta", 2.0}, {"ell", 0.0}, {"counts", {{"1", 0}}}})
                   .ok());
  EXPECT_FALSE(LogBucketHistogram::FromJson(
                   {{"beta", 2.0}, {"ell", 0.0}, {"counts", {{"-1", 3}}}})
                   .ok());
}

TEST(CountingQueryStreamTest, FirstQueryIsBucketZero) {
  const std::vector<double> values = {0.0, 0.2, 0.9, 5.0};
  const LogBucketHistogram h = *BuildHistogram(values, 2.0, 0.0);
  CountingQueryStream stream(h);
  EXPECT_EQ(stream.Next(), static_cast<double>(h.Count(0)));
  EXPECT_EQ(h.Count(0), 3);
}

TEST(CountingQueryStreamTest, ReachesTotal) {
  const std::vector<double> values = {0.0, 3.0, 70.0, 900.0};
  const LogBucketHistogram h = *BuildHistogram(values, 1.1, 0.0);
  CountingQueryStream stream(h);
  double last = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double next = stream.Next();
    EXPECT_GE(next, last);
    last = next;
  }
  EXPECT_EQ(last, 4.0);
}

TEST(CountingQueryStreamTest, MatchesPrefixCounts) {
  RandomSource rng(2);
  std::vector<double> values(500);
  for (double& v : values) v = rng.Uniform(0, 50);
  const LogBucketHistogram h = *BuildHistogram(values, 1.05, 0.0);
  CountingQueryStream stream(h, 3, 10);
  for (int64_t i = 3; i < 200; ++i) {
    EXPECT_EQ(stream.next_index(), i);
    EXPECT_EQ(stream.Next(), 10.0 + h.PrefixCount(i));
  }
}

TEST(CountingQueryStreamTest, SwapNeighborsDifferByAtMostOne) {
  RandomSource rng(3);
  for (int instance = 0; instance < 300; ++instance) {
    std::vector<double> x(50);
    for (double& v : x) v = rng.Uniform(0, 100);
    std::vector<double> xp = x;
    xp[rng.UniformIndex(x.size())] = rng.Uniform(0, 100);
    const LogBucketHistogram hx = *BuildHistogram(x, 1.05, 0.0);
    const LogBucketHistogram hxp = *BuildHistogram(xp, 1.05, 0.0);
    CountingQueryStream sx(hx);
    CountingQueryStream sxp(hxp);
    int sign = 0;
    for (int i = 0; i < 150; ++i) {
      const double diff = sxp.Next() - sx.Next();
      ASSERT_TRUE(diff == -1 || diff == 0 || diff == 1);
      if (diff != 0) {
        if (sign == 0) sign = diff > 0 ? 1 : -1;
        ASSERT_EQ(diff > 0 ? 1 : -1, sign);
      }
    }
  }
}

TEST(PowerGridTest, RepeatedMultiplication) {
  PowerGrid grid(1.001);
  double expected = 1.0;
  for (int i = 1; i <= 10; ++i) expected *= 1.001;
  EXPECT_EQ(grid.At(10), expected);
  EXPECT_NEAR(grid.At(10), 1.010045, 1e-6);
  EXPECT_EQ(grid.At(0), 1.0);
}

}  // namespace
}  // namespace dpq
