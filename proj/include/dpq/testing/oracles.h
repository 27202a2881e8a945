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

// Reference computations for verification. Each one re-derives its answer
// directly from the definitions (direct scans, plain exponentials, explicit
// loops) and shares no code with the implementations it checks.

#ifndef DPQ_TESTING_ORACLES_H_
#define DPQ_TESTING_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dpq/parallel.h"
#include "dpq/random.h"
#include "dpq/sparse_vector.h"

namespace dpq::testing {

// max over k of the one-sided loss term, with D_k recomputed from scratch for
// every k.
inline double BruteForceOneSidedLoss(std::span<const double> fx,
                                     std::span<const double> fxp, double eps1,
                                     double eps2, double delta,
                                     bool relaxed = false) {
  double best = 0.0;
  for (size_t k = 0; k < fx.size(); ++k) {
    double dk = 0.0;
    bool first = true;
    for (size_t i = 0; i < k; ++i) {
      const double diff = fxp[i] - fx[i];
      const double candidate = relaxed ? diff : std::max(0.0, diff);
      dk = first ? candidate : std::max(dk, candidate);
      first = false;
    }
    const double query_gap = dk - (fxp[k] - fx[k]);
    const double term = eps1 / delta * (dk > 0 ? dk : 0.0) +
                        eps2 / delta * (query_gap > 0 ? query_gap : 0.0);
    if (term > best) best = term;
  }
  return best;
}

// |{x : x - ell + 1 < threshold}| by direct scan.
inline int64_t DirectPrefixCount(std::span<const double> values, double ell,
                                 double threshold) {
  int64_t count = 0;
  for (double x : values) {
    if (x - ell + 1 < threshold) ++count;
  }
  return count;
}

// Candidate grid 1, beta, beta^2, ... by repeated multiplication.
inline std::vector<double> CandidateGrid(double beta, int64_t up_to) {
  std::vector<double> grid = {1.0};
  while (static_cast<int64_t>(grid.size()) <= up_to) {
    grid.push_back(grid.back() * beta);
  }
  return grid;
}

// Minimal k >= 1 with |{x : x - ell + 1 < beta^k}| >= threshold, scanning
// k upward and counting against the sorted data at every step. Returns
// max_queries + 1 if no k qualifies.
inline int64_t MinimalHaltIndex(std::span<const double> values, double ell,
                                double beta, double threshold,
                                int64_t max_queries) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double candidate = 1.0;
  for (int64_t k = 1; k <= max_queries; ++k) {
    candidate *= beta;
    const auto below = std::partition_point(
        sorted.begin(), sorted.end(),
        [&](double x) { return x - ell + 1 < candidate; });
    if (static_cast<double>(below - sorted.begin()) >= threshold) return k;
  }
  return max_queries + 1;
}

// Linear interpolation between order statistics at rank q (n - 1).
inline double LinearInterpolatedQuantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double rank = q * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(rank));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (rank - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

// EMQ interval probabilities from plain exponential weights.
inline std::vector<double> EnumerateEmqPmf(std::vector<double> values,
                                           double a, double b, double q,
                                           double eps) {
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  std::vector<double> edges = {a};
  edges.insert(edges.end(), values.begin(), values.end());
  edges.push_back(b);
  std::vector<double> weights(n + 1);
  double total = 0.0;
  for (size_t j = 0; j <= n; ++j) {
    weights[j] = std::exp(-eps * std::fabs(static_cast<double>(j) -
                                           q * static_cast<double>(n)) /
                          2.0) *
                 (edges[j + 1] - edges[j]);
    total += weights[j];
  }
  for (double& w : weights) w /= total;
  return weights;
}

// p_k * prod_{i<k} (1 - p_i) with p_k = e^{r f_k} / (e^{r T} + sum_{i<=k}
// e^{r f_i}), computed with plain exponentials.
inline std::vector<double> ProductFormHaltProbs(std::span<const double> values,
                                                double threshold,
                                                double rate) {
  std::vector<double> probs;
  double survive = 1.0;
  for (size_t k = 0; k < values.size(); ++k) {
    double denom = std::exp(rate * threshold);
    for (size_t i = 0; i <= k; ++i) denom += std::exp(rate * values[i]);
    const double p = std::exp(rate * values[k]) / denom;
    probs.push_back(p * survive);
    survive *= 1.0 - p;
  }
  return probs;
}

// Outcome counts over `trials` runs: counts[k-1] for halts at k <= K and
// counts[K] for everything else. run(RandomSource&) returns SvtOutcome.
inline std::vector<int64_t> OutcomeCounts(
    const std::function<SvtOutcome(RandomSource&)>& run, int64_t trials,
    int64_t max_outcome, uint64_t seed) {
  constexpr int64_t kChunks = 32;
  std::vector<std::vector<int64_t>> partial(
      kChunks, std::vector<int64_t>(max_outcome + 1, 0));
  ParallelFor(kChunks, [&](int64_t chunk) {
    RandomSource rng(seed, static_cast<uint64_t>(chunk));
    const int64_t begin = trials * chunk / kChunks;
    const int64_t end = trials * (chunk + 1) / kChunks;
    for (int64_t t = begin; t < end; ++t) {
      const SvtOutcome outcome = run(rng);
      const int64_t bucket = outcome.halted() && outcome.index() <= max_outcome
                                 ? outcome.index() - 1
                                 : max_outcome;
      ++partial[chunk][bucket];
    }
  });
  std::vector<int64_t> counts(max_outcome + 1, 0);
  for (const auto& chunk : partial) {
    for (int64_t b = 0; b <= max_outcome; ++b) counts[b] += chunk[b];
  }
  return counts;
}

// Largest |observed - expected| / standard error over outcomes. Outcomes
// with expected probability 0 must have zero counts (else +inf).
inline double MaxStandardizedDeviation(std::span<const int64_t> counts,
                                       std::span<const double> expected,
                                       int64_t trials) {
  double worst = 0.0;
  const double n = static_cast<double>(trials);
  for (size_t j = 0; j < counts.size(); ++j) {
    const double p = expected[j];
    const double observed = static_cast<double>(counts[j]) / n;
    const double se = std::sqrt(p * (1 - p) / n);
    if (se == 0) {
      if (observed != p) return INFINITY;
      continue;
    }
    worst = std::max(worst, std::fabs(observed - p) / se);
  }
  return worst;
}

}  // namespace dpq::testing

#endif  // DPQ_TESTING_ORACLES_H_
