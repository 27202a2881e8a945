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

// Exponential-mechanism quantile (EMQ) over a bounded range [a, b].
//
// With sorted data x_1 <= ... <= x_n, x_0 = a and x_{n+1} = b, interval
// j = 0..n is [x_j, x_{j+1}] and is selected with weight
//   exp(-eps |j - qn| / 2) * (x_{j+1} - x_j),
// after which a uniform point inside it is returned.

#ifndef DPQ_EMQ_H_
#define DPQ_EMQ_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "dpq/log_histogram.h"
#include "dpq/log_sum_exp.h"
#include "dpq/noise.h"
#include "dpq/random.h"
#include "dpq/sparse_vector.h"

namespace dpq {

struct BoundedRange {
  double a = 0.0;
  double b = 1.0;

  double width() const { return b - a; }

  absl::Status Validate() const {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
      return absl::InvalidArgumentError(
          absl::StrCat("Range needs finite a < b, got [", a, ", ", b, "]"));
    }
    return absl::OkStatus();
  }
};

// Sorted data and interval boundaries, reusable across q and eps.
class EmqSampler {
 public:
  static absl::StatusOr<EmqSampler> Create(std::span<const double> values,
                                           BoundedRange range) {
    if (absl::Status status = range.Validate(); !status.ok()) return status;
    std::vector<double> boundaries;
    boundaries.reserve(values.size() + 2);
    boundaries.push_back(range.a);
    for (size_t j = 0; j < values.size(); ++j) {
      const double x = values[j];
      if (!(x >= range.a && x <= range.b)) {
        return absl::InvalidArgumentError(
            absl::StrCat("Value ", x, " at position ", j, " lies outside [",
                         range.a, ", ", range.b, "]"));
      }
      boundaries.push_back(x);
    }
    std::sort(boundaries.begin() + 1, boundaries.end());
    boundaries.push_back(range.b);
    return EmqSampler(range, std::move(boundaries));
  }

  BoundedRange range() const { return range_; }
  int64_t size() const { return static_cast<int64_t>(boundaries_.size()) - 2; }
  int64_t num_intervals() const { return size() + 1; }

  // [x_j, x_{j+1}] for j in [0, n].
  std::pair<double, double> Interval(int64_t j) const {
    return {boundaries_[j], boundaries_[j + 1]};
  }

  // Unnormalized log weights; -inf for zero-width intervals.
  std::vector<double> LogWeights(double q, double eps) const {
    const double qn = q * static_cast<double>(size());
    std::vector<double> log_weights(num_intervals());
    for (int64_t j = 0; j < num_intervals(); ++j) {
      const double gap = boundaries_[j + 1] - boundaries_[j];
      log_weights[j] = gap > 0 ? -eps * std::abs(static_cast<double>(j) - qn) /
                                         2.0 +
                                     std::log(gap)
                               : kNegativeInfinity;
    }
    return log_weights;
  }

  absl::StatusOr<std::vector<double>> IntervalPmf(double q, double eps) const {
    if (absl::Status status = ValidateArgs(q, eps); !status.ok()) {
      return status;
    }
    std::vector<double> log_weights = LogWeights(q, eps);
    const double log_total = LogSumExp(log_weights);
    std::vector<double> pmf(log_weights.size());
    for (size_t j = 0; j < pmf.size(); ++j) {
      pmf[j] = std::exp(log_weights[j] - log_total);
    }
    return pmf;
  }

  // Gumbel-max over the log weights.
  absl::StatusOr<int64_t> SampleInterval(double q, double eps,
                                         RandomSource& rng) const {
    if (absl::Status status = ValidateArgs(q, eps); !status.ok()) {
      return status;
    }
    std::vector<double> log_weights = LogWeights(q, eps);
    int64_t best = 0;
    double best_score = kNegativeInfinity;
    for (int64_t j = 0; j < static_cast<int64_t>(log_weights.size()); ++j) {
      const double score =
          log_weights[j] + internal::SampleGumbel(1.0, rng);
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  absl::StatusOr<double> Sample(double q, double eps,
                                RandomSource& rng) const {
    absl::StatusOr<int64_t> j = SampleInterval(q, eps, rng);
    if (!j.ok()) return j.status();
    const auto [lo, hi] = Interval(*j);
    return rng.Uniform(lo, hi);
  }

  // Step density: P(interval) / width on each grid point; 0 outside [a, b].
  absl::StatusOr<std::vector<double>> PdfCurve(
      double q, double eps, std::span<const double> grid) const {
    absl::StatusOr<std::vector<double>> pmf = IntervalPmf(q, eps);
    if (!pmf.ok()) return pmf.status();
    std::vector<double> density(grid.size(), 0.0);
    for (size_t g = 0; g < grid.size(); ++g) {
      const double point = grid[g];
      if (point < range_.a || point > range_.b) continue;
      // Last interval whose left edge is <= point and that has positive
      // width around it.
      int64_t j = std::upper_bound(boundaries_.begin(), boundaries_.end(),
                                   point) -
                  boundaries_.begin() - 1;
      j = std::min(j, num_intervals() - 1);
      while (j > 0 && boundaries_[j + 1] - boundaries_[j] <= 0) --j;
      const double gap = boundaries_[j + 1] - boundaries_[j];
      if (gap > 0) density[g] = (*pmf)[j] / gap;
    }
    return density;
  }

 private:
  EmqSampler(BoundedRange range, std::vector<double> boundaries)
      : range_(range), boundaries_(std::move(boundaries)) {}

  static absl::Status ValidateArgs(double q, double eps) {
    if (!(q >= 0 && q <= 1)) {
      return absl::InvalidArgumentError(
          absl::StrCat("Quantile must lie in [0, 1], got ", q));
    }
    if (!std::isfinite(eps) || eps <= 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("eps must be finite and positive, got ", eps));
    }
    return absl::OkStatus();
  }

  BoundedRange range_;
  std::vector<double> boundaries_;  // a, x_(1), ..., x_(n), b
};

inline absl::StatusOr<double> EmqEstimate(std::span<const double> values,
                                          BoundedRange range, double q,
                                          double eps, RandomSource& rng) {
  absl::StatusOr<EmqSampler> sampler = EmqSampler::Create(values, range);
  if (!sampler.ok()) return sampler.status();
  return sampler->Sample(q, eps, rng);
}

inline absl::StatusOr<std::vector<double>> EmqIntervalPmf(
    std::span<const double> values, BoundedRange range, double q, double eps) {
  absl::StatusOr<EmqSampler> sampler = EmqSampler::Create(values, range);
  if (!sampler.ok()) return sampler.status();
  return sampler->IntervalPmf(q, eps);
}

inline absl::StatusOr<std::vector<double>> EmqPdfCurve(
    std::span<const double> values, BoundedRange range, double q, double eps,
    std::span<const double> grid) {
  absl::StatusOr<EmqSampler> sampler = EmqSampler::Create(values, range);
  if (!sampler.ok()) return sampler.status();
  return sampler->PdfCurve(q, eps, grid);
}

// UQE variant that returns a uniform draw from [beta^{k-1}, beta^k] (shifted
// by l - 1) instead of beta^k. With Gumbel noise and eps1 = eps2 = eps its
// density is an exact step function over those intervals.
struct UqeStepPdf {
  std::vector<double> edges;  // edges[k] = beta^k + l - 1, k = 0..K
  std::vector<double> probs;  // probs[k-1] = P(halt at k), k = 1..K
  double residual = 0.0;      // P(no halt within K queries)

  double DensityAt(double point) const {
    if (probs.empty() || point < edges.front() || point >= edges.back()) {
      return 0.0;
    }
    const int64_t k =
        std::upper_bound(edges.begin(), edges.end(), point) - edges.begin();
    return probs[k - 1] / (edges[k] - edges[k - 1]);
  }
};

// Computes the step PDF over every step that starts below `up_to`. Depends on
// the data, l, q, eps and beta only; no range enters.
inline absl::StatusOr<UqeStepPdf> UqeGumbelStepPdf(
    std::span<const double> values, double lower_bound, double q, double eps,
    double beta, double up_to) {
  absl::StatusOr<LogBucketHistogram> histogram =
      BuildHistogram(values, beta, lower_bound);
  if (!histogram.ok()) return histogram.status();
  PowerGrid grid(beta);
  UqeStepPdf pdf;
  pdf.edges.push_back(grid.At(0) + lower_bound - 1);
  std::vector<double> counts;
  CountingQueryStream stream(*histogram);
  for (int64_t k = 1; pdf.edges.back() < up_to && k <= kDefaultMaxQueries;
       ++k) {
    counts.push_back(stream.Next());
    pdf.edges.push_back(grid.At(k) + lower_bound - 1);
  }
  absl::StatusOr<GumbelOutcomeDistribution> outcomes = GumbelOutcomes(
      counts, q * static_cast<double>(histogram->total()), eps, 1.0);
  if (!outcomes.ok()) return outcomes.status();
  pdf.probs = std::move(outcomes->halt);
  pdf.residual = outcomes->no_halt;
  return pdf;
}

}  // namespace dpq

#endif  // DPQ_EMQ_H_
