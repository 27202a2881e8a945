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

// Unbounded quantile estimation (UQE).
//
// The estimate is a noisy guess-and-check over candidates beta^i + l - 1:
// AboveThreshold runs over f_i = |{x_j : x_j - l + 1 < beta^i}|, i = 1, 2,
// ... with threshold T = q * n, and the candidate at the halting query is
// returned. Only a lower bound l is needed; the fully unbounded variant needs
// no bound at all.
//
// Every estimator is a template over a runner, a callable
// (CountingQueryStream&, double threshold) -> absl::StatusOr<SvtOutcome>.
// The RandomSource overloads use the private runner below.

#ifndef DPQ_QUANTILE_H_
#define DPQ_QUANTILE_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "dpq/log_histogram.h"
#include "dpq/noise.h"
#include "dpq/privacy_accounting.h"
#include "dpq/random.h"
#include "dpq/sparse_vector.h"

namespace dpq {

inline constexpr double kDefaultBeta = 1.001;
inline constexpr double kClippingBeta = 1.01;

class Dataset {
 public:
  static absl::StatusOr<Dataset> Create(
      std::vector<double> values,
      std::optional<double> lower_bound = std::nullopt) {
    if (values.empty()) {
      return absl::InvalidArgumentError("Dataset must not be empty");
    }
    for (size_t j = 0; j < values.size(); ++j) {
      if (!std::isfinite(values[j])) {
        return absl::InvalidArgumentError(
            absl::StrCat("Value at position ", j, " is not finite"));
      }
      if (lower_bound.has_value() && values[j] < *lower_bound) {
        return absl::InvalidArgumentError(
            absl::StrCat("Value ", values[j], " at position ", j,
                         " is below the declared lower bound ", *lower_bound));
      }
    }
    return Dataset(std::move(values), lower_bound);
  }

  std::span<const double> values() const { return values_; }
  std::optional<double> lower_bound() const { return lower_bound_; }
  int64_t size() const { return static_cast<int64_t>(values_.size()); }

 private:
  Dataset(std::vector<double> values, std::optional<double> lower_bound)
      : values_(std::move(values)), lower_bound_(lower_bound) {}

  std::vector<double> values_;
  std::optional<double> lower_bound_;
};

struct QuantileRequest {
  double q = 0.5;
  double eps1 = 0.5;
  double eps2 = 0.5;
  double beta = kDefaultBeta;
  NoiseKind noise = NoiseKind::kExponential;
  NeighborModel neighbor = NeighborModel::kSwap;
  int64_t max_queries = kDefaultMaxQueries;
  // Replaces T = q * n, e.g. T = n or n + 1/eps for clipping.
  std::optional<double> threshold_override;

  absl::Status Validate() const {
    if (!(q >= 0 && q <= 1)) {
      return absl::InvalidArgumentError(
          absl::StrCat("Quantile must lie in [0, 1], got ", q));
    }
    if (!std::isfinite(beta) || !(beta > 1)) {
      return absl::InvalidArgumentError(
          absl::StrCat("beta must be finite and greater than 1, got ", beta));
    }
    if (max_queries < 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("max_queries must be positive, got ", max_queries));
    }
    if (threshold_override.has_value() && !std::isfinite(*threshold_override)) {
      return absl::InvalidArgumentError("Threshold override must be finite");
    }
    SvtConfig config{eps1, eps2, noise, 0.0};
    return config.Validate();
  }

  double Threshold(int64_t n) const {
    return threshold_override.value_or(q * static_cast<double>(n));
  }
};

struct QuantileEstimate {
  double value = 0.0;
  // Grid index of the halting query, or of the last query on exhaustion.
  int64_t halt_index = 0;
  bool exhausted = false;
};

// DP AboveThreshold with the request's noise and budgets.
class PrivateRunner {
 public:
  PrivateRunner(const QuantileRequest& request, RandomSource& rng)
      : noise_(request.noise),
        eps1_(request.eps1),
        eps2_(request.eps2),
        rng_(&rng) {}

  absl::StatusOr<SvtOutcome> operator()(CountingQueryStream& stream,
                                        double threshold) const {
    return RunAboveThreshold(stream, SvtConfig{eps1_, eps2_, noise_, threshold},
                             *rng_);
  }

 private:
  NoiseKind noise_;
  double eps1_;
  double eps2_;
  RandomSource* rng_;
};

// Guarantee of one UQE run: monotonic counting queries under swap neighbors,
// counting-minus-qn queries under add/remove neighbors.
inline absl::StatusOr<PrivacyGuarantee> GuaranteeForRequest(
    const QuantileRequest& request) {
  if (request.neighbor == NeighborModel::kSwap) {
    return GuaranteeFor(QueryClass::kMonotonic, request.neighbor,
                        request.noise, request.eps1, request.eps2);
  }
  return GuaranteeFor(QueryClass::kCountMinusQn, request.neighbor,
                      request.noise, request.eps1, request.eps2, request.q);
}

// Runs UQE on a prebuilt histogram. Query indexing starts at 1, so the
// smallest possible output is beta + l - 1.
template <typename Runner>
absl::StatusOr<QuantileEstimate> EstimateQuantileFromHistogramWithRunner(
    const LogBucketHistogram& histogram, const QuantileRequest& request,
    Runner&& runner) {
  if (absl::Status status = request.Validate(); !status.ok()) return status;
  if (histogram.beta() != request.beta) {
    return absl::InvalidArgumentError(
        absl::StrCat("Histogram beta ", histogram.beta(),
                     " does not match request beta ", request.beta));
  }
  CountingQueryStream stream(histogram, /*first_index=*/1, /*base_count=*/0,
                             request.max_queries);
  absl::StatusOr<SvtOutcome> outcome =
      runner(stream, request.Threshold(histogram.total()));
  if (!outcome.ok()) return outcome.status();
  PowerGrid grid(request.beta);
  QuantileEstimate estimate;
  estimate.halt_index = outcome->index();
  estimate.exhausted = outcome->exhausted();
  estimate.value = grid.At(estimate.halt_index) + histogram.lower_bound() - 1;
  return estimate;
}

template <typename Runner>
absl::StatusOr<QuantileEstimate> EstimateQuantileWithRunner(
    const Dataset& data, const QuantileRequest& request, Runner&& runner) {
  if (!data.lower_bound().has_value()) {
    return absl::InvalidArgumentError(
        "EstimateQuantile needs a declared lower bound; use "
        "EstimateQuantileUnbounded otherwise");
  }
  if (absl::Status status = request.Validate(); !status.ok()) return status;
  absl::StatusOr<LogBucketHistogram> histogram =
      BuildHistogram(data.values(), request.beta, *data.lower_bound());
  if (!histogram.ok()) return histogram.status();
  return EstimateQuantileFromHistogramWithRunner(*histogram, request, runner);
}

inline absl::StatusOr<QuantileEstimate> EstimateQuantileFromHistogram(
    const LogBucketHistogram& histogram, const QuantileRequest& request,
    RandomSource& rng) {
  return EstimateQuantileFromHistogramWithRunner(
      histogram, request, PrivateRunner(request, rng));
}

inline absl::StatusOr<QuantileEstimate> EstimateQuantile(
    const Dataset& data, const QuantileRequest& request, RandomSource& rng) {
  return EstimateQuantileWithRunner(data, request, PrivateRunner(request, rng));
}

// Fully unbounded estimate from two AboveThreshold calls. The first searches
// candidates beta^i - 1 over f_i = |{x_j : x_j + 1 < beta^i}|, i = 0, 1, ...
// If it halts at i > 0 that candidate is returned. Otherwise the second call
// searches -beta^i + 1 over f_i = |{x_j : x_j - 1 > -beta^i}| with threshold
// (1 - q) n, and returns -beta^i + 1 if it halts at i > 0. Else 0.
struct UnboundedEstimate {
  enum class Branch { kPositive, kNegative, kZero };

  double value = 0.0;
  Branch branch = Branch::kZero;
  int64_t first_index = 0;
  std::optional<int64_t> second_index;  // absent if the second call was skipped
  bool exhausted = false;
};

namespace internal {

// One call of the fully unbounded search on values (already sign-adjusted).
// Returns the grid index i of the halting query and whether it exhausted.
template <typename Runner>
absl::StatusOr<std::pair<int64_t, bool>> RunSignedSearch(
    std::span<const double> values, double threshold,
    const QuantileRequest& request, Runner& runner) {
  std::vector<double> nonnegative;
  nonnegative.reserve(values.size());
  int64_t negatives = 0;
  for (double x : values) {
    if (x < 0) {
      ++negatives;
    } else {
      nonnegative.push_back(x);
    }
  }
  absl::StatusOr<LogBucketHistogram> histogram =
      BuildHistogram(nonnegative, request.beta, 0.0);
  if (!histogram.ok()) return histogram.status();
  CountingQueryStream stream(*histogram, /*first_index=*/0, negatives,
                             request.max_queries);
  absl::StatusOr<SvtOutcome> outcome = runner(stream, threshold);
  if (!outcome.ok()) return outcome.status();
  return std::make_pair(outcome->index() - 1, outcome->exhausted());
}

}  // namespace internal

template <typename Runner>
absl::StatusOr<UnboundedEstimate> EstimateQuantileUnboundedWithRunner(
    std::span<const double> values, const QuantileRequest& request,
    Runner&& runner) {
  if (absl::Status status = request.Validate(); !status.ok()) return status;
  if (values.empty()) {
    return absl::InvalidArgumentError("Dataset must not be empty");
  }
  const double n = static_cast<double>(values.size());
  PowerGrid grid(request.beta);
  UnboundedEstimate estimate;

  absl::StatusOr<std::pair<int64_t, bool>> first = internal::RunSignedSearch(
      values, request.q * n, request, runner);
  if (!first.ok()) return first.status();
  estimate.first_index = first->first;
  if (first->first > 0) {
    estimate.branch = UnboundedEstimate::Branch::kPositive;
    estimate.exhausted = first->second;
    estimate.value = grid.At(first->first) - 1;
    return estimate;
  }

  std::vector<double> negated(values.begin(), values.end());
  for (double& x : negated) x = -x;
  absl::StatusOr<std::pair<int64_t, bool>> second = internal::RunSignedSearch(
      negated, (1 - request.q) * n, request, runner);
  if (!second.ok()) return second.status();
  estimate.second_index = second->first;
  if (second->first > 0) {
    estimate.branch = UnboundedEstimate::Branch::kNegative;
    estimate.exhausted = second->second;
    estimate.value = -grid.At(second->first) + 1;
  }
  return estimate;
}

inline absl::StatusOr<UnboundedEstimate> EstimateQuantileUnbounded(
    std::span<const double> values, const QuantileRequest& request,
    RandomSource& rng) {
  return EstimateQuantileUnboundedWithRunner(values, request,
                                             PrivateRunner(request, rng));
}

// Two AboveThreshold calls composed.
inline absl::StatusOr<PrivacyGuarantee> GuaranteeForUnbounded(
    const QuantileRequest& request) {
  absl::StatusOr<PrivacyGuarantee> one = GuaranteeForRequest(request);
  if (!one.ok()) return one.status();
  const PrivacyGuarantee both[] = {*one, *one};
  return ComposeSequential(both);
}

// Small quantiles of upper-bounded data: negate, estimate quantile 1 - q with
// lower bound -upper_bound, negate back. Callers typically also lower beta.
template <typename Runner>
absl::StatusOr<QuantileEstimate> EstimateSmallQuantileInvertedWithRunner(
    std::span<const double> values, double upper_bound,
    const QuantileRequest& request, Runner&& runner) {
  std::vector<double> negated(values.begin(), values.end());
  for (double& x : negated) x = -x;
  absl::StatusOr<Dataset> data = Dataset::Create(std::move(negated),
                                                 -upper_bound);
  if (!data.ok()) return data.status();
  QuantileRequest mirrored = request;
  mirrored.q = 1 - request.q;
  absl::StatusOr<QuantileEstimate> estimate =
      EstimateQuantileWithRunner(*data, mirrored, runner);
  if (!estimate.ok()) return estimate.status();
  estimate->value = -estimate->value;
  return estimate;
}

inline absl::StatusOr<QuantileEstimate> EstimateSmallQuantileInverted(
    std::span<const double> values, double upper_bound,
    const QuantileRequest& request, RandomSource& rng) {
  return EstimateSmallQuantileInvertedWithRunner(values, upper_bound, request,
                                                 PrivateRunner(request, rng));
}

struct MultiQuantileResult {
  std::vector<double> values;       // one per requested quantile, in order
  std::vector<bool> empty_slice;    // estimate fell back to the slice bound
  std::vector<bool> exhausted;
  int depth = 0;
};

// Recursive splitting: estimate the middle quantile of the current slice,
// send values <= estimate left and the rest right, renormalize the remaining
// quantiles to each side's nominal mass, recurse. Processed level by level;
// every node's threshold at a level is fixed before any node at that level
// runs. The right side uses the split as its lower bound, the left side
// clamps outputs to the split, so outputs are nondecreasing in q.
template <typename Runner>
absl::StatusOr<MultiQuantileResult> EstimateMultipleQuantilesWithRunner(
    const Dataset& data, std::span<const double> qs,
    const QuantileRequest& request, Runner&& runner) {
  if (!data.lower_bound().has_value()) {
    return absl::InvalidArgumentError(
        "Multiple quantile estimation needs a declared lower bound");
  }
  if (qs.empty()) {
    return absl::InvalidArgumentError("Need at least one quantile");
  }
  for (size_t i = 0; i < qs.size(); ++i) {
    if (!(qs[i] > 0 && qs[i] < 1) || (i > 0 && !(qs[i] > qs[i - 1]))) {
      return absl::InvalidArgumentError(
          "Quantiles must be strictly increasing and inside (0, 1)");
    }
  }
  if (absl::Status status = request.Validate(); !status.ok()) return status;

  struct Node {
    size_t begin;  // quantile index range [begin, end)
    size_t end;
    double mass_lo;  // nominal quantile range covered by the slice
    double mass_hi;
    double lower;
    double upper;
    std::vector<double> slice;
  };
  MultiQuantileResult result;
  result.values.assign(qs.size(), 0.0);
  result.empty_slice.assign(qs.size(), false);
  result.exhausted.assign(qs.size(), false);

  std::vector<Node> level;
  level.push_back(Node{0, qs.size(), 0.0, 1.0, *data.lower_bound(),
                       std::numeric_limits<double>::infinity(),
                       std::vector<double>(data.values().begin(),
                                           data.values().end())});
  while (!level.empty()) {
    ++result.depth;
    std::vector<double> thresholds;
    thresholds.reserve(level.size());
    for (const Node& node : level) {
      const size_t mid = (node.begin + node.end) / 2;
      const double relative_q =
          (qs[mid] - node.mass_lo) / (node.mass_hi - node.mass_lo);
      thresholds.push_back(relative_q * static_cast<double>(node.slice.size()));
    }
    std::vector<Node> next;
    for (size_t n = 0; n < level.size(); ++n) {
      Node& node = level[n];
      const size_t mid = (node.begin + node.end) / 2;
      double split = node.lower;
      if (node.slice.empty()) {
        result.empty_slice[mid] = true;
      } else {
        absl::StatusOr<LogBucketHistogram> histogram =
            BuildHistogram(node.slice, request.beta, node.lower);
        if (!histogram.ok()) return histogram.status();
        QuantileRequest node_request = request;
        node_request.threshold_override = thresholds[n];
        absl::StatusOr<QuantileEstimate> estimate =
            EstimateQuantileFromHistogramWithRunner(*histogram, node_request,
                                                    runner);
        if (!estimate.ok()) return estimate.status();
        split = std::min(estimate->value, node.upper);
        result.exhausted[mid] = estimate->exhausted;
      }
      result.values[mid] = split;

      std::vector<double> left;
      std::vector<double> right;
      for (double x : node.slice) (x <= split ? left : right).push_back(x);
      if (node.begin < mid) {
        next.push_back(Node{node.begin, mid, node.mass_lo, qs[mid],
                            node.lower, split, std::move(left)});
      }
      if (mid + 1 < node.end) {
        next.push_back(Node{mid + 1, node.end, qs[mid], node.mass_hi, split,
                            node.upper, std::move(right)});
      }
    }
    level = std::move(next);
  }
  return result;
}

inline absl::StatusOr<MultiQuantileResult> EstimateMultipleQuantiles(
    const Dataset& data, std::span<const double> qs,
    const QuantileRequest& request, RandomSource& rng) {
  return EstimateMultipleQuantilesWithRunner(data, qs, request,
                                             PrivateRunner(request, rng));
}

}  // namespace dpq

#endif  // DPQ_QUANTILE_H_
