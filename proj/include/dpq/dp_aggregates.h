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

// Clipped sum and mean of nonnegative data. A private high quantile picks
// the clip bound with budget eps; the clipped sum then gets Lap(clip / eps)
// noise. Total cost 2 eps.

#ifndef DPQ_DP_AGGREGATES_H_
#define DPQ_DP_AGGREGATES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/string_view.h"
#include "dpq/emq.h"
#include "dpq/noise.h"
#include "dpq/privacy_accounting.h"
#include "dpq/quantile.h"
#include "dpq/random.h"

namespace dpq {

enum class QuantileMethod { kUqe, kEmq };

inline absl::string_view QuantileMethodName(QuantileMethod method) {
  return method == QuantileMethod::kUqe ? "uqe" : "emq";
}

inline absl::StatusOr<QuantileMethod> ParseQuantileMethod(
    absl::string_view name) {
  if (name == "uqe") return QuantileMethod::kUqe;
  if (name == "emq") return QuantileMethod::kEmq;
  return absl::InvalidArgumentError(
      absl::StrCat("Unknown quantile method '", name, "'; expected uqe or emq"));
}

// How UQE's threshold is set when it picks the clip bound.
enum class ClipThreshold {
  kQuantile,            // T = q n
  kCount,               // T = n
  kCountPlusInverseEps  // T = n + 1 / eps
};

struct SumConfig {
  double q = 0.99;
  double eps = 1.0;  // per stage
  QuantileMethod method = QuantileMethod::kUqe;
  // UQE: eps1 = eps2 = eps / 2 and lower bound 0.
  double beta = kDefaultBeta;
  NoiseKind noise = NoiseKind::kExponential;
  int64_t max_queries = kDefaultMaxQueries;
  ClipThreshold threshold = ClipThreshold::kQuantile;
  // EMQ's assumed range; also scales the clip floor.
  BoundedRange range{0.0, 10000.0};

  absl::Status Validate() const {
    if (!(q > 0 && q <= 1)) {
      return absl::InvalidArgumentError(
          absl::StrCat("Clipping quantile must lie in (0, 1], got ", q));
    }
    if (!std::isfinite(eps) || eps <= 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("eps must be finite and positive, got ", eps));
    }
    if (method == QuantileMethod::kEmq) return range.Validate();
    return absl::OkStatus();
  }

  QuantileRequest UqeRequest(int64_t n) const {
    QuantileRequest request;
    request.q = q;
    request.eps1 = eps / 2;
    request.eps2 = eps / 2;
    request.beta = beta;
    request.noise = noise;
    request.max_queries = max_queries;
    if (threshold == ClipThreshold::kCount) {
      request.threshold_override = static_cast<double>(n);
    } else if (threshold == ClipThreshold::kCountPlusInverseEps) {
      request.threshold_override = static_cast<double>(n) + 1.0 / eps;
    }
    return request;
  }
};

struct SumResult {
  double estimate = 0.0;
  double clip = 0.0;
  double clipped_sum = 0.0;
  double epsilon_total = 0.0;
  bool clip_clamped = false;  // private clip was <= 0 and raised to the floor
  bool quantile_exhausted = false;
};

inline double ClippedSum(std::span<const double> values, double clip) {
  double sum = 0.0;
  for (double x : values) sum += std::min(x, clip);
  return sum;
}

// Lap(clip / eps) + sum_j min(x_j, clip), for a clip chosen elsewhere.
inline double NoisyClippedSum(std::span<const double> values, double clip,
                              double eps, RandomSource& rng) {
  return ClippedSum(values, clip) + internal::SampleLaplace(clip / eps, rng);
}

// Budget of the whole procedure: the quantile stage plus the noise stage.
inline absl::StatusOr<double> SumEpsilonTotal(const SumConfig& config,
                                              int64_t n) {
  double quantile_eps = config.eps;
  if (config.method == QuantileMethod::kUqe) {
    const QuantileRequest request = config.UqeRequest(n);
    absl::StatusOr<PrivacyGuarantee> guarantee = GuaranteeForRequest(request);
    if (!guarantee.ok()) return guarantee.status();
    quantile_eps = guarantee->eps_dp.value_or(config.eps);
  }
  PrivacyGuarantee stages[] = {PrivacyGuarantee{quantile_eps, {}, {}},
                               PrivacyGuarantee{config.eps, {}, {}}};
  return *ComposeSequential(stages).eps_dp;
}

struct ClipResult {
  double clip = 0.0;
  bool clamped = false;
  bool exhausted = false;
};

// The quantile stage alone: a private clip bound for nonnegative values,
// raised to a small positive floor if it came out <= 0.
inline absl::StatusOr<ClipResult> PrivateClip(std::span<const double> values,
                                              const SumConfig& config,
                                              RandomSource& rng) {
  const int64_t n = static_cast<int64_t>(values.size());
  ClipResult result;
  if (config.method == QuantileMethod::kUqe) {
    absl::StatusOr<LogBucketHistogram> histogram =
        BuildHistogram(values, config.beta, 0.0);
    if (!histogram.ok()) return histogram.status();
    absl::StatusOr<QuantileEstimate> estimate =
        EstimateQuantileFromHistogram(*histogram, config.UqeRequest(n), rng);
    if (!estimate.ok()) return estimate.status();
    result.clip = estimate->value;
    result.exhausted = estimate->exhausted;
  } else {
    absl::StatusOr<double> estimate =
        EmqEstimate(values, config.range, config.q, config.eps, rng);
    if (!estimate.ok()) return estimate.status();
    result.clip = *estimate;
  }
  if (!(result.clip > 0)) {
    const double width =
        config.method == QuantileMethod::kEmq ? config.range.width() : 1.0;
    result.clip = width * 1e-9;
    result.clamped = true;
  }
  return result;
}

inline absl::Status ValidateSumInput(std::span<const double> values) {
  if (values.empty()) {
    return absl::InvalidArgumentError("Dataset must not be empty");
  }
  for (size_t j = 0; j < values.size(); ++j) {
    if (!(values[j] >= 0) || !std::isfinite(values[j])) {
      return absl::InvalidArgumentError(absl::StrCat(
          "Sum needs finite nonnegative values; position ", j, " holds ",
          values[j]));
    }
  }
  return absl::OkStatus();
}

inline absl::StatusOr<SumResult> DpSum(std::span<const double> values,
                                       const SumConfig& config,
                                       RandomSource& rng) {
  if (absl::Status status = config.Validate(); !status.ok()) return status;
  if (absl::Status status = ValidateSumInput(values); !status.ok()) {
    return status;
  }
  absl::StatusOr<ClipResult> clip = PrivateClip(values, config, rng);
  if (!clip.ok()) return clip.status();
  SumResult result;
  result.clip = clip->clip;
  result.clip_clamped = clip->clamped;
  result.quantile_exhausted = clip->exhausted;
  result.clipped_sum = ClippedSum(values, result.clip);
  result.estimate = result.clipped_sum +
                    internal::SampleLaplace(result.clip / config.eps, rng);
  absl::StatusOr<double> total =
      SumEpsilonTotal(config, static_cast<int64_t>(values.size()));
  if (!total.ok()) return total.status();
  result.epsilon_total = *total;
  return result;
}

// DpSum / n; n is public under swap neighbors.
inline absl::StatusOr<SumResult> DpMean(std::span<const double> values,
                                        const SumConfig& config,
                                        RandomSource& rng) {
  absl::StatusOr<SumResult> sum = DpSum(values, config, rng);
  if (!sum.ok()) return sum.status();
  const double n = static_cast<double>(values.size());
  sum->estimate /= n;
  sum->clipped_sum /= n;
  return sum;
}

}  // namespace dpq

#endif  // DPQ_DP_AGGREGATES_H_
