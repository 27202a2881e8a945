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

// AboveThreshold over a stream of sensitivity-bounded queries, plus the
// exact outcome distribution available when the noise is Gumbel and the
// iterative exponential mechanism that shares that distribution.
//
// Outcome indices are 1-based: halting at k means the k-th query drawn from
// the stream was the first to clear the noisy threshold. Callers with a
// different query numbering remap (see quantile.h).

#ifndef DPQ_SPARSE_VECTOR_H_
#define DPQ_SPARSE_VECTOR_H_

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "dpq/log_sum_exp.h"
#include "dpq/noise.h"
#include "dpq/random.h"

namespace dpq {

inline constexpr int64_t kDefaultMaxQueries = 200000;

// A lazily evaluated query sequence f_1(x), f_2(x), ... Each call to Next()
// yields the next query value. max_queries() caps how many values a run may
// draw; it is a contract on the caller, Next() beyond it is unspecified.
template <typename S>
concept QueryStream = requires(S& stream, const S& const_stream) {
  { stream.Next() } -> std::convertible_to<double>;
  { const_stream.sensitivity() } -> std::convertible_to<double>;
  { const_stream.monotonic() } -> std::convertible_to<bool>;
  { const_stream.max_queries() } -> std::convertible_to<int64_t>;
};

// Query stream over an explicit, finite list of values.
class ValueStream {
 public:
  explicit ValueStream(std::vector<double> values, double sensitivity = 1.0,
                       bool monotonic = false)
      : values_(std::move(values)),
        sensitivity_(sensitivity),
        monotonic_(monotonic) {}

  double Next() { return values_[position_++]; }
  double sensitivity() const { return sensitivity_; }
  bool monotonic() const { return monotonic_; }
  int64_t max_queries() const { return static_cast<int64_t>(values_.size()); }

  void Reset() { position_ = 0; }

 private:
  std::vector<double> values_;
  double sensitivity_;
  bool monotonic_;
  size_t position_ = 0;
};

struct SvtConfig {
  double eps1 = 0.5;  // threshold noise budget
  double eps2 = 0.5;  // per-query noise budget
  NoiseKind noise = NoiseKind::kExponential;
  double threshold = 0.0;

  absl::Status Validate() const {
    if (!std::isfinite(eps1) || eps1 <= 0 || !std::isfinite(eps2) ||
        eps2 <= 0) {
      return absl::InvalidArgumentError(absl::StrCat(
          "eps1 and eps2 must be finite and positive, got eps1=", eps1,
          " eps2=", eps2));
    }
    if (noise == NoiseKind::kGumbel && eps1 != eps2) {
      return absl::InvalidArgumentError(absl::StrCat(
          "Gumbel noise requires eps1 == eps2, got eps1=", eps1,
          " eps2=", eps2));
    }
    if (std::isnan(threshold)) {
      return absl::InvalidArgumentError("Threshold must not be NaN");
    }
    return absl::OkStatus();
  }
};

// Result of one AboveThreshold run: either the 1-based index of the halting
// query, or exhaustion after `index()` queries without halting.
class SvtOutcome {
 public:
  static SvtOutcome Halted(int64_t k) { return SvtOutcome(k, true); }
  static SvtOutcome Exhausted(int64_t cap) { return SvtOutcome(cap, false); }

  bool halted() const { return halted_; }
  bool exhausted() const { return !halted_; }
  int64_t index() const { return index_; }

  friend bool operator==(const SvtOutcome&, const SvtOutcome&) = default;

 private:
  SvtOutcome(int64_t index, bool halted) : index_(index), halted_(halted) {}

  int64_t index_;
  bool halted_;
};

// Runs AboveThreshold: T_hat = T + Noise(delta / eps1) once, then halts at the
// first k with f_k + Noise(delta / eps2) >= T_hat. Stops with Exhausted after
// stream.max_queries() queries, which is a legal outcome.
template <QueryStream S>
absl::StatusOr<SvtOutcome> RunAboveThreshold(S& stream, const SvtConfig& config,
                                             RandomSource& rng) {
  if (absl::Status status = config.Validate(); !status.ok()) return status;
  const double delta = stream.sensitivity();
  if (!std::isfinite(delta) || delta <= 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("Stream sensitivity must be positive, got ", delta));
  }
  const int64_t cap = stream.max_queries();
  if (cap < 1) {
    return absl::InvalidArgumentError("Query stream is empty");
  }
  const double threshold_scale = delta / config.eps1;
  const double query_scale = delta / config.eps2;
  const double noisy_threshold =
      config.threshold +
      internal::SampleNoise(config.noise, threshold_scale, rng);
  for (int64_t k = 1; k <= cap; ++k) {
    const double value = stream.Next();
    if (value + internal::SampleNoise(config.noise, query_scale, rng) >=
        noisy_threshold) {
      return SvtOutcome::Halted(k);
    }
  }
  return SvtOutcome::Exhausted(cap);
}

// Exact outcome distribution of Gumbel AboveThreshold with eps1 = eps2 = eps
// over the finite prefix `values`: halt[k-1] = P(halt at k), plus the
// probability of running past every value.
struct GumbelOutcomeDistribution {
  std::vector<double> halt;
  double no_halt = 1.0;
};

namespace internal {

inline absl::Status ValidateGumbelArgs(double eps, double delta) {
  if (!std::isfinite(eps) || eps <= 0 || !std::isfinite(delta) ||
      delta <= 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "eps and delta must be finite and positive, got eps=", eps,
        " delta=", delta));
  }
  return absl::OkStatus();
}

// log P(halt at k) for every k, in one pass. With s_i = (eps/delta) f_i and
// t = (eps/delta) T:
//   log P(k) = s_k - LSE(t, s_1..s_k) + t - LSE(t, s_1..s_{k-1}).
inline std::vector<double> GumbelLogHaltProbs(std::span<const double> values,
                                              double threshold, double eps,
                                              double delta,
                                              double* log_no_halt) {
  const double rate = eps / delta;
  const double t = rate * threshold;
  std::vector<double> log_probs;
  log_probs.reserve(values.size());
  double log_prefix = t;  // LSE(t, s_1..s_{k-1})
  for (double f : values) {
    const double s = rate * f;
    const double log_with_k = LogAddExp(log_prefix, s);
    log_probs.push_back(s - log_with_k + t - log_prefix);
    log_prefix = log_with_k;
  }
  if (log_no_halt != nullptr) *log_no_halt = t - log_prefix;
  return log_probs;
}

}  // namespace internal

inline absl::StatusOr<GumbelOutcomeDistribution> GumbelOutcomes(
    std::span<const double> values, double threshold, double eps,
    double delta) {
  if (absl::Status status = internal::ValidateGumbelArgs(eps, delta);
      !status.ok()) {
    return status;
  }
  double log_no_halt = 0.0;
  std::vector<double> log_probs = internal::GumbelLogHaltProbs(
      values, threshold, eps, delta, &log_no_halt);
  GumbelOutcomeDistribution result;
  result.halt.reserve(log_probs.size());
  for (double lp : log_probs) result.halt.push_back(std::exp(lp));
  result.no_halt = std::exp(log_no_halt);
  return result;
}

// P(Gumbel AboveThreshold halts at query k), 1 <= k <= values.size().
inline absl::StatusOr<double> GumbelOutcomePmf(std::span<const double> values,
                                               double threshold, double eps,
                                               double delta, int64_t k) {
  if (k < 1 || k > static_cast<int64_t>(values.size())) {
    return absl::OutOfRangeError(absl::StrCat(
        "Outcome index ", k, " outside [1, ", values.size(), "]"));
  }
  if (absl::Status status = internal::ValidateGumbelArgs(eps, delta);
      !status.ok()) {
    return status;
  }
  std::vector<double> log_probs = internal::GumbelLogHaltProbs(
      values.first(static_cast<size_t>(k)), threshold, eps, delta, nullptr);
  return std::exp(log_probs.back());
}

// P(Gumbel AboveThreshold passes every value without halting). 1 for an
// empty sequence.
inline absl::StatusOr<double> GumbelNoHaltProb(std::span<const double> values,
                                               double threshold, double eps,
                                               double delta) {
  if (absl::Status status = internal::ValidateGumbelArgs(eps, delta);
      !status.ok()) {
    return status;
  }
  double log_no_halt = 0.0;
  internal::GumbelLogHaltProbs(values, threshold, eps, delta, &log_no_halt);
  return std::exp(log_no_halt);
}

// Samples from the exponential mechanism over `scores` with probabilities
// proportional to exp(eps * score / (2 * delta)). Inverse CDF with a single
// uniform draw, normalized in log space.
inline size_t SampleExponentialMechanism(std::span<const double> scores,
                                         double eps, double delta,
                                         RandomSource& rng) {
  const double rate = eps / (2.0 * delta);
  std::vector<double> logits(scores.size());
  for (size_t j = 0; j < scores.size(); ++j) logits[j] = rate * scores[j];
  const double log_total = LogSumExp(logits);
  const double u = rng.UniformOpen();
  double cumulative = 0.0;
  for (size_t j = 0; j < logits.size(); ++j) {
    cumulative += std::exp(logits[j] - log_total);
    if (u < cumulative) return j;
  }
  return logits.size() - 1;
}

// At step i, runs the exponential mechanism over {0, ..., i} with score T for
// 0 and f_j for j > 0; halts when i itself is selected. Step i costs O(i).
template <QueryStream S>
absl::StatusOr<SvtOutcome> RunIterativeExponentialMechanism(S& stream,
                                                            double threshold,
                                                            double eps,
                                                            RandomSource& rng) {
  const double delta = stream.sensitivity();
  if (absl::Status status = internal::ValidateGumbelArgs(eps, delta);
      !status.ok()) {
    return status;
  }
  const int64_t cap = stream.max_queries();
  if (cap < 1) {
    return absl::InvalidArgumentError("Query stream is empty");
  }
  std::vector<double> scores = {threshold};
  for (int64_t i = 1; i <= cap; ++i) {
    scores.push_back(stream.Next());
    if (SampleExponentialMechanism(scores, eps, delta, rng) ==
        static_cast<size_t>(i)) {
      return SvtOutcome::Halted(i);
    }
  }
  return SvtOutcome::Exhausted(cap);
}

}  // namespace dpq

#endif  // DPQ_SPARSE_VECTOR_H_
