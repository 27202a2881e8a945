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

// Privacy guarantees for AboveThreshold configurations.
//
// Two views are provided. GuaranteeFor gives the closed-form bounds per query
// class. OneSidedLoss evaluates the per-pair loss on explicit query values,
// which is what the closed forms bound; tests drive it over generated neighbor
// pairs. EmpiricalDpCheck estimates outcome likelihood ratios by simulation.

#ifndef DPQ_PRIVACY_ACCOUNTING_H_
#define DPQ_PRIVACY_ACCOUNTING_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/string_view.h"
#include "dpq/noise.h"
#include "dpq/parallel.h"
#include "dpq/random.h"
#include "dpq/sparse_vector.h"

namespace dpq {

enum class NeighborModel { kSwap, kAddSubtract };

inline absl::string_view NeighborModelName(NeighborModel model) {
  return model == NeighborModel::kSwap ? "swap" : "add-subtract";
}

inline absl::StatusOr<NeighborModel> ParseNeighborModel(absl::string_view name) {
  if (name == "swap") return NeighborModel::kSwap;
  if (name == "add-subtract" || name == "add_subtract") {
    return NeighborModel::kAddSubtract;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "Unknown neighbor model '", name, "'; expected swap or add-subtract"));
}

enum class QueryClass {
  kGeneral,
  kMonotonic,
  // |{x_j : x_j - l + 1 < beta^i}| - qn under add/remove neighbors.
  kCountMinusQn,
  // Counting queries with a threshold fixed in advance, add/remove neighbors.
  kFixedThresholdCount,
};

inline absl::string_view QueryClassName(QueryClass query_class) {
  switch (query_class) {
    case QueryClass::kGeneral:
      return "general";
    case QueryClass::kMonotonic:
      return "monotonic";
    case QueryClass::kCountMinusQn:
      return "count-minus-qn";
    case QueryClass::kFixedThresholdCount:
      return "fixed-threshold-count";
  }
  return "unknown";
}

inline absl::StatusOr<QueryClass> ParseQueryClass(absl::string_view name) {
  for (QueryClass c :
       {QueryClass::kGeneral, QueryClass::kMonotonic,
        QueryClass::kCountMinusQn, QueryClass::kFixedThresholdCount}) {
    if (name == QueryClassName(c)) return c;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "Unknown query class '", name,
      "'; expected general, monotonic, count-minus-qn or "
      "fixed-threshold-count"));
}

inline double ZcdpFromDp(double eps) { return 0.5 * eps * eps; }
inline double ZcdpFromRangeBounded(double gamma) { return gamma * gamma / 8.0; }

// Any subset of the three bounds may be known for a mechanism.
struct PrivacyGuarantee {
  std::optional<double> eps_dp;
  std::optional<double> rho_zcdp;
  std::optional<double> gamma_range_bounded;

  // Fills rho with the tightest conversion available from the other fields.
  PrivacyGuarantee& DeriveZcdp() {
    std::optional<double> best = rho_zcdp;
    auto consider = [&best](double rho) {
      if (!best.has_value() || rho < *best) best = rho;
    };
    if (eps_dp.has_value()) consider(ZcdpFromDp(*eps_dp));
    if (gamma_range_bounded.has_value()) {
      consider(ZcdpFromRangeBounded(*gamma_range_bounded));
    }
    rho_zcdp = best;
    return *this;
  }
};

namespace internal {

inline absl::Status ValidateBudgets(double eps1, double eps2) {
  if (!std::isfinite(eps1) || eps1 <= 0 || !std::isfinite(eps2) ||
      eps2 <= 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "eps1 and eps2 must be finite and positive, got eps1=", eps1,
        " eps2=", eps2));
  }
  return absl::OkStatus();
}

}  // namespace internal

// One-sided loss of AboveThreshold for the ordered pair (x, x'):
//
//   max_k [ (eps1/delta) D_k + (eps2/delta) max{0, D_k - (f_k(x') - f_k(x))} ]
//   D_k = max_{i<k} max{0, f_i(x') - f_i(x)},   D_1 = 0.
//
// With `gumbel_relaxation` the inner max with 0 is dropped for k >= 2 inside
// the query term only, which is sound for Gumbel noise with eps1 == eps2.
inline absl::StatusOr<double> OneSidedLoss(std::span<const double> f_on_x,
                                           std::span<const double> f_on_xprime,
                                           double eps1, double eps2,
                                           double delta,
                                           bool gumbel_relaxation = false) {
  if (f_on_x.size() != f_on_xprime.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("Query sequences differ in length: ", f_on_x.size(),
                     " vs ", f_on_xprime.size()));
  }
  if (!std::isfinite(delta) || delta <= 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("Sensitivity must be positive, got ", delta));
  }
  if (absl::Status status = internal::ValidateBudgets(eps1, eps2);
      !status.ok()) {
    return status;
  }
  double loss = 0.0;
  double prior_gap = 0.0;  // D_k
  for (size_t k = 0; k < f_on_x.size(); ++k) {
    const double shift = f_on_xprime[k] - f_on_x[k];
    // The threshold factor never exceeds 1 when D_k < 0, so that term keeps
    // its floor at 0 even under the relaxation.
    const double term = (eps1 / delta) * std::max(0.0, prior_gap) +
                        (eps2 / delta) * std::max(0.0, prior_gap - shift);
    loss = std::max(loss, term);
    if (gumbel_relaxation) {
      prior_gap = k == 0 ? shift : std::max(prior_gap, shift);
    } else {
      prior_gap = std::max(prior_gap, std::max(0.0, shift));
    }
  }
  return loss;
}

// eps(x, x') + eps(x', x): the range-bounded parameter for this pair.
inline absl::StatusOr<double> RangeBoundedOfPair(
    std::span<const double> f_on_x, std::span<const double> f_on_xprime,
    double eps1, double eps2, double delta) {
  absl::StatusOr<double> forward =
      OneSidedLoss(f_on_x, f_on_xprime, eps1, eps2, delta);
  if (!forward.ok()) return forward.status();
  absl::StatusOr<double> backward =
      OneSidedLoss(f_on_xprime, f_on_x, eps1, eps2, delta);
  if (!backward.ok()) return backward.status();
  return *forward + *backward;
}

// Closed-form guarantee of a single AboveThreshold run.
//
//   General              eps1 + 2 eps2 DP
//   Monotonic            eps1 + eps2 DP, (eps1 + 2 eps2)-range-bounded,
//                        so 1/2 (eps1/2 + eps2)^2 zCDP
//   CountMinusQn         max{(1-q) eps1, q eps1 + eps2} DP; with Gumbel also
//                        (eps1 + eps2)-range-bounded
//   FixedThresholdCount  max{eps1, eps2} DP, (eps1 + eps2)-range-bounded
//
// The last two describe add/remove neighbors and reject kSwap.
inline absl::StatusOr<PrivacyGuarantee> GuaranteeFor(
    QueryClass query_class, NeighborModel neighbor, NoiseKind noise,
    double eps1, double eps2, std::optional<double> q = std::nullopt) {
  if (absl::Status status = internal::ValidateBudgets(eps1, eps2);
      !status.ok()) {
    return status;
  }
  if (noise == NoiseKind::kGumbel && eps1 != eps2) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Gumbel noise requires eps1 == eps2, got eps1=", eps1,
        " eps2=", eps2));
  }
  PrivacyGuarantee guarantee;
  switch (query_class) {
    case QueryClass::kGeneral:
      guarantee.eps_dp = eps1 + 2 * eps2;
      break;
    case QueryClass::kMonotonic:
      guarantee.eps_dp = eps1 + eps2;
      guarantee.gamma_range_bounded = eps1 + 2 * eps2;
      break;
    case QueryClass::kCountMinusQn:
      if (neighbor != NeighborModel::kAddSubtract) {
        return absl::InvalidArgumentError(
            "count-minus-qn queries are defined for add-subtract neighbors");
      }
      if (!q.has_value() || !(*q >= 0 && *q <= 1)) {
        return absl::InvalidArgumentError(
            "count-minus-qn queries need a quantile q in [0, 1]");
      }
      guarantee.eps_dp = std::max((1 - *q) * eps1, *q * eps1 + eps2);
      if (noise == NoiseKind::kGumbel) {
        guarantee.gamma_range_bounded = eps1 + eps2;
      }
      break;
    case QueryClass::kFixedThresholdCount:
      if (neighbor != NeighborModel::kAddSubtract) {
        return absl::InvalidArgumentError(
            "fixed-threshold-count queries are defined for add-subtract "
            "neighbors");
      }
      guarantee.eps_dp = std::max(eps1, eps2);
      guarantee.gamma_range_bounded = eps1 + eps2;
      break;
  }
  guarantee.DeriveZcdp();
  return guarantee;
}

// zCDP composes additively.
inline absl::StatusOr<double> ComposeZcdp(std::span<const double> rhos) {
  double total = 0.0;
  for (double rho : rhos) {
    if (!(rho >= 0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("rho must be nonnegative, got ", rho));
    }
    total += rho;
  }
  return total;
}

// Sequential composition: DP budgets add, zCDP adds. A bound is reported
// only if every part carries it. Range-boundedness is not composed.
inline PrivacyGuarantee ComposeSequential(
    std::span<const PrivacyGuarantee> parts) {
  PrivacyGuarantee total;
  total.eps_dp = 0.0;
  total.rho_zcdp = 0.0;
  for (const PrivacyGuarantee& part : parts) {
    if (total.eps_dp && part.eps_dp) {
      *total.eps_dp += *part.eps_dp;
    } else {
      total.eps_dp.reset();
    }
    if (total.rho_zcdp && part.rho_zcdp) {
      *total.rho_zcdp += *part.rho_zcdp;
    } else {
      total.rho_zcdp.reset();
    }
  }
  return total;
}

// Number of levels in binary recursive splitting of m quantiles:
// ceil(log2(m + 1)).
inline int MultiQuantileLevels(int64_t num_quantiles) {
  int levels = 0;
  while ((int64_t{1} << levels) < num_quantiles + 1) ++levels;
  return levels;
}

struct MultiQuantileAccounting {
  int compositions = 0;
  int log_base = 2;
  PrivacyGuarantee per_level;
  PrivacyGuarantee total;
};

// Cost of estimating m quantiles by recursive splitting with UQE. Per level,
// swap neighbors change one partition (one monotonic run); add/remove
// neighbors change two partitions, each a fixed-threshold counting run.
inline absl::StatusOr<MultiQuantileAccounting> MultiQuantileGuarantee(
    int64_t num_quantiles, NeighborModel neighbor, NoiseKind noise,
    double eps1, double eps2) {
  if (num_quantiles < 1) {
    return absl::InvalidArgumentError("Need at least one quantile");
  }
  MultiQuantileAccounting accounting;
  accounting.compositions = MultiQuantileLevels(num_quantiles);
  if (neighbor == NeighborModel::kSwap) {
    absl::StatusOr<PrivacyGuarantee> run =
        GuaranteeFor(QueryClass::kMonotonic, neighbor, noise, eps1, eps2);
    if (!run.ok()) return run.status();
    accounting.per_level = *run;
  } else {
    absl::StatusOr<PrivacyGuarantee> run = GuaranteeFor(
        QueryClass::kFixedThresholdCount, neighbor, noise, eps1, eps2);
    if (!run.ok()) return run.status();
    const PrivacyGuarantee pair[] = {*run, *run};
    accounting.per_level = ComposeSequential(pair);
  }
  std::vector<PrivacyGuarantee> levels(accounting.compositions,
                                       accounting.per_level);
  accounting.total = ComposeSequential(levels);
  return accounting;
}

// Empirical check of an eps-DP claim between two inputs x and x'.
struct OutcomeRatio {
  int64_t outcome = 0;  // 1..K halting index, K + 1 lumps later halts and
                        // exhaustion
  int64_t count_x = 0;
  int64_t count_xprime = 0;
  double log_ratio = 0.0;        // point estimate, max over both directions
  double log_ratio_lower = 0.0;  // lower confidence bound of the same
};

struct EmpiricalDpReport {
  double claimed_eps = 0.0;
  int64_t trials = 0;
  double max_log_ratio = 0.0;
  double max_log_ratio_lower = 0.0;
  bool pass = false;
  std::vector<OutcomeRatio> outcomes;
};

inline constexpr int64_t kMinEmpiricalDpTrials = 100000;

namespace internal {

// Wilson score interval for a binomial proportion.
inline std::pair<double, double> WilsonInterval(int64_t successes,
                                                int64_t trials, double z) {
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2 * n)) / denom;
  const double half =
      z / denom * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace internal

// Runs each mechanism `trials` times and compares outcome frequencies.
// Outcomes past `max_outcome` are lumped with exhaustion; truncation is
// post-processing and does not change the claim. The check fails only when
// some log-ratio's lower confidence bound (Wilson, z standard errors)
// exceeds `claimed_eps`.
//
// run_x and run_xprime map a RandomSource& to absl::StatusOr<SvtOutcome> and
// must be safe to call concurrently.
template <typename RunX, typename RunXPrime>
absl::StatusOr<EmpiricalDpReport> EmpiricalDpCheck(
    RunX&& run_x, RunXPrime&& run_xprime, double claimed_eps, int64_t trials,
    int64_t max_outcome, uint64_t seed, double z = 4.0) {
  if (trials < kMinEmpiricalDpTrials) {
    return absl::InvalidArgumentError(
        absl::StrCat("Empirical DP checks need at least ",
                     kMinEmpiricalDpTrials, " trials, got ", trials));
  }
  if (max_outcome < 1) {
    return absl::InvalidArgumentError("max_outcome must be at least 1");
  }
  constexpr int64_t kChunks = 64;
  const int64_t buckets = max_outcome + 1;
  std::vector<std::vector<int64_t>> counts_x(kChunks,
                                             std::vector<int64_t>(buckets));
  std::vector<std::vector<int64_t>> counts_xp(kChunks,
                                              std::vector<int64_t>(buckets));
  std::vector<absl::Status> errors(kChunks);
  auto bucket_of = [max_outcome](const SvtOutcome& outcome) {
    return outcome.halted() && outcome.index() <= max_outcome
               ? outcome.index() - 1
               : max_outcome;
  };
  ParallelFor(kChunks, [&](int64_t chunk) {
    const int64_t begin = trials * chunk / kChunks;
    const int64_t end = trials * (chunk + 1) / kChunks;
    RandomSource rng_x(seed, 2 * chunk);
    RandomSource rng_xp(seed, 2 * chunk + 1);
    for (int64_t t = begin; t < end; ++t) {
      absl::StatusOr<SvtOutcome> a = run_x(rng_x);
      absl::StatusOr<SvtOutcome> b = run_xprime(rng_xp);
      if (!a.ok() || !b.ok()) {
        errors[chunk] = a.ok() ? b.status() : a.status();
        return;
      }
      ++counts_x[chunk][bucket_of(*a)];
      ++counts_xp[chunk][bucket_of(*b)];
    }
  });
  for (const absl::Status& status : errors) {
    if (!status.ok()) return status;
  }

  EmpiricalDpReport report;
  report.claimed_eps = claimed_eps;
  report.trials = trials;
  for (int64_t b = 0; b < buckets; ++b) {
    OutcomeRatio ratio;
    ratio.outcome = b + 1;
    for (int64_t chunk = 0; chunk < kChunks; ++chunk) {
      ratio.count_x += counts_x[chunk][b];
      ratio.count_xprime += counts_xp[chunk][b];
    }
    if (ratio.count_x == 0 && ratio.count_xprime == 0) continue;
    const auto [lo_x, hi_x] =
        internal::WilsonInterval(ratio.count_x, trials, z);
    const auto [lo_xp, hi_xp] =
        internal::WilsonInterval(ratio.count_xprime, trials, z);
    const double log_x = std::log(static_cast<double>(ratio.count_x));
    const double log_xp = std::log(static_cast<double>(ratio.count_xprime));
    ratio.log_ratio = std::abs(log_x - log_xp);
    ratio.log_ratio_lower = std::max(
        {0.0, std::log(lo_x) - std::log(hi_xp), std::log(lo_xp) - std::log(hi_x)});
    report.max_log_ratio = std::max(report.max_log_ratio, ratio.log_ratio);
    report.max_log_ratio_lower =
        std::max(report.max_log_ratio_lower, ratio.log_ratio_lower);
    report.outcomes.push_back(ratio);
  }
  report.pass = report.max_log_ratio_lower <= claimed_eps;
  return report;
}

}  // namespace dpq

#endif  // DPQ_PRIVACY_ACCOUNTING_H_
