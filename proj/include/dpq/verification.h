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

// Named property suites run with fixed seeds. Each returns a report whose
// entries record what was compared and whether it held; a failed property
// is a report entry, not an error.
//
//   gumbel-closed-form  Monte Carlo halting frequencies vs the closed form
//   em-equivalence      iterative exponential mechanism vs Gumbel
//                       AboveThreshold, algebraically and by sampling
//   dp-ratio            guarantee formulas, one-sided loss bounds on
//                       generated neighbor pairs, empirical likelihood ratios
//   histogram-oracle    histogram prefix counts vs direct scans
//   noiseless-oracle    noise-free UQE vs a brute-force minimal-k scan

#ifndef DPQ_VERIFICATION_H_
#define DPQ_VERIFICATION_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/string_view.h"
#include "dpq/log_histogram.h"
#include "dpq/noise.h"
#include "dpq/privacy_accounting.h"
#include "dpq/quantile.h"
#include "dpq/random.h"
#include "dpq/sparse_vector.h"
#include "dpq/testing/noiseless.h"
#include "dpq/testing/oracles.h"
#include "nlohmann/json.hpp"

namespace dpq {

struct VerificationEntry {
  std::string label;
  bool pass = false;
  std::string detail;
};

struct VerificationReport {
  std::string suite;
  std::vector<VerificationEntry> entries;

  bool pass() const {
    return !entries.empty() &&
           std::all_of(entries.begin(), entries.end(),
                       [](const VerificationEntry& e) { return e.pass; });
  }

  void Add(std::string label, bool pass, std::string detail) {
    entries.push_back({std::move(label), pass, std::move(detail)});
  }

  nlohmann::json ToJson() const {
    nlohmann::json out = {{"suite", suite}, {"pass", pass()}};
    out["entries"] = nlohmann::json::array();
    for (const VerificationEntry& entry : entries) {
      out["entries"].push_back(
          {{"label", entry.label}, {"pass", entry.pass}, {"detail", entry.detail}});
    }
    return out;
  }
};

struct VerificationOptions {
  uint64_t seed = 20240601;
  int64_t trials = 1000000;  // Monte Carlo runs per instance
  double z = 4.0;            // standard errors allowed per outcome
};

inline constexpr std::array<absl::string_view, 5> kVerificationSuites = {
    "gumbel-closed-form", "em-equivalence", "dp-ratio", "histogram-oracle",
    "noiseless-oracle"};

namespace internal {

inline std::vector<double> UniformValues(int64_t k, double lo, double hi,
                                         RandomSource& rng) {
  std::vector<double> values(k);
  for (double& v : values) v = rng.Uniform(lo, hi);
  return values;
}

inline std::vector<double> WithResidual(const GumbelOutcomeDistribution& d) {
  std::vector<double> expected = d.halt;
  expected.push_back(d.no_halt);
  return expected;
}

inline std::function<SvtOutcome(RandomSource&)> GumbelSvtRun(
    std::vector<double> values, double threshold, double eps) {
  return [values = std::move(values), threshold, eps](RandomSource& rng) {
    ValueStream stream(values);
    SvtConfig config{eps, eps, NoiseKind::kGumbel, threshold};
    return *RunAboveThreshold(stream, config, rng);
  };
}

inline VerificationReport GumbelClosedFormSuite(
    const VerificationOptions& options) {
  VerificationReport report{"gumbel-closed-form", {}};
  RandomSource rng(options.seed, 0);
  for (int instance = 0; instance < 20; ++instance) {
    const int64_t k = 1 + static_cast<int64_t>(rng.UniformIndex(6));
    std::vector<double> values = UniformValues(k, -3.0, 3.0, rng);
    const double threshold = rng.Uniform(-3.0, 3.0);
    const std::vector<double> expected =
        WithResidual(*GumbelOutcomes(values, threshold, 1.0, 1.0));
    const std::vector<int64_t> counts = testing::OutcomeCounts(
        GumbelSvtRun(values, threshold, 1.0), options.trials, k,
        options.seed + 1 + static_cast<uint64_t>(instance));
    const double worst =
        testing::MaxStandardizedDeviation(counts, expected, options.trials);
    report.Add(absl::StrCat("instance ", instance, " (K=", k, ")"),
               worst <= options.z,
               absl::StrCat("max standardized deviation ", worst));
  }
  return report;
}

inline VerificationReport EmEquivalenceSuite(
    const VerificationOptions& options) {
  VerificationReport report{"em-equivalence", {}};
  RandomSource rng(options.seed, 1);
  double worst_gap = 0.0;
  for (int instance = 0; instance < 1000; ++instance) {
    const int64_t k = 1 + static_cast<int64_t>(rng.UniformIndex(8));
    const std::vector<double> values = UniformValues(k, -3.0, 3.0, rng);
    const double threshold = rng.Uniform(-3.0, 3.0);
    const double eps = rng.Uniform(0.1, 2.0);
    const std::vector<double> product =
        testing::ProductFormHaltProbs(values, threshold, eps / 2.0);
    const GumbelOutcomeDistribution closed =
        *GumbelOutcomes(values, threshold, eps / 2.0, 1.0);
    for (int64_t j = 0; j < k; ++j) {
      worst_gap = std::max(worst_gap, std::fabs(product[j] - closed.halt[j]));
    }
  }
  report.Add("product form vs closed form, 1000 instances", worst_gap <= 1e-12,
             absl::StrCat("max abs difference ", worst_gap));

  for (int instance = 0; instance < 5; ++instance) {
    const int64_t k = 2 + static_cast<int64_t>(rng.UniformIndex(5));
    const std::vector<double> values = UniformValues(k, -3.0, 3.0, rng);
    const double threshold = rng.Uniform(-3.0, 3.0);
    const double eps = 1.0;
    const std::vector<double> expected =
        WithResidual(*GumbelOutcomes(values, threshold, eps / 2, 1.0));
    const uint64_t seed = options.seed + 100 + 2 * instance;
    const std::vector<int64_t> em_counts = testing::OutcomeCounts(
        [&](RandomSource& r) {
          ValueStream stream(values);
          return *RunIterativeExponentialMechanism(stream, threshold, eps, r);
        },
        options.trials, k, seed);
    const std::vector<int64_t> svt_counts = testing::OutcomeCounts(
        GumbelSvtRun(values, threshold, eps / 2), options.trials, k, seed + 1);
    // Two-sample comparison with the closed form as the common proportion.
    double worst = 0.0;
    const double n = static_cast<double>(options.trials);
    for (size_t j = 0; j < expected.size(); ++j) {
      const double p = expected[j];
      const double se = std::sqrt(2.0 * p * (1 - p) / n);
      const double diff =
          std::fabs(static_cast<double>(em_counts[j] - svt_counts[j])) / n;
      worst = std::max(worst, se > 0 ? diff / se : (diff > 0 ? INFINITY : 0.0));
    }
    const double em_dev = testing::MaxStandardizedDeviation(em_counts, expected,
                                                            options.trials);
    const double svt_dev = testing::MaxStandardizedDeviation(
        svt_counts, expected, options.trials);
    report.Add(absl::StrCat("sampled instance ", instance, " (K=", k, ")"),
               worst <= options.z && em_dev <= options.z &&
                   svt_dev <= options.z,
               absl::StrCat("two-sample ", worst, ", em vs closed ", em_dev,
                            ", svt vs closed ", svt_dev));
  }
  return report;
}

// Neighbor query pairs with per-query difference in [-1, 1]; monotonic
// pairs share one sign.
inline std::pair<std::vector<double>, std::vector<double>> NeighborPair(
    int64_t k, bool monotonic, RandomSource& rng) {
  std::vector<double> fx(k);
  std::vector<double> fxp(k);
  const double sign = rng.Uniform() < 0.5 ? -1.0 : 1.0;
  for (int64_t i = 0; i < k; ++i) {
    fx[i] = std::floor(rng.Uniform(-5.0, 6.0));
    const double d = monotonic ? sign * rng.Uniform() : rng.Uniform(-1.0, 1.0);
    // Integer shifts are the extremes; keep a share of them.
    fxp[i] = fx[i] + (rng.Uniform() < 0.5 ? std::round(d) : d);
  }
  return {fx, fxp};
}

inline VerificationReport DpRatioSuite(const VerificationOptions& options) {
  VerificationReport report{"dp-ratio", {}};
  RandomSource rng(options.seed, 2);

  // Guarantee formulas on a small grid.
  bool formulas_ok = true;
  std::string formula_detail = "all match";
  for (double e1 : {0.1, 0.5, 1.0, 2.0}) {
    for (double e2 : {0.1, 0.5, 1.0, 2.0}) {
      for (double q : {0.0, 0.25, 0.5, 0.99}) {
        const PrivacyGuarantee general = *GuaranteeFor(
            QueryClass::kGeneral, NeighborModel::kSwap, NoiseKind::kLaplace, e1,
            e2);
        const PrivacyGuarantee monotonic = *GuaranteeFor(
            QueryClass::kMonotonic, NeighborModel::kSwap,
            NoiseKind::kExponential, e1, e2);
        const PrivacyGuarantee count = *GuaranteeFor(
            QueryClass::kCountMinusQn, NeighborModel::kAddSubtract,
            NoiseKind::kExponential, e1, e2, q);
        const PrivacyGuarantee fixed = *GuaranteeFor(
            QueryClass::kFixedThresholdCount, NeighborModel::kAddSubtract,
            NoiseKind::kExponential, e1, e2);
        const bool ok =
            *general.eps_dp == e1 + 2 * e2 && *monotonic.eps_dp == e1 + e2 &&
            std::fabs(*monotonic.rho_zcdp -
                      0.5 * (e1 / 2 + e2) * (e1 / 2 + e2)) <= 1e-15 &&
            *count.eps_dp == std::max((1 - q) * e1, q * e1 + e2) &&
            *fixed.eps_dp == std::max(e1, e2);
        if (!ok && formulas_ok) {
          formulas_ok = false;
          formula_detail = absl::StrCat("mismatch at eps1=", e1, " eps2=", e2,
                                        " q=", q);
        }
      }
    }
  }
  report.Add("guarantee formulas", formulas_ok, formula_detail);

  // One-sided loss never exceeds the class bound; dual route via brute force.
  const double e1 = 0.5;
  const double e2 = 0.5;
  double worst_general = 0.0;
  double worst_monotonic = 0.0;
  double worst_range = 0.0;
  double worst_route_gap = 0.0;
  for (int pair = 0; pair < 10000; ++pair) {
    const bool monotonic = pair % 2 == 1;
    const int64_t k = 1 + static_cast<int64_t>(rng.UniformIndex(10));
    const auto [fx, fxp] = NeighborPair(k, monotonic, rng);
    const double forward = *OneSidedLoss(fx, fxp, e1, e2, 1.0);
    const double backward = *OneSidedLoss(fxp, fx, e1, e2, 1.0);
    worst_route_gap = std::max(
        {worst_route_gap,
         std::fabs(forward - testing::BruteForceOneSidedLoss(fx, fxp, e1, e2, 1.0)),
         std::fabs(backward -
                   testing::BruteForceOneSidedLoss(fxp, fx, e1, e2, 1.0))});
    if (monotonic) {
      worst_monotonic = std::max({worst_monotonic, forward, backward});
      worst_range = std::max(worst_range, forward + backward);
    } else {
      worst_general = std::max({worst_general, forward, backward});
    }
  }
  constexpr double kSlack = 1e-12;
  report.Add("general pairs: loss <= eps1 + 2 eps2",
             worst_general <= e1 + 2 * e2 + kSlack,
             absl::StrCat("max loss ", worst_general));
  report.Add("monotonic pairs: loss <= eps1 + eps2",
             worst_monotonic <= e1 + e2 + kSlack,
             absl::StrCat("max loss ", worst_monotonic));
  report.Add("monotonic pairs: range-bounded <= eps1 + 2 eps2",
             worst_range <= e1 + 2 * e2 + kSlack,
             absl::StrCat("max range ", worst_range));
  report.Add("loss matches brute-force recomputation", worst_route_gap <= 1e-12,
             absl::StrCat("max gap ", worst_route_gap));

  // Exact Gumbel ratios. General pairs are held to the one-sided loss; the
  // relaxed loss is checked on add/remove counting pairs f_i = c_i - q n,
  // where it is applied. (For general pairs the relaxed form can undershoot,
  // since the threshold sits in both denominators.)
  double worst_excess = -INFINITY;
  double worst_relaxed_excess = -INFINITY;
  for (int pair = 0; pair < 2000; ++pair) {
    const int64_t k = 1 + static_cast<int64_t>(rng.UniformIndex(8));
    const double eps = rng.Uniform(0.2, 1.5);
    {
      const auto [fx, fxp] = NeighborPair(k, pair % 2 == 1, rng);
      const double threshold = rng.Uniform(-5.0, 5.0);
      const GumbelOutcomeDistribution px =
          *GumbelOutcomes(fx, threshold, eps, 1.0);
      const GumbelOutcomeDistribution pxp =
          *GumbelOutcomes(fxp, threshold, eps, 1.0);
      const double bound = *OneSidedLoss(fx, fxp, eps, eps, 1.0);
      for (int64_t j = 0; j < k; ++j) {
        worst_excess = std::max(
            worst_excess, std::log(px.halt[j]) - std::log(pxp.halt[j]) - bound);
      }
    }
    // x' adds one point that enters every count from index `entry` on.
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
        worst_relaxed_excess =
            std::max(worst_relaxed_excess,
                     std::log(pa.halt[j]) - std::log(pb.halt[j]) - bound);
      }
    }
  }
  report.Add("Gumbel exact log-ratios within one-sided loss",
             worst_excess <= 1e-9, absl::StrCat("max excess ", worst_excess));
  report.Add("Gumbel exact log-ratios within relaxed loss, counting pairs",
             worst_relaxed_excess <= 1e-9,
             absl::StrCat("max excess ", worst_relaxed_excess));

  // Empirical ratios on monotonic counting streams. x = {0, ..., 19};
  // x' moves the smallest point to the top, so every count drops or stays.
  std::vector<double> x(20);
  for (int i = 0; i < 20; ++i) x[i] = i;
  std::vector<double> xp = x;
  xp[0] = 40;
  const LogBucketHistogram hx = *BuildHistogram(x, 2.0, 0.0);
  const LogBucketHistogram hxp = *BuildHistogram(xp, 2.0, 0.0);
  const double threshold = 10.0;
  constexpr int64_t kCap = 64;
  for (NoiseKind noise : {NoiseKind::kExponential, NoiseKind::kLaplace}) {
    const SvtConfig config{e1, e2, noise, threshold};
    auto run_on = [&config](const LogBucketHistogram& h) {
      return [&config, &h](RandomSource& r) {
        CountingQueryStream stream(h, 1, 0, kCap);
        return RunAboveThreshold(stream, config, r);
      };
    };
    absl::StatusOr<EmpiricalDpReport> check = EmpiricalDpCheck(
        run_on(hx), run_on(hxp), e1 + e2, options.trials, 8,
        options.seed + 7 + static_cast<uint64_t>(noise), options.z);
    if (!check.ok()) {
      report.Add(absl::StrCat("empirical ratio, ", NoiseKindName(noise)), false,
                 std::string(check.status().message()));
      continue;
    }
    report.Add(absl::StrCat("empirical ratio, ", NoiseKindName(noise)),
               check->pass,
               absl::StrCat("max log-ratio ", check->max_log_ratio,
                            ", lower bound ", check->max_log_ratio_lower,
                            ", claimed ", check->claimed_eps));
  }
  return report;
}

// Data spread over several orders of magnitude above `ell`.
inline std::vector<double> SpreadValues(int64_t n, double ell,
                                        RandomSource& rng) {
  const double log_span = rng.Uniform(0.5, std::log(1e4));
  std::vector<double> values(n);
  for (double& v : values) {
    v = ell + std::expm1(rng.Uniform() * log_span);
    // Exact grid points probe the bucket boundaries.
    if (rng.Uniform() < 0.05) v = ell + std::floor(v - ell);
  }
  return values;
}

inline constexpr double kOracleBetas[] = {1.001, 1.01, 1.1};

inline VerificationReport HistogramOracleSuite(
    const VerificationOptions& options) {
  VerificationReport report{"histogram-oracle", {}};
  RandomSource rng(options.seed, 3);
  int64_t mismatches = 0;
  int64_t checks = 0;
  std::string first_mismatch;
  for (int instance = 0; instance < 1000; ++instance) {
    const int64_t n = 1 + static_cast<int64_t>(rng.UniformIndex(10000));
    const double beta = kOracleBetas[rng.UniformIndex(3)];
    const double ell = std::round(rng.Uniform(-100.0, 100.0) * 8) / 8;
    const std::vector<double> values = SpreadValues(n, ell, rng);
    const LogBucketHistogram histogram = *BuildHistogram(values, beta, ell);
    const double top =
        *std::max_element(values.begin(), values.end()) - ell + 1;
    const int64_t max_index =
        static_cast<int64_t>(std::ceil(std::log(top) / std::log(beta))) + 2;
    const std::vector<double> grid = testing::CandidateGrid(beta, max_index);
    for (int probe = 0; probe < 100; ++probe) {
      const int64_t i = static_cast<int64_t>(rng.UniformIndex(max_index + 1));
      const int64_t direct = testing::DirectPrefixCount(values, ell, grid[i]);
      ++checks;
      if (histogram.PrefixCount(i) != direct) {
        if (mismatches++ == 0) {
          first_mismatch = absl::StrCat("instance ", instance, " index ", i,
                                        ": ", histogram.PrefixCount(i), " vs ",
                                        direct);
        }
      }
    }
    if (histogram.total() != n) {
      ++mismatches;
      if (first_mismatch.empty()) first_mismatch = "total mismatch";
    }
  }
  report.Add("prefix counts vs direct scans", mismatches == 0,
             mismatches == 0 ? absl::StrCat(checks, " probes agree")
                             : absl::StrCat(mismatches, " mismatches; first: ",
                                            first_mismatch));
  return report;
}

inline VerificationReport NoiselessOracleSuite(
    const VerificationOptions& options) {
  VerificationReport report{"noiseless-oracle", {}};
  RandomSource rng(options.seed, 4);
  int64_t mismatches = 0;
  std::string first_mismatch;
  for (int instance = 0; instance < 1000; ++instance) {
    const int64_t n = 1 + static_cast<int64_t>(rng.UniformIndex(10000));
    const double beta = kOracleBetas[rng.UniformIndex(3)];
    const double ell = std::round(rng.Uniform(-100.0, 100.0) * 8) / 8;
    const std::vector<double> values = SpreadValues(n, ell, rng);
    QuantileRequest request;
    request.q = rng.Uniform();
    request.beta = beta;
    absl::StatusOr<Dataset> dataset = Dataset::Create(values, ell);
    absl::StatusOr<QuantileEstimate> estimate = EstimateQuantileWithRunner(
        *dataset, request, testing::NoiselessRunner());
    const int64_t expected = testing::MinimalHaltIndex(
        values, ell, beta, request.Threshold(n), request.max_queries);
    const std::vector<double> grid =
        testing::CandidateGrid(beta, std::min(expected, request.max_queries));
    const bool ok =
        estimate.ok() && estimate->halt_index == expected &&
        (expected > request.max_queries ||
         estimate->value == grid[expected] + ell - 1);
    if (!ok && mismatches++ == 0) {
      first_mismatch = absl::StrCat(
          "instance ", instance, ": got ",
          estimate.ok() ? absl::StrCat(estimate->halt_index)
                        : std::string(estimate.status().message()),
          ", expected ", expected);
    }
  }
  report.Add("noise-free estimate vs minimal-k scan", mismatches == 0,
             mismatches == 0 ? "1000 instances agree"
                             : absl::StrCat(mismatches, " mismatches; first: ",
                                            first_mismatch));
  return report;
}

}  // namespace internal

inline absl::StatusOr<VerificationReport> RunVerificationSuite(
    absl::string_view name, const VerificationOptions& options = {}) {
  if (name == "gumbel-closed-form") {
    return internal::GumbelClosedFormSuite(options);
  }
  if (name == "em-equivalence") return internal::EmEquivalenceSuite(options);
  if (name == "dp-ratio") return internal::DpRatioSuite(options);
  if (name == "histogram-oracle") {
    return internal::HistogramOracleSuite(options);
  }
  if (name == "noiseless-oracle") {
    return internal::NoiselessOracleSuite(options);
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "Unknown verification suite '", name,
      "'; expected one of gumbel-closed-form, em-equivalence, dp-ratio, "
      "histogram-oracle, noiseless-oracle"));
}

}  // namespace dpq

#endif  // DPQ_VERIFICATION_H_
