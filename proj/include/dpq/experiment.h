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

// Benchmark harness: dataset generation and CSV ingestion, the resampling
// protocol for quantile and sum experiments, and result serialization.
//
// Every outer trial draws from its own RandomSource stream, and results are
// combined in trial order, so output depends only on the spec and the seed.

#ifndef DPQ_EXPERIMENT_H_
#define DPQ_EXPERIMENT_H_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "dpq/dp_aggregates.h"
#include "dpq/emq.h"
#include "dpq/log_histogram.h"
#include "dpq/parallel.h"
#include "dpq/quantile.h"
#include "dpq/random.h"
#include "nlohmann/json.hpp"

namespace dpq {

inline constexpr uint64_t kDefaultSeed = 20240601;

// kDefaultSeed unless DPQ_SEED holds an unsigned integer.
inline uint64_t DefaultSeed() {
  const char* env = std::getenv("DPQ_SEED");
  uint64_t seed = 0;
  if (env != nullptr && absl::SimpleAtoi(env, &seed)) return seed;
  return kDefaultSeed;
}

enum class SyntheticKind { kUniform, kGaussian };

inline absl::string_view SyntheticKindName(SyntheticKind kind) {
  return kind == SyntheticKind::kUniform ? "uniform" : "gaussian";
}

// Uniform on [-5, 5] or Normal(0, 5).
inline absl::StatusOr<std::vector<double>> GenerateSynthetic(
    SyntheticKind kind, int64_t n, RandomSource& rng) {
  if (n < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("Synthetic size must be at least 1, got ", n));
  }
  std::vector<double> values(n);
  for (double& x : values) {
    x = kind == SyntheticKind::kUniform ? rng.Uniform(-5.0, 5.0)
                                        : rng.Normal(0.0, 5.0);
  }
  return values;
}

struct LoadedColumn {
  std::vector<double> original;
  std::vector<double> perturbed;  // original + N(0, perturb_scale)
};

// Header row required; `column` selects by name. Line numbers in errors
// count the header as line 1.
inline absl::StatusOr<LoadedColumn> ParseCsv(std::istream& in,
                                             absl::string_view column,
                                             double perturb_scale,
                                             RandomSource& rng) {
  if (!(perturb_scale >= 0) || !std::isfinite(perturb_scale)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Perturbation scale must be finite and >= 0, got ", perturb_scale));
  }
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError("CSV input is empty");
  }
  std::vector<std::string> header = absl::StrSplit(line, ',');
  int64_t index = -1;
  for (size_t c = 0; c < header.size(); ++c) {
    if (absl::StripAsciiWhitespace(header[c]) == column) {
      index = static_cast<int64_t>(c);
      break;
    }
  }
  if (index < 0) {
    return absl::NotFoundError(
        absl::StrCat("Column '", column, "' not found in CSV header"));
  }
  LoadedColumn result;
  int64_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    std::vector<absl::string_view> fields = absl::StrSplit(line, ',');
    double value = 0.0;
    if (index >= static_cast<int64_t>(fields.size()) ||
        !absl::SimpleAtod(absl::StripAsciiWhitespace(fields[index]), &value) ||
        !std::isfinite(value)) {
      return absl::InvalidArgumentError(
          absl::StrCat("Line ", line_number, ": column '", column,
                       "' is not a finite number"));
    }
    result.original.push_back(value);
  }
  if (result.original.empty()) {
    return absl::InvalidArgumentError("CSV has no data rows");
  }
  result.perturbed = result.original;
  if (perturb_scale > 0) {
    for (double& x : result.perturbed) x += rng.Normal(0.0, perturb_scale);
  }
  return result;
}

inline absl::StatusOr<LoadedColumn> LoadCsv(const std::string& path,
                                            absl::string_view column,
                                            double perturb_scale,
                                            RandomSource& rng) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("Cannot open ", path));
  return ParseCsv(in, column, perturb_scale, rng);
}

// Linear interpolation between order statistics at rank q (n - 1).
inline absl::StatusOr<double> TrueQuantile(std::span<const double> values,
                                           double q) {
  if (values.empty()) {
    return absl::InvalidArgumentError("Dataset must not be empty");
  }
  if (!(q >= 0 && q <= 1)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Quantile must lie in [0, 1], got ", q));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = q * static_cast<double>(sorted.size() - 1);
  const size_t below = static_cast<size_t>(h);
  if (below + 1 >= sorted.size()) return sorted.back();
  return sorted[below] +
         (h - static_cast<double>(below)) * (sorted[below + 1] - sorted[below]);
}

inline bool AllIntegers(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double x) { return x == std::round(x); });
}

// 0.05, 0.06, ..., 0.95.
inline std::vector<double> DefaultQuantileGrid() {
  std::vector<double> grid;
  for (int percent = 5; percent <= 95; ++percent) grid.push_back(percent / 100.0);
  return grid;
}

struct DatasetSource {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  SyntheticKind synthetic = SyntheticKind::kUniform;
  int64_t synthetic_size = 10000;
  std::string path;
  std::string column;
};

struct ExperimentSpec {
  std::string name = "uniform";
  DatasetSource source;
  int64_t sample_size = 1000;
  int64_t outer_trials = 100;
  int64_t inner_trials = 100;  // Laplace draws per clip, sum only
  std::vector<double> quantiles = DefaultQuantileGrid();
  std::vector<QuantileMethod> methods = {QuantileMethod::kUqe,
                                         QuantileMethod::kEmq};
  std::vector<double> epsilons = {1.0};
  uint64_t seed = kDefaultSeed;
  double perturb_scale = 0.0;
  BoundedRange range{-5.0, 5.0};  // EMQ range; its lower end is UQE's bound
  // Unset: round outputs iff the unperturbed data are all integers.
  std::optional<bool> round_outputs;
  double beta = kDefaultBeta;
  NoiseKind noise = NoiseKind::kExponential;
  int64_t max_queries = kDefaultMaxQueries;
  double uqe_sum_quantile = 0.99;
  std::vector<double> emq_sum_quantiles = {0.95, 0.96, 0.97, 0.98, 0.99};

  absl::Status Validate() const {
    if (sample_size < 1) {
      return absl::InvalidArgumentError("Sample size must be at least 1");
    }
    if (outer_trials < 1 || inner_trials < 1) {
      return absl::InvalidArgumentError("Trial counts must be at least 1");
    }
    if (methods.empty() || epsilons.empty()) {
      return absl::InvalidArgumentError("Need at least one method and eps");
    }
    for (double eps : epsilons) {
      if (!std::isfinite(eps) || eps <= 0) {
        return absl::InvalidArgumentError(
            absl::StrCat("eps must be finite and positive, got ", eps));
      }
    }
    for (double q : quantiles) {
      if (!(q >= 0 && q <= 1)) {
        return absl::InvalidArgumentError(
            absl::StrCat("Quantile must lie in [0, 1], got ", q));
      }
    }
    if (source.kind == DatasetSource::Kind::kCsv &&
        (source.path.empty() || source.column.empty())) {
      return absl::InvalidArgumentError("CSV source needs a path and column");
    }
    return range.Validate();
  }
};

// Declared ranges and perturbation scales of the built-in dataset presets.
struct DatasetPreset {
  absl::string_view name;
  BoundedRange range;
  double perturb_scale;
};

inline constexpr DatasetPreset kDatasetPresets[] = {
    {"uniform", {-5.0, 5.0}, 0.0},  {"gaussian", {-25.0, 25.0}, 0.0},
    {"ratings", {0.0, 10.0}, 0.001}, {"pages", {0.0, 10000.0}, 0.1},
    {"hours", {0.0, 100.0}, 0.1},   {"ages", {0.0, 100.0}, 0.1},
};

inline std::optional<DatasetPreset> FindPreset(absl::string_view name) {
  for (const DatasetPreset& preset : kDatasetPresets) {
    if (preset.name == name) return preset;
  }
  return std::nullopt;
}

inline constexpr BoundedRange kSumRange{0.0, 10000.0};

struct ExperimentData {
  std::vector<double> original;
  std::vector<double> perturbed;
};

namespace internal {

inline constexpr uint64_t kDataStream = 0;

// Independent stream per (trial, method, eps index); trial + 1 keeps clear
// of the dataset stream.
inline uint64_t TrialStream(int64_t trial, int method, int64_t eps_index,
                            int64_t q_index = 0) {
  return (static_cast<uint64_t>(trial + 1) << 32) |
         (static_cast<uint64_t>(method) << 24) |
         (static_cast<uint64_t>(eps_index) << 16) |
         static_cast<uint64_t>(q_index);
}

// First `k` entries of a uniform random permutation of [0, n).
inline std::vector<size_t> SampleWithoutReplacement(size_t n, size_t k,
                                                    RandomSource& rng) {
  std::vector<size_t> indices(n);
  std::iota(indices.begin(), indices.end(), size_t{0});
  for (size_t i = 0; i < k; ++i) {
    const size_t j = i + rng.UniformIndex(n - i);
    std::swap(indices[i], indices[j]);
  }
  indices.resize(k);
  return indices;
}

inline void Subsample(const ExperimentData& data, size_t k, BoundedRange range,
                      RandomSource& rng, std::vector<double>& original,
                      std::vector<double>& clamped) {
  const std::vector<size_t> picks =
      SampleWithoutReplacement(data.original.size(), k, rng);
  original.resize(k);
  clamped.resize(k);
  for (size_t i = 0; i < k; ++i) {
    original[i] = data.original[picks[i]];
    clamped[i] = std::clamp(data.perturbed[picks[i]], range.a, range.b);
  }
}

inline std::pair<double, double> MeanAndStd(std::span<const double> xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double stddev =
      xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  return {mean, stddev};
}

inline double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

inline absl::Status FirstError(std::span<const absl::Status> statuses) {
  for (const absl::Status& status : statuses) {
    if (!status.ok()) return status;
  }
  return absl::OkStatus();
}

}  // namespace internal

inline absl::StatusOr<ExperimentData> MaterializeData(
    const ExperimentSpec& spec) {
  RandomSource rng(spec.seed, internal::kDataStream);
  ExperimentData data;
  if (spec.source.kind == DatasetSource::Kind::kSynthetic) {
    absl::StatusOr<std::vector<double>> values = GenerateSynthetic(
        spec.source.synthetic, spec.source.synthetic_size, rng);
    if (!values.ok()) return values.status();
    data.original = *std::move(values);
    data.perturbed = data.original;
    if (spec.perturb_scale > 0) {
      for (double& x : data.perturbed) x += rng.Normal(0.0, spec.perturb_scale);
    }
  } else {
    absl::StatusOr<LoadedColumn> loaded = LoadCsv(
        spec.source.path, spec.source.column, spec.perturb_scale, rng);
    if (!loaded.ok()) return loaded.status();
    data.original = std::move(loaded->original);
    data.perturbed = std::move(loaded->perturbed);
  }
  if (spec.sample_size > static_cast<int64_t>(data.original.size())) {
    return absl::InvalidArgumentError(
        absl::StrCat("Sample size ", spec.sample_size, " exceeds dataset size ",
                     data.original.size()));
  }
  return data;
}

struct ResultRecord {
  std::string method;
  double epsilon = 0.0;
  double q = 0.0;
  double mae = 0.0;
  double stddev = 0.0;  // across outer trials
  std::optional<double> normalized_error;  // mae / UQE's mae at the same point
  double runtime_seconds = 0.0;
  int64_t trials = 0;
};

inline absl::StatusOr<std::vector<ResultRecord>> RunQuantileExperiment(
    const ExperimentSpec& spec) {
  if (absl::Status status = spec.Validate(); !status.ok()) return status;
  if (spec.quantiles.empty()) {
    return absl::InvalidArgumentError("Quantile grid is empty");
  }
  absl::StatusOr<ExperimentData> data = MaterializeData(spec);
  if (!data.ok()) return data.status();
  const bool round = spec.round_outputs.value_or(AllIntegers(data->original));

  const size_t num_methods = spec.methods.size();
  const size_t num_eps = spec.epsilons.size();
  const size_t num_q = spec.quantiles.size();
  const size_t cells = num_methods * num_eps * num_q;
  const int64_t trials = spec.outer_trials;
  // errors[trial][(m * num_eps + e) * num_q + qi]
  std::vector<std::vector<double>> errors(trials, std::vector<double>(cells));
  std::vector<std::vector<double>> seconds(
      trials, std::vector<double>(num_methods * num_eps, 0.0));
  std::vector<absl::Status> statuses(trials);

  ParallelFor(trials, [&](int64_t t) {
    RandomSource sampler_rng(spec.seed, internal::TrialStream(t, 0xff, 0));
    std::vector<double> original;
    std::vector<double> sample;
    internal::Subsample(*data, static_cast<size_t>(spec.sample_size),
                        spec.range, sampler_rng, original, sample);
    std::vector<double> truth(num_q);
    for (size_t qi = 0; qi < num_q; ++qi) {
      truth[qi] = *TrueQuantile(original, spec.quantiles[qi]);
    }
    for (size_t m = 0; m < num_methods; ++m) {
      for (size_t e = 0; e < num_eps; ++e) {
        const auto start = std::chrono::steady_clock::now();
        RandomSource rng(spec.seed, internal::TrialStream(
                                        t, static_cast<int>(m),
                                        static_cast<int64_t>(e)));
        const double eps = spec.epsilons[e];
        double* out = &errors[t][(m * num_eps + e) * num_q];
        if (spec.methods[m] == QuantileMethod::kUqe) {
          absl::StatusOr<LogBucketHistogram> histogram =
              BuildHistogram(sample, spec.beta, spec.range.a);
          if (!histogram.ok()) {
            statuses[t] = histogram.status();
            return;
          }
          for (size_t qi = 0; qi < num_q; ++qi) {
            QuantileRequest request;
            request.q = spec.quantiles[qi];
            request.eps1 = eps / 2;
            request.eps2 = eps / 2;
            request.beta = spec.beta;
            request.noise = spec.noise;
            request.max_queries = spec.max_queries;
            absl::StatusOr<QuantileEstimate> estimate =
                EstimateQuantileFromHistogram(*histogram, request, rng);
            if (!estimate.ok()) {
              statuses[t] = estimate.status();
              return;
            }
            const double value =
                round ? std::round(estimate->value) : estimate->value;
            out[qi] = std::fabs(value - truth[qi]);
          }
        } else {
          absl::StatusOr<EmqSampler> emq = EmqSampler::Create(sample, spec.range);
          if (!emq.ok()) {
            statuses[t] = emq.status();
            return;
          }
          for (size_t qi = 0; qi < num_q; ++qi) {
            absl::StatusOr<double> estimate =
                emq->Sample(spec.quantiles[qi], eps, rng);
            if (!estimate.ok()) {
              statuses[t] = estimate.status();
              return;
            }
            const double value = round ? std::round(*estimate) : *estimate;
            out[qi] = std::fabs(value - truth[qi]);
          }
        }
        seconds[t][m * num_eps + e] = internal::Seconds(start);
      }
    }
  });
  if (absl::Status status = internal::FirstError(statuses); !status.ok()) {
    return status;
  }

  std::vector<ResultRecord> records;
  std::vector<double> column(trials);
  for (size_t m = 0; m < num_methods; ++m) {
    for (size_t e = 0; e < num_eps; ++e) {
      double runtime = 0.0;
      for (int64_t t = 0; t < trials; ++t) runtime += seconds[t][m * num_eps + e];
      for (size_t qi = 0; qi < num_q; ++qi) {
        for (int64_t t = 0; t < trials; ++t) {
          column[t] = errors[t][(m * num_eps + e) * num_q + qi];
        }
        const auto [mae, stddev] = internal::MeanAndStd(column);
        ResultRecord record;
        record.method = std::string(QuantileMethodName(spec.methods[m]));
        record.epsilon = spec.epsilons[e];
        record.q = spec.quantiles[qi];
        record.mae = mae;
        record.stddev = stddev;
        record.runtime_seconds = runtime;
        record.trials = trials;
        records.push_back(std::move(record));
      }
    }
  }
  // Normalize by UQE's error at the same (eps, q) when UQE was run.
  const auto uqe = std::find(spec.methods.begin(), spec.methods.end(),
                             QuantileMethod::kUqe);
  if (uqe != spec.methods.end()) {
    const size_t base = static_cast<size_t>(uqe - spec.methods.begin());
    for (size_t m = 0; m < num_methods; ++m) {
      for (size_t cell = 0; cell < num_eps * num_q; ++cell) {
        const double reference = records[base * num_eps * num_q + cell].mae;
        ResultRecord& record = records[m * num_eps * num_q + cell];
        record.normalized_error =
            reference > 0 ? record.mae / reference
                          : (record.mae == 0 ? 1.0 : INFINITY);
      }
    }
  }
  return records;
}

// Per outer trial: one private clip per (method, eps, q), then
// `inner_trials` Laplace draws around the clipped sum. Errors are against the
// unclipped, unperturbed sample sum. EMQ keeps its best q.
inline absl::StatusOr<std::vector<ResultRecord>> RunSumExperiment(
    const ExperimentSpec& spec) {
  if (absl::Status status = spec.Validate(); !status.ok()) return status;
  if (spec.emq_sum_quantiles.empty()) {
    return absl::InvalidArgumentError("EMQ quantile set is empty");
  }
  absl::StatusOr<ExperimentData> data = MaterializeData(spec);
  if (!data.ok()) return data.status();
  for (double x : data->original) {
    if (x < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("Sum experiment needs nonnegative data, found ", x));
    }
  }

  struct Cell {
    QuantileMethod method;
    size_t eps_index;
    double q;
  };
  std::vector<Cell> cells;
  for (QuantileMethod method : spec.methods) {
    for (size_t e = 0; e < spec.epsilons.size(); ++e) {
      if (method == QuantileMethod::kUqe) {
        cells.push_back({method, e, spec.uqe_sum_quantile});
      } else {
        for (double q : spec.emq_sum_quantiles) cells.push_back({method, e, q});
      }
    }
  }
  const int64_t trials = spec.outer_trials;
  std::vector<std::vector<double>> errors(trials,
                                          std::vector<double>(cells.size()));
  std::vector<std::vector<double>> seconds(trials,
                                           std::vector<double>(cells.size()));
  std::vector<absl::Status> statuses(trials);

  ParallelFor(trials, [&](int64_t t) {
    RandomSource sampler_rng(spec.seed, internal::TrialStream(t, 0xff, 0));
    std::vector<double> original;
    std::vector<double> sample;
    internal::Subsample(*data, static_cast<size_t>(spec.sample_size),
                        kSumRange, sampler_rng, original, sample);
    const double true_sum = std::accumulate(original.begin(), original.end(), 0.0);
    for (size_t c = 0; c < cells.size(); ++c) {
      const auto start = std::chrono::steady_clock::now();
      const Cell& cell = cells[c];
      RandomSource rng(spec.seed,
                       internal::TrialStream(t, static_cast<int>(cell.method),
                                             static_cast<int64_t>(cell.eps_index),
                                             static_cast<int64_t>(c)));
      SumConfig config;
      config.q = cell.q;
      config.eps = spec.epsilons[cell.eps_index];
      config.method = cell.method;
      config.beta = spec.beta;
      config.noise = spec.noise;
      config.max_queries = spec.max_queries;
      config.range = kSumRange;
      absl::StatusOr<ClipResult> clip = PrivateClip(sample, config, rng);
      if (!clip.ok()) {
        statuses[t] = clip.status();
        return;
      }
      const double clipped = ClippedSum(sample, clip->clip);
      double total_error = 0.0;
      for (int64_t i = 0; i < spec.inner_trials; ++i) {
        const double noisy =
            clipped + internal::SampleLaplace(clip->clip / config.eps, rng);
        total_error += std::fabs(noisy - true_sum);
      }
      errors[t][c] = total_error / static_cast<double>(spec.inner_trials);
      seconds[t][c] = internal::Seconds(start);
    }
  });
  if (absl::Status status = internal::FirstError(statuses); !status.ok()) {
    return status;
  }

  std::vector<ResultRecord> all(cells.size());
  std::vector<double> column(trials);
  for (size_t c = 0; c < cells.size(); ++c) {
    double runtime = 0.0;
    for (int64_t t = 0; t < trials; ++t) {
      column[t] = errors[t][c];
      runtime += seconds[t][c];
    }
    const auto [mae, stddev] = internal::MeanAndStd(column);
    all[c].method = std::string(QuantileMethodName(cells[c].method));
    all[c].epsilon = spec.epsilons[cells[c].eps_index];
    all[c].q = cells[c].q;
    all[c].mae = mae;
    all[c].stddev = stddev;
    all[c].runtime_seconds = runtime;
    all[c].trials = trials;
  }
  // Collapse each (method, eps) group to its lowest-MAE q.
  std::vector<ResultRecord> records;
  for (size_t c = 0; c < cells.size(); ++c) {
    if (!records.empty() && records.back().method == all[c].method &&
        records.back().epsilon == all[c].epsilon &&
        cells[c].method == QuantileMethod::kEmq) {
      if (all[c].mae < records.back().mae) records.back() = all[c];
      continue;
    }
    records.push_back(all[c]);
  }
  return records;
}

inline nlohmann::json RecordToJson(const ResultRecord& record,
                                   bool include_timing) {
  nlohmann::json out = {{"method", record.method},
                        {"epsilon", record.epsilon},
                        {"q", record.q},
                        {"mae", record.mae},
                        {"std", record.stddev},
                        {"trials", record.trials}};
  if (record.normalized_error.has_value()) {
    out["normalized_error"] = *record.normalized_error;
  }
  if (include_timing) out["runtime_seconds"] = record.runtime_seconds;
  return out;
}

// Wall-clock runtimes are left out unless asked for, so identical specs give
// byte-identical output.
inline nlohmann::json RecordsToJson(const ExperimentSpec& spec,
                                    absl::string_view experiment,
                                    std::span<const ResultRecord> records,
                                    bool include_timing = false) {
  nlohmann::json out;
  out["experiment"] = experiment;
  out["dataset"] = spec.name;
  out["seed"] = spec.seed;
  out["sample_size"] = spec.sample_size;
  out["outer_trials"] = spec.outer_trials;
  if (experiment == "sum") out["inner_trials"] = spec.inner_trials;
  out["beta"] = spec.beta;
  out["noise"] = NoiseKindName(spec.noise);
  out["range"] = {spec.range.a, spec.range.b};
  out["records"] = nlohmann::json::array();
  for (const ResultRecord& record : records) {
    out["records"].push_back(RecordToJson(record, include_timing));
  }
  return out;
}

// q,method,epsilon,mae,normalized_error rows for plotting.
inline std::string NormalizedErrorCsv(std::span<const ResultRecord> records) {
  std::ostringstream out;
  out.precision(17);
  out << "q,method,epsilon,mae,normalized_error\n";
  for (const ResultRecord& record : records) {
    out << record.q << ',' << record.method << ',' << record.epsilon << ','
        << record.mae << ',';
    if (record.normalized_error.has_value()) out << *record.normalized_error;
    out << '\n';
  }
  return out.str();
}

}  // namespace dpq

#endif  // DPQ_EXPERIMENT_H_
