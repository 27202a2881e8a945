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

// Command-line front end: private quantiles and sums over a CSV column,
// privacy accounting, benchmarks, verification suites and PDF curves.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "dpq/dp_aggregates.h"
#include "dpq/emq.h"
#include "dpq/experiment.h"
#include "dpq/noise.h"
#include "dpq/privacy_accounting.h"
#include "dpq/quantile.h"
#include "dpq/random.h"
#include "dpq/verification.h"
#include "nlohmann/json.hpp"

namespace {

using nlohmann::json;

struct CommonFlags {
  std::string input;
  std::string column;
  std::optional<double> epsilon;
  double eps1 = 0.5;
  double eps2 = 0.5;
  double beta = dpq::kDefaultBeta;
  std::string noise = "expo";
  std::string neighbor = "swap";
  uint64_t seed = dpq::DefaultSeed();
  int64_t max_queries = dpq::kDefaultMaxQueries;
  std::string out;
};

json GuaranteeToJson(const dpq::PrivacyGuarantee& g) {
  json out = json::object();
  if (g.eps_dp.has_value()) out["eps_dp"] = *g.eps_dp;
  if (g.rho_zcdp.has_value()) out["rho_zcdp"] = *g.rho_zcdp;
  if (g.gamma_range_bounded.has_value()) {
    out["gamma_range_bounded"] = *g.gamma_range_bounded;
  }
  return out;
}

absl::Status Emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return absl::OkStatus();
  }
  std::ofstream out(path);
  if (!out) return absl::InternalError(absl::StrCat("Cannot write ", path));
  out << text;
  return absl::OkStatus();
}

absl::Status EmitJson(const json& j, const std::string& path) {
  return Emit(j.dump(2) + "\n", path);
}

absl::StatusOr<dpq::QuantileRequest> RequestFromFlags(const CommonFlags& f,
                                                      double q) {
  dpq::QuantileRequest request;
  request.q = q;
  if (f.epsilon.has_value()) {
    request.eps1 = *f.epsilon / 2;
    request.eps2 = *f.epsilon / 2;
  } else {
    request.eps1 = f.eps1;
    request.eps2 = f.eps2;
  }
  request.beta = f.beta;
  request.max_queries = f.max_queries;
  absl::StatusOr<dpq::NoiseKind> noise = dpq::ParseNoiseKind(f.noise);
  if (!noise.ok()) return noise.status();
  request.noise = *noise;
  absl::StatusOr<dpq::NeighborModel> neighbor =
      dpq::ParseNeighborModel(f.neighbor);
  if (!neighbor.ok()) return neighbor.status();
  request.neighbor = *neighbor;
  if (absl::Status status = request.Validate(); !status.ok()) return status;
  return request;
}

absl::StatusOr<std::vector<double>> LoadColumn(const CommonFlags& f) {
  if (f.input.empty() || f.column.empty()) {
    return absl::InvalidArgumentError("--input and --column are required");
  }
  dpq::RandomSource unused(f.seed);
  absl::StatusOr<dpq::LoadedColumn> loaded =
      dpq::LoadCsv(f.input, f.column, 0.0, unused);
  if (!loaded.ok()) return loaded.status();
  return std::move(loaded->original);
}

void AddCommon(CLI::App* app, CommonFlags& f, bool needs_input = true) {
  if (needs_input) {
    app->add_option("--input", f.input, "CSV file with a header row");
    app->add_option("--column", f.column, "Numeric column to read");
  }
  app->add_option("--epsilon", f.epsilon,
                  "Total budget; sets eps1 = eps2 = epsilon / 2");
  app->add_option("--eps1", f.eps1, "Threshold-noise budget");
  app->add_option("--eps2", f.eps2, "Query-noise budget");
  app->add_option("--beta", f.beta, "Candidate grid ratio");
  app->add_option("--noise", f.noise, "laplace, gumbel or expo");
  app->add_option("--neighbor", f.neighbor, "swap or add-subtract");
  app->add_option("--seed", f.seed, "RNG seed (default from DPQ_SEED)");
  app->add_option("--max-queries", f.max_queries, "AboveThreshold query cap");
  app->add_option("--out", f.out, "Output path (default stdout)");
}

absl::Status RunQuantile(const CommonFlags& f, double q,
                         std::optional<double> lower, bool unbounded) {
  absl::StatusOr<std::vector<double>> values = LoadColumn(f);
  if (!values.ok()) return values.status();
  absl::StatusOr<dpq::QuantileRequest> request = RequestFromFlags(f, q);
  if (!request.ok()) return request.status();
  dpq::RandomSource rng(f.seed);
  json out = {{"q", q}, {"n", values->size()}};
  if (unbounded || !lower.has_value()) {
    absl::StatusOr<dpq::UnboundedEstimate> estimate =
        dpq::EstimateQuantileUnbounded(*values, *request, rng);
    if (!estimate.ok()) return estimate.status();
    absl::StatusOr<dpq::PrivacyGuarantee> guarantee =
        dpq::GuaranteeForUnbounded(*request);
    if (!guarantee.ok()) return guarantee.status();
    out["mode"] = "unbounded";
    out["value"] = estimate->value;
    out["first_index"] = estimate->first_index;
    if (estimate->second_index.has_value()) {
      out["second_index"] = *estimate->second_index;
    }
    out["exhausted"] = estimate->exhausted;
    out["guarantee"] = GuaranteeToJson(*guarantee);
  } else {
    absl::StatusOr<dpq::Dataset> data =
        dpq::Dataset::Create(*std::move(values), lower);
    if (!data.ok()) return data.status();
    absl::StatusOr<dpq::QuantileEstimate> estimate =
        dpq::EstimateQuantile(*data, *request, rng);
    if (!estimate.ok()) return estimate.status();
    absl::StatusOr<dpq::PrivacyGuarantee> guarantee =
        dpq::GuaranteeForRequest(*request);
    if (!guarantee.ok()) return guarantee.status();
    out["mode"] = "lower-bounded";
    out["lower"] = *lower;
    out["value"] = estimate->value;
    out["halt_index"] = estimate->halt_index;
    out["exhausted"] = estimate->exhausted;
    out["guarantee"] = GuaranteeToJson(*guarantee);
  }
  return EmitJson(out, f.out);
}

absl::Status RunQuantiles(const CommonFlags& f, const std::vector<double>& qs,
                          std::optional<double> lower) {
  if (!lower.has_value()) {
    return absl::InvalidArgumentError("quantiles needs --lower");
  }
  if (qs.empty()) return absl::InvalidArgumentError("--qs is empty");
  absl::StatusOr<std::vector<double>> values = LoadColumn(f);
  if (!values.ok()) return values.status();
  absl::StatusOr<dpq::QuantileRequest> request = RequestFromFlags(f, 0.5);
  if (!request.ok()) return request.status();
  absl::StatusOr<dpq::Dataset> data =
      dpq::Dataset::Create(*std::move(values), lower);
  if (!data.ok()) return data.status();
  dpq::RandomSource rng(f.seed);
  absl::StatusOr<dpq::MultiQuantileResult> result =
      dpq::EstimateMultipleQuantiles(*data, qs, *request, rng);
  if (!result.ok()) return result.status();
  absl::StatusOr<dpq::MultiQuantileAccounting> accounting =
      dpq::MultiQuantileGuarantee(static_cast<int64_t>(qs.size()),
                                  request->neighbor, request->noise,
                                  request->eps1, request->eps2);
  if (!accounting.ok()) return accounting.status();
  json out = {{"qs", qs},
              {"values", result->values},
              {"empty_slice", result->empty_slice},
              {"exhausted", result->exhausted},
              {"compositions", accounting->compositions},
              {"per_level", GuaranteeToJson(accounting->per_level)},
              {"guarantee", GuaranteeToJson(accounting->total)}};
  return EmitJson(out, f.out);
}

absl::Status RunSum(const CommonFlags& f, double q, const std::string& method,
                    double lower, double upper, bool mean) {
  absl::StatusOr<std::vector<double>> values = LoadColumn(f);
  if (!values.ok()) return values.status();
  dpq::SumConfig config;
  config.q = q;
  config.eps = f.epsilon.value_or(1.0);
  absl::StatusOr<dpq::QuantileMethod> parsed = dpq::ParseQuantileMethod(method);
  if (!parsed.ok()) return parsed.status();
  config.method = *parsed;
  config.beta = f.beta;
  absl::StatusOr<dpq::NoiseKind> noise = dpq::ParseNoiseKind(f.noise);
  if (!noise.ok()) return noise.status();
  config.noise = *noise;
  config.max_queries = f.max_queries;
  config.range = {lower, upper};
  dpq::RandomSource rng(f.seed);
  absl::StatusOr<dpq::SumResult> result =
      mean ? dpq::DpMean(*values, config, rng) : dpq::DpSum(*values, config, rng);
  if (!result.ok()) return result.status();
  json out = {{"statistic", mean ? "mean" : "sum"},
              {"method", method},
              {"q", q},
              {"epsilon_per_stage", config.eps},
              {"epsilon_total", result->epsilon_total},
              {"estimate", result->estimate},
              {"clip", result->clip},
              {"clip_clamped", result->clip_clamped},
              {"quantile_exhausted", result->quantile_exhausted}};
  return EmitJson(out, f.out);
}

absl::Status RunAccount(const CommonFlags& f, const std::string& query_class,
                        std::optional<double> q, int64_t num_quantiles) {
  absl::StatusOr<dpq::NoiseKind> noise = dpq::ParseNoiseKind(f.noise);
  if (!noise.ok()) return noise.status();
  absl::StatusOr<dpq::NeighborModel> neighbor =
      dpq::ParseNeighborModel(f.neighbor);
  if (!neighbor.ok()) return neighbor.status();
  const double eps1 = f.epsilon.has_value() ? *f.epsilon / 2 : f.eps1;
  const double eps2 = f.epsilon.has_value() ? *f.epsilon / 2 : f.eps2;
  json out = {{"eps1", eps1},
              {"eps2", eps2},
              {"noise", f.noise},
              {"neighbor", f.neighbor}};
  if (num_quantiles > 0) {
    absl::StatusOr<dpq::MultiQuantileAccounting> accounting =
        dpq::MultiQuantileGuarantee(num_quantiles, *neighbor, *noise, eps1,
                                    eps2);
    if (!accounting.ok()) return accounting.status();
    out["num_quantiles"] = num_quantiles;
    out["compositions"] = accounting->compositions;
    out["per_level"] = GuaranteeToJson(accounting->per_level);
    out["guarantee"] = GuaranteeToJson(accounting->total);
  } else {
    absl::StatusOr<dpq::QueryClass> parsed = dpq::ParseQueryClass(query_class);
    if (!parsed.ok()) return parsed.status();
    absl::StatusOr<dpq::PrivacyGuarantee> guarantee =
        dpq::GuaranteeFor(*parsed, *neighbor, *noise, eps1, eps2, q);
    if (!guarantee.ok()) return guarantee.status();
    out["query_class"] = query_class;
    if (q.has_value()) out["q"] = *q;
    out["guarantee"] = GuaranteeToJson(*guarantee);
  }
  return EmitJson(out, f.out);
}

struct BenchFlags {
  std::string dataset = "uniform";
  std::string experiment = "quantile";
  int64_t trials = 100;
  int64_t inner_trials = 100;
  int64_t sample_size = 1000;
  int64_t synthetic_size = 10000;
  std::vector<double> epsilons;
  std::vector<double> qs;
  std::vector<std::string> methods = {"uqe", "emq"};
  std::optional<double> perturb;
  std::optional<double> lower;
  std::optional<double> upper;
  std::string csv;
  bool timing = false;
};

absl::Status RunBench(const CommonFlags& f, const BenchFlags& b) {
  dpq::ExperimentSpec spec;
  spec.name = b.dataset;
  spec.seed = f.seed;
  spec.beta = f.beta;
  spec.max_queries = f.max_queries;
  spec.sample_size = b.sample_size;
  spec.outer_trials = b.trials;
  spec.inner_trials = b.inner_trials;
  absl::StatusOr<dpq::NoiseKind> noise = dpq::ParseNoiseKind(f.noise);
  if (!noise.ok()) return noise.status();
  spec.noise = *noise;
  spec.methods.clear();
  for (const std::string& name : b.methods) {
    absl::StatusOr<dpq::QuantileMethod> method = dpq::ParseQuantileMethod(name);
    if (!method.ok()) return method.status();
    spec.methods.push_back(*method);
  }
  std::optional<dpq::DatasetPreset> preset = dpq::FindPreset(b.dataset);
  if (preset.has_value()) {
    spec.range = preset->range;
    spec.perturb_scale = preset->perturb_scale;
  }
  if (b.dataset == "uniform" || b.dataset == "gaussian") {
    spec.source.kind = dpq::DatasetSource::Kind::kSynthetic;
    spec.source.synthetic = b.dataset == "uniform"
                                ? dpq::SyntheticKind::kUniform
                                : dpq::SyntheticKind::kGaussian;
    spec.source.synthetic_size = b.synthetic_size;
  } else {
    if (f.input.empty() || f.column.empty()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "Dataset '", b.dataset, "' needs --input and --column"));
    }
    spec.source.kind = dpq::DatasetSource::Kind::kCsv;
    spec.source.path = f.input;
    spec.source.column = f.column;
  }
  if (b.perturb.has_value()) spec.perturb_scale = *b.perturb;
  if (b.lower.has_value()) spec.range.a = *b.lower;
  if (b.upper.has_value()) spec.range.b = *b.upper;
  if (!b.qs.empty()) spec.quantiles = b.qs;

  absl::StatusOr<std::vector<dpq::ResultRecord>> records;
  if (b.experiment == "quantile") {
    spec.epsilons = b.epsilons.empty() ? std::vector<double>{1.0} : b.epsilons;
    records = dpq::RunQuantileExperiment(spec);
  } else if (b.experiment == "sum") {
    spec.epsilons =
        b.epsilons.empty() ? std::vector<double>{0.1, 0.5, 1.0} : b.epsilons;
    spec.range = dpq::kSumRange;
    records = dpq::RunSumExperiment(spec);
  } else {
    return absl::InvalidArgumentError(absl::StrCat(
        "Unknown experiment '", b.experiment, "'; expected quantile or sum"));
  }
  if (!records.ok()) return records.status();
  if (!b.csv.empty()) {
    if (absl::Status status = Emit(dpq::NormalizedErrorCsv(*records), b.csv);
        !status.ok()) {
      return status;
    }
  }
  return EmitJson(dpq::RecordsToJson(spec, b.experiment, *records, b.timing),
                  f.out);
}

absl::Status RunVerify(const CommonFlags& f, const std::string& suite,
                       int64_t trials, bool& all_pass) {
  dpq::VerificationOptions options;
  options.seed = f.seed;
  options.trials = trials;
  std::vector<std::string> names;
  if (suite == "all") {
    for (absl::string_view name : dpq::kVerificationSuites) {
      names.emplace_back(name);
    }
  } else {
    names.push_back(suite);
  }
  json out = json::array();
  all_pass = true;
  for (const std::string& name : names) {
    absl::StatusOr<dpq::VerificationReport> report =
        dpq::RunVerificationSuite(name, options);
    if (!report.ok()) return report.status();
    all_pass = all_pass && report->pass();
    out.push_back(report->ToJson());
  }
  return EmitJson(out, f.out);
}

// CSV with one row per grid point: EMQ densities for each range and the UQE
// step density, which does not depend on the range.
absl::Status RunPdf(const CommonFlags& f, std::vector<double> values,
                    int64_t n, double q, double lower,
                    const std::vector<double>& uppers, double step) {
  if (values.empty() && !f.input.empty()) {
    absl::StatusOr<std::vector<double>> loaded = LoadColumn(f);
    if (!loaded.ok()) return loaded.status();
    values = *std::move(loaded);
  }
  if (values.empty()) {
    dpq::RandomSource rng(f.seed);
    for (int64_t i = 0; i < n; ++i) values.push_back(rng.Uniform(0.0, 10.0));
  }
  if (uppers.empty() || !(step > 0)) {
    return absl::InvalidArgumentError("pdf needs --upper values and step > 0");
  }
  const double eps = f.epsilon.value_or(1.0);
  const double top = *std::max_element(uppers.begin(), uppers.end());
  std::vector<double> grid;
  for (int64_t i = 0; lower + static_cast<double>(i) * step <= top; ++i) {
    grid.push_back(lower + static_cast<double>(i) * step);
  }
  std::vector<std::vector<double>> emq;
  for (double upper : uppers) {
    absl::StatusOr<std::vector<double>> curve =
        dpq::EmqPdfCurve(values, {lower, upper}, q, eps, grid);
    if (!curve.ok()) return curve.status();
    emq.push_back(*std::move(curve));
  }
  absl::StatusOr<dpq::UqeStepPdf> uqe =
      dpq::UqeGumbelStepPdf(values, lower, q, eps, f.beta, top);
  if (!uqe.ok()) return uqe.status();
  std::ostringstream csv;
  csv.precision(17);
  csv << "x";
  for (double upper : uppers) csv << ",emq_" << lower << "_" << upper;
  csv << ",uqe\n";
  for (size_t g = 0; g < grid.size(); ++g) {
    csv << grid[g];
    for (const auto& curve : emq) csv << ',' << curve[g];
    csv << ',' << uqe->DensityAt(grid[g]) << '\n';
  }
  return Emit(csv.str(), f.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private quantiles and sums"};
  app.require_subcommand(1);

  CommonFlags quantile_flags;
  double quantile_q = 0.5;
  std::optional<double> quantile_lower;
  bool quantile_unbounded = false;
  CLI::App* quantile = app.add_subcommand("quantile", "One private quantile");
  AddCommon(quantile, quantile_flags);
  quantile->add_option("--q", quantile_q, "Quantile in [0, 1]");
  quantile->add_option("--lower", quantile_lower,
                       "Lower bound; omit for the fully unbounded search");
  quantile->add_flag("--unbounded", quantile_unbounded,
                     "Ignore --lower and search both signs");

  CommonFlags quantiles_flags;
  std::vector<double> quantiles_qs;
  std::optional<double> quantiles_lower;
  CLI::App* quantiles =
      app.add_subcommand("quantiles", "Several quantiles by recursive splits");
  AddCommon(quantiles, quantiles_flags);
  quantiles->add_option("--qs", quantiles_qs, "Quantiles in [0, 1]")
      ->delimiter(',');
  quantiles->add_option("--lower", quantiles_lower, "Lower bound");

  CommonFlags sum_flags;
  double sum_q = 0.99;
  std::string sum_method = "uqe";
  double sum_lower = 0.0;
  double sum_upper = 10000.0;
  bool sum_mean = false;
  CLI::App* sum = app.add_subcommand("sum", "Clipped private sum or mean");
  AddCommon(sum, sum_flags);
  sum->add_option("--q", sum_q, "Clipping quantile");
  sum->add_option("--method", sum_method, "uqe or emq");
  sum->add_option("--lower", sum_lower, "EMQ range start");
  sum->add_option("--upper", sum_upper, "EMQ range end");
  sum->add_flag("--mean", sum_mean, "Report the mean instead of the sum");

  CommonFlags account_flags;
  std::string account_class = "monotonic";
  std::optional<double> account_q;
  int64_t account_m = 0;
  CLI::App* account = app.add_subcommand("account", "Privacy accounting");
  AddCommon(account, account_flags, /*needs_input=*/false);
  account->add_option("--query-class", account_class,
                      "general, monotonic, count-minus-qn, "
                      "fixed-threshold-count");
  account->add_option("--q", account_q, "Quantile for count-minus-qn");
  account->add_option("--num-quantiles", account_m,
                      "Account for this many quantiles by recursive splits");

  CommonFlags bench_flags;
  BenchFlags bench_options;
  CLI::App* bench = app.add_subcommand("bench", "Benchmark experiments");
  AddCommon(bench, bench_flags);
  bench->add_option("--dataset", bench_options.dataset,
                    "uniform, gaussian, ratings, pages, hours, ages or a "
                    "custom name");
  bench->add_option("--experiment", bench_options.experiment, "quantile or sum");
  bench->add_option("--trials", bench_options.trials, "Outer trials");
  bench->add_option("--inner-trials", bench_options.inner_trials,
                    "Laplace draws per clip (sum)");
  bench->add_option("--sample-size", bench_options.sample_size,
                    "Points sampled per trial");
  bench->add_option("--synthetic-size", bench_options.synthetic_size,
                    "Size of generated datasets");
  bench->add_option("--epsilons", bench_options.epsilons, "Budget grid")
      ->delimiter(',');
  bench->add_option("--qs", bench_options.qs, "Quantile grid")->delimiter(',');
  bench->add_option("--methods", bench_options.methods, "uqe,emq")
      ->delimiter(',');
  bench->add_option("--perturb", bench_options.perturb,
                    "Gaussian perturbation scale");
  bench->add_option("--lower", bench_options.lower, "Declared range start");
  bench->add_option("--upper", bench_options.upper, "Declared range end");
  bench->add_option("--csv", bench_options.csv, "Normalized-error CSV path");
  bench->add_flag("--timing", bench_options.timing,
                  "Include wall-clock runtimes in the JSON");

  CommonFlags verify_flags;
  std::string verify_suite = "all";
  int64_t verify_trials = 1000000;
  CLI::App* verify = app.add_subcommand("verify", "Run verification suites");
  AddCommon(verify, verify_flags, /*needs_input=*/false);
  verify->add_option("--suite", verify_suite,
                     "gumbel-closed-form, em-equivalence, dp-ratio, "
                     "histogram-oracle, noiseless-oracle or all");
  verify->add_option("--trials", verify_trials, "Monte Carlo runs per instance");

  CommonFlags pdf_flags;
  std::vector<double> pdf_values;
  int64_t pdf_n = 10;
  double pdf_q = 0.9;
  double pdf_lower = 0.0;
  std::vector<double> pdf_uppers = {10.0, 20.0};
  double pdf_step = 0.01;
  CLI::App* pdf = app.add_subcommand("pdf", "EMQ and UQE density curves");
  AddCommon(pdf, pdf_flags);
  pdf->add_option("--values", pdf_values, "Data points")->delimiter(',');
  pdf->add_option("--n", pdf_n, "Uniform [0, 10] points if no data given");
  pdf->add_option("--q", pdf_q, "Quantile");
  pdf->add_option("--lower", pdf_lower, "Range start, also UQE's lower bound");
  pdf->add_option("--upper", pdf_uppers, "Range ends, one curve each")
      ->delimiter(',');
  pdf->add_option("--step", pdf_step, "Grid spacing");

  CLI11_PARSE(app, argc, argv);

  absl::Status status;
  bool verify_pass = true;
  if (quantile->parsed()) {
    status = RunQuantile(quantile_flags, quantile_q,
                         quantile_unbounded ? std::nullopt : quantile_lower,
                         quantile_unbounded);
  } else if (quantiles->parsed()) {
    status = RunQuantiles(quantiles_flags, quantiles_qs, quantiles_lower);
  } else if (sum->parsed()) {
    status = RunSum(sum_flags, sum_q, sum_method, sum_lower, sum_upper,
                    sum_mean);
  } else if (account->parsed()) {
    status = RunAccount(account_flags, account_class, account_q, account_m);
  } else if (bench->parsed()) {
    status = RunBench(bench_flags, bench_options);
  } else if (verify->parsed()) {
    status = RunVerify(verify_flags, verify_suite, verify_trials, verify_pass);
  } else if (pdf->parsed()) {
    status = RunPdf(pdf_flags, pdf_values, pdf_n, pdf_q, pdf_lower, pdf_uppers,
                    pdf_step);
  }
  if (!status.ok()) {
    std::cerr << "error: " << status << "\n";
    return 2;
  }
  return verify_pass ? 0 : 1;
}
