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

#ifndef DPQ_NOISE_H_
#define DPQ_NOISE_H_

#include <cmath>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/string_view.h"
#include "dpq/random.h"

namespace dpq {

enum class NoiseKind { kLaplace, kGumbel, kExponential };

inline absl::string_view NoiseKindName(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kLaplace:
      return "laplace";
    case NoiseKind::kGumbel:
      return "gumbel";
    case NoiseKind::kExponential:
      return "expo";
  }
  return "unknown";
}

inline absl::StatusOr<NoiseKind> ParseNoiseKind(absl::string_view name) {
  if (name == "laplace" || name == "lap") return NoiseKind::kLaplace;
  if (name == "gumbel") return NoiseKind::kGumbel;
  if (name == "expo" || name == "exponential") return NoiseKind::kExponential;
  return absl::InvalidArgumentError(
      absl::StrCat("Unknown noise kind '", name,
                   "'; expected one of laplace, gumbel, expo"));
}

namespace internal {

// Inverse-CDF samplers. Callers guarantee scale > 0.
inline double SampleLaplace(double scale, RandomSource& rng) {
  // u in (-1, 1), so 1 - |u| > 0.
  const double u = 2.0 * rng.UniformOpen() - 1.0;
  return -scale * std::copysign(1.0, u) * std::log1p(-std::abs(u));
}

inline double SampleGumbel(double scale, RandomSource& rng) {
  return -scale * std::log(-std::log(rng.UniformOpen()));
}

inline double SampleExponential(double scale, RandomSource& rng) {
  return -scale * std::log(rng.UniformOpen());
}

inline double SampleNoise(NoiseKind kind, double scale, RandomSource& rng) {
  switch (kind) {
    case NoiseKind::kLaplace:
      return SampleLaplace(scale, rng);
    case NoiseKind::kGumbel:
      return SampleGumbel(scale, rng);
    case NoiseKind::kExponential:
      return SampleExponential(scale, rng);
  }
  return 0.0;
}

}  // namespace internal

// A noise distribution together with its scale b. Construct through Create,
// which rejects non-positive or non-finite scales.
class NoiseSpec {
 public:
  static absl::StatusOr<NoiseSpec> Create(NoiseKind kind, double scale) {
    if (!std::isfinite(scale) || scale <= 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("Noise scale must be finite and positive, got ", scale));
    }
    return NoiseSpec(kind, scale);
  }

  NoiseKind kind() const { return kind_; }
  double scale() const { return scale_; }

  double Sample(RandomSource& rng) const {
    return internal::SampleNoise(kind_, scale_, rng);
  }

  double Pdf(double z) const {
    const double b = scale_;
    switch (kind_) {
      case NoiseKind::kLaplace:
        return std::exp(-std::abs(z) / b) / (2.0 * b);
      case NoiseKind::kGumbel:
        return std::exp(-(z / b + std::exp(-z / b))) / b;
      case NoiseKind::kExponential:
        return z < 0 ? 0.0 : std::exp(-z / b) / b;
    }
    return 0.0;
  }

  double Cdf(double z) const {
    const double b = scale_;
    switch (kind_) {
      case NoiseKind::kLaplace:
        return z < 0 ? 0.5 * std::exp(z / b) : 1.0 - 0.5 * std::exp(-z / b);
      case NoiseKind::kGumbel:
        return std::exp(-std::exp(-z / b));
      case NoiseKind::kExponential:
        return z < 0 ? 0.0 : -std::expm1(-z / b);
    }
    return 0.0;
  }

  double Mean() const {
    switch (kind_) {
      case NoiseKind::kLaplace:
        return 0.0;
      case NoiseKind::kGumbel:
        return scale_ * kEulerMascheroni;
      case NoiseKind::kExponential:
        return scale_;
    }
    return 0.0;
  }

  static constexpr double kEulerMascheroni = 0.57721566490153286061;

 private:
  NoiseSpec(NoiseKind kind, double scale) : kind_(kind), scale_(scale) {}

  NoiseKind kind_;
  double scale_;
};

}  // namespace dpq

#endif  // DPQ_NOISE_H_
