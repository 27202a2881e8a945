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

// Noise-free AboveThreshold for verification only. NOT differentially
// private; never reachable from the estimators' public entry points.

#ifndef DPQ_TESTING_NOISELESS_H_
#define DPQ_TESTING_NOISELESS_H_

#include <cstdint>

#include "absl/status/statusor.h"
#include "dpq/sparse_vector.h"

namespace dpq::testing {

// Halts at the first k with f_k >= threshold.
template <QueryStream S>
SvtOutcome RunAboveThresholdNoiseless(S& stream, double threshold) {
  const int64_t cap = stream.max_queries();
  for (int64_t k = 1; k <= cap; ++k) {
    if (stream.Next() >= threshold) return SvtOutcome::Halted(k);
  }
  return SvtOutcome::Exhausted(cap);
}

// Runner with the same shape as the private runner in quantile.h.
struct NoiselessRunner {
  template <QueryStream S>
  absl::StatusOr<SvtOutcome> operator()(S& stream, double threshold) const {
    return RunAboveThresholdNoiseless(stream, threshold);
  }
};

}  // namespace dpq::testing

#endif  // DPQ_TESTING_NOISELESS_H_
