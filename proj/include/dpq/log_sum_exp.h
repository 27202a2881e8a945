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

#ifndef DPQ_LOG_SUM_EXP_H_
#define DPQ_LOG_SUM_EXP_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace dpq {

inline constexpr double kNegativeInfinity =
    -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow.
inline double LogAddExp(double a, double b) {
  if (a == kNegativeInfinity) return b;
  if (b == kNegativeInfinity) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// log(sum_i exp(args[i])); -inf for an empty span.
inline double LogSumExp(std::span<const double> args) {
  if (args.empty()) return kNegativeInfinity;
  const double max_arg = *std::max_element(args.begin(), args.end());
  if (max_arg == kNegativeInfinity) return kNegativeInfinity;
  double sum = 0.0;
  for (double a : args) sum += std::exp(a - max_arg);
  return max_arg + std::log(sum);
}

}  // namespace dpq

#endif  // DPQ_LOG_SUM_EXP_H_
