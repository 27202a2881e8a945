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

#ifndef DPQ_LOG_HISTOGRAM_H_
#define DPQ_LOG_HISTOGRAM_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "dpq/sparse_vector.h"
#include "nlohmann/json.hpp"

namespace dpq {

// The candidate grid 1, beta, beta^2, ... built by repeated multiplication.
// Every consumer (bucketing, counting, output) reads powers from a grid like
// this one, so bucket boundaries and reported candidates agree bit for bit.
class PowerGrid {
 public:
  explicit PowerGrid(double beta) : beta_(beta), powers_{1.0} {}

  double beta() const { return beta_; }

  double At(int64_t i) {
    while (static_cast<int64_t>(powers_.size()) <= i) {
      powers_.push_back(powers_.back() * beta_);
    }
    return powers_[i];
  }

 private:
  double beta_;
  std::vector<double> powers_;
};

// Counts of shifted values v = x - l + 1 per geometric bucket
// [beta^i, beta^{i+1}). Immutable once built; safe to share across threads.
class LogBucketHistogram {
 public:
  using Bucket = std::pair<int64_t, int64_t>;  // (index, count)

  LogBucketHistogram(double beta, double ell, std::vector<Bucket> buckets)
      : beta_(beta), ell_(ell), buckets_(std::move(buckets)) {
    for (const Bucket& bucket : buckets_) total_ += bucket.second;
  }

  double beta() const { return beta_; }
  double lower_bound() const { return ell_; }
  int64_t total() const { return total_; }

  // Nonempty buckets in increasing index order.
  std::span<const Bucket> buckets() const { return buckets_; }

  int64_t Count(int64_t index) const {
    auto it = std::lower_bound(buckets_.begin(), buckets_.end(),
                               Bucket{index, 0});
    return it != buckets_.end() && it->first == index ? it->second : 0;
  }

  // |{x_j : x_j - l + 1 < beta^i}|, the total of buckets below i.
  int64_t PrefixCount(int64_t index) const {
    int64_t sum = 0;
    for (const Bucket& bucket : buckets_) {
      if (bucket.first >= index) break;
      sum += bucket.second;
    }
    return sum;
  }

  nlohmann::json ToJson() const {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [index, count] : buckets_) {
      counts[std::to_string(index)] = count;
    }
    return {{"beta", beta_}, {"ell", ell_}, {"counts", counts}};
  }

  static absl::StatusOr<LogBucketHistogram> FromJson(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("beta") || !j.contains("ell") ||
        !j.contains("counts") || !j["counts"].is_object()) {
      return absl::InvalidArgumentError(
          "Histogram JSON needs keys beta, ell and counts");
    }
    const double beta = j["beta"].get<double>();
    if (!(beta > 1) || !std::isfinite(beta)) {
      return absl::InvalidArgumentError(
          absl::StrCat("Histogram beta must exceed 1, got ", beta));
    }
    std::vector<Bucket> buckets;
    for (const auto& [key, value] : j["counts"].items()) {
      int64_t index = 0;
      try {
        size_t used = 0;
        index = std::stoll(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        return absl::InvalidArgumentError(
            absl::StrCat("Bad bucket index '", key, "'"));
      }
      const int64_t count = value.get<int64_t>();
      if (index < 0 || count <= 0) {
        return absl::InvalidArgumentError(absl::StrCat(
            "Bucket ", index, " has invalid index or count ", count));
      }
      buckets.emplace_back(index, count);
    }
    std::sort(buckets.begin(), buckets.end());
    return LogBucketHistogram(beta, j["ell"].get<double>(), std::move(buckets));
  }

 private:
  double beta_;
  double ell_;
  std::vector<Bucket> buckets_;
  int64_t total_ = 0;
};

namespace internal {

// Past this index the grid is not materialized and the log guess stands.
// It sits far beyond kDefaultMaxQueries, so those points only ever count
// toward the total.
inline constexpr int64_t kMaxExactBucket = int64_t{1} << 22;

// Bucket indices below this are counted in a dense array.
inline constexpr int64_t kDenseBucketLimit = int64_t{1} << 20;

// Bucket of a shifted value v >= 1: the i with grid[i] <= v < grid[i+1].
// The log gives a guess; the grid comparison settles boundary cases.
inline int64_t BucketIndex(double shifted, double log_beta, PowerGrid& grid) {
  const double guess = std::floor(std::log(shifted) / log_beta);
  if (guess >= static_cast<double>(kMaxExactBucket)) {
    return guess >= 9.0e18 ? int64_t{9000000000000000000}
                           : static_cast<int64_t>(guess);
  }
  int64_t index = std::max<int64_t>(static_cast<int64_t>(guess), 0);
  while (index > 0 && shifted < grid.At(index)) --index;
  while (shifted >= grid.At(index + 1)) ++index;
  return index;
}

}  // namespace internal

// Single O(n) pass over unsorted values. Fails on values below `ell`,
// non-finite values or beta <= 1.
inline absl::StatusOr<LogBucketHistogram> BuildHistogram(
    std::span<const double> values, double beta, double ell) {
  if (!std::isfinite(beta) || !(beta > 1)) {
    return absl::InvalidArgumentError(
        absl::StrCat("beta must be finite and greater than 1, got ", beta));
  }
  if (!std::isfinite(ell)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Lower bound must be finite, got ", ell));
  }
  PowerGrid grid(beta);
  const double log_beta = std::log(beta);
  // Dense counts for low indices, a hash map for the sparse tail.
  std::vector<int64_t> dense;
  absl::flat_hash_map<int64_t, int64_t> sparse;
  for (size_t j = 0; j < values.size(); ++j) {
    const double x = values[j];
    if (!std::isfinite(x)) {
      return absl::InvalidArgumentError(
          absl::StrCat("Value at position ", j, " is not finite"));
    }
    if (x < ell) {
      return absl::InvalidArgumentError(absl::StrCat(
          "Value ", x, " at position ", j, " is below the lower bound ", ell));
    }
    const int64_t index = internal::BucketIndex(x - ell + 1.0, log_beta, grid);
    if (index < internal::kDenseBucketLimit) {
      if (index >= static_cast<int64_t>(dense.size())) {
        dense.resize(std::max<size_t>(index + 1, 2 * dense.size()), 0);
      }
      ++dense[index];
    } else {
      ++sparse[index];
    }
  }
  std::vector<LogBucketHistogram::Bucket> buckets;
  for (size_t index = 0; index < dense.size(); ++index) {
    if (dense[index] > 0) {
      buckets.emplace_back(static_cast<int64_t>(index), dense[index]);
    }
  }
  const size_t dense_end = buckets.size();
  buckets.insert(buckets.end(), sparse.begin(), sparse.end());
  std::sort(buckets.begin() + dense_end, buckets.end());
  return LogBucketHistogram(beta, ell, std::move(buckets));
}

// f_i = base + |{x_j : x_j - l + 1 < beta^i}| for i = first_index,
// first_index + 1, ... Each Next() advances a cursor through the sorted
// buckets, so a run of k queries costs O(k + buckets touched).
//
// Sensitivity 1 and monotonic under swap neighbors.
class CountingQueryStream {
 public:
  explicit CountingQueryStream(const LogBucketHistogram& histogram,
                               int64_t first_index = 1, int64_t base_count = 0,
                               int64_t max_queries = kDefaultMaxQueries)
      : buckets_(histogram.buckets()),
        next_index_(first_index),
        prefix_(base_count),
        max_queries_(max_queries) {}

  double Next() {
    while (cursor_ < buckets_.size() && buckets_[cursor_].first < next_index_) {
      prefix_ += buckets_[cursor_].second;
      ++cursor_;
    }
    ++next_index_;
    return static_cast<double>(prefix_);
  }

  // Grid index of the query the next call to Next() evaluates.
  int64_t next_index() const { return next_index_; }

  double sensitivity() const { return 1.0; }
  bool monotonic() const { return true; }
  int64_t max_queries() const { return max_queries_; }

 private:
  std::span<const LogBucketHistogram::Bucket> buckets_;
  size_t cursor_ = 0;
  int64_t next_index_;
  int64_t prefix_;
  int64_t max_queries_;
};

static_assert(QueryStream<CountingQueryStream>);
static_assert(QueryStream<ValueStream>);

}  // namespace dpq

#endif  // DPQ_LOG_HISTOGRAM_H_
