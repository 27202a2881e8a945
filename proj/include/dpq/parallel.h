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

#ifndef DPQ_PARALLEL_H_
#define DPQ_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace dpq {

// Calls fn(task) for every task in [0, num_tasks), spread over worker
// threads. Results must be written to per-task slots; callers combine them in
// task order so output does not depend on scheduling.
template <typename Fn>
void ParallelFor(int64_t num_tasks, Fn&& fn) {
  if (num_tasks <= 0) return;
  const int64_t workers = std::min<int64_t>(
      num_tasks, std::max(1u, std::thread::hardware_concurrency()));
  if (workers == 1) {
    for (int64_t task = 0; task < num_tasks; ++task) fn(task);
    return;
  }
  std::atomic<int64_t> next{0};
  std::vector<std::jthread> threads;
  threads.reserve(workers);
  for (int64_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (int64_t task = next++; task < num_tasks; task = next++) fn(task);
    });
  }
}

}  // namespace dpq

#endif  // DPQ_PARALLEL_H_
