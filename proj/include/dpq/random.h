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

#ifndef DPQ_RANDOM_H_
#define DPQ_RANDOM_H_

#include <cmath>
#include <cstdint>
#include <random>

namespace dpq {

// Seedable source of randomness. Each (seed, stream) pair names an
// independent, reproducible sequence, so parallel trials can each own a
// stream. Not thread-safe; one instance per thread.
//
// All derived draws are computed from raw 64-bit words rather than through
// std::*_distribution, whose algorithms are implementation-defined. That keeps
// sequences bit-identical across standard libraries.
class RandomSource {
 public:
  explicit RandomSource(uint64_t seed, uint64_t stream = 0)
      : seed_(seed), stream_(stream), engine_(MakeEngine(seed, stream)) {}

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

  uint64_t NextU64() { return engine_(); }

  // Uniform on the open interval (0, 1). Never returns 0 or 1.
  double UniformOpen() {
    return (static_cast<double>(NextU64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform on [0, 1).
  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n). Lemire's multiply-and-reject; n > 0.
  uint64_t UniformIndex(uint64_t n) {
    unsigned __int128 product =
        static_cast<unsigned __int128>(NextU64()) * n;
    uint64_t low = static_cast<uint64_t>(product);
    if (low < n) {
      const uint64_t floor = (0 - n) % n;
      while (low < floor) {
        product = static_cast<unsigned __int128>(NextU64()) * n;
        low = static_cast<uint64_t>(product);
      }
    }
    return static_cast<uint64_t>(product >> 64);
  }

  // Standard normal via Box-Muller; consumes exactly two words per call.
  double StandardNormal() {
    const double u1 = UniformOpen();
    const double u2 = UniformOpen();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double Normal(double mean, double stddev) {
    return mean + stddev * StandardNormal();
  }

 private:
  static std::mt19937_64 MakeEngine(uint64_t seed, uint64_t stream) {
    std::seed_seq seq{static_cast<uint32_t>(seed),
                      static_cast<uint32_t>(seed >> 32),
                      static_cast<uint32_t>(stream),
                      static_cast<uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
  }

  uint64_t seed_;
  uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace dpq

#endif  // DPQ_RANDOM_H_
