// Copyright 2026 The fedsched Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FEDSCHED_RNG_H_
#define FEDSCHED_RNG_H_

#include <cstdint>
#include <random>

namespace fedsched {

// Named sub-streams derived from one master seed. Each (kind, round, device)
// triple maps to an independent engine, so the draws a device sees in a round
// never depend on what other devices or the scheduling policy consumed.
enum class StreamKind : std::uint64_t {
  kPlacement = 1,
  kCompute = 2,
  kDataOrder = 3,
  kPolicy = 4,
  kModelInit = 5,
  kPartition = 6,
  kFading = 7,
  kSynthetic = 8,
};

// Thin wrapper over mt19937_64 with distribution code written out by hand:
// std::*_distribution output is implementation-defined, these are not.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }

  // Unbiased integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  // Standard normal via Box-Muller; one value per call.
  double normal();

  // Exponential with the given rate, by inverse CDF.
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

RngStream derive_stream(std::uint64_t master_seed, StreamKind kind,
                        std::uint64_t round = 0, std::uint64_t device = 0);

}  // namespace fedsched

#endif  // FEDSCHED_RNG_H_
