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

#include <benchmark/benchmark.h>

#include <vector>

#include "fedsched/allocator.h"
#include "fedsched/channel.h"
#include "fedsched/learner.h"
#include "fedsched/rng.h"
#include "fedsched/scheduler.h"
#include "fedsched/simulator.h"

namespace fedsched {
namespace {

DeviceProfile default_device() {
  DeviceProfile p;
  p.data_size = 3000;
  p.shift_s_per_sample = 0.002;
  p.max_rate_per_s = 4000.0;
  p.tx_power_dbm_per_mhz = 7.0;
  return p;
}

CellConfig default_cell() {
  CellConfig c;
  c.model_size_bits = static_cast<double>(kParamCount) * kBitsPerParam;
  return c;
}

CandidateView random_view(int m, std::uint64_t seed) {
  const CellConfig cell = default_cell();
  std::vector<DeviceProfile> devices(m, default_device());
  for (int i = 0; i < m; ++i) devices[i].id = i;
  RngStream rng(seed);
  ChannelState channel;
  for (double d : sample_positions(m, cell.radius_m, rng)) {
    channel.push_back(make_link(cell, 7.0, d));
  }
  return build_candidate_view(cell, devices, channel);
}

void BM_SolveRoundLatency(benchmark::State& state) {
  const CandidateView view = random_view(static_cast<int>(state.range(0)), 1);
  const double s = default_cell().model_size_bits;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_round_latency(view.tasks, s, 1e-3));
  }
}
BENCHMARK(BM_SolveRoundLatency)->Arg(2)->Arg(10)->Arg(20)->Arg(100);

void BM_GreedySchedule(benchmark::State& state) {
  const CandidateView view = random_view(static_cast<int>(state.range(0)), 2);
  const Allocator alloc(default_cell().model_size_bits, 1e-3);
  const ConvergenceParams cp{63.919, 0.139};
  for (auto _ : state) {
    benchmark::DoNotOptimize(greedy_schedule(view, cp, alloc));
  }
}
BENCHMARK(BM_GreedySchedule)->Arg(20)->Arg(100);

void BM_BruteForceSchedule(benchmark::State& state) {
  const CandidateView view = random_view(static_cast<int>(state.range(0)), 3);
  const Allocator alloc(default_cell().model_size_bits, 1e-3);
  const ConvergenceParams cp{63.919, 0.139};
  for (auto _ : state) {
    benchmark::DoNotOptimize(brute_force_schedule(view, cp, alloc));
  }
}
BENCHMARK(BM_BruteForceSchedule)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_LocalUpdate(benchmark::State& state) {
  RngStream data_rng(4);
  const Dataset local = make_synthetic(SyntheticSpec{3000, kNumClasses, 0.3}, data_rng);
  RngStream init_rng(5);
  const ModelParams p = init_model(init_rng);
  for (auto _ : state) {
    RngStream rng(6);
    benchmark::DoNotOptimize(local_update(p, local, 0.01, 10, 1, rng));
  }
}
BENCHMARK(BM_LocalUpdate)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace fedsched

BENCHMARK_MAIN();
