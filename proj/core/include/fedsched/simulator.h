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

// Round-by-round federated learning over a wireless cell.
//
// Each round: re-place devices, let the policy pick a set from expected
// computation latencies, draw realized latencies for the picked devices,
// allocate bandwidth on the realized values, train locally, average, advance
// the clock by the allocator's round latency and evaluate. Broadcast and
// aggregation take no time.

#ifndef FEDSCHED_SIMULATOR_H_
#define FEDSCHED_SIMULATOR_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedsched/allocator.h"
#include "fedsched/channel.h"
#include "fedsched/learner.h"
#include "fedsched/scheduler.h"

namespace fedsched {

struct PolicySpec {
  enum class Kind { kGreedy, kRandom, kProportionalFair, kClThreshold, kBruteForce };
  Kind kind = Kind::kGreedy;
  int k_fixed = 1;           // random / proportional fair
  double threshold_s = 0.0;  // client-selection threshold

  void validate(int num_devices) const;
};

std::string to_string(PolicySpec::Kind kind);
std::optional<PolicySpec::Kind> policy_kind_from_string(std::string_view name);

struct LearningParams {
  double lr = 0.01;
  std::size_t batch_size = 10;
  int epochs = 1;
};

// Stops after max_rounds (when > 0) or once the clock reaches budget_s (when
// > 0), whichever comes first. At least one round always runs.
struct StopRule {
  int max_rounds = 0;
  double budget_s = 0.0;
};

struct SimConfig {
  CellConfig cell;
  std::vector<DeviceProfile> devices;
  PartitionSpec partition;
  ConvergenceParams convergence;
  PolicySpec policy;
  LearningParams learning;
  StopRule stop;
  std::uint64_t seed = 1;

  int num_devices() const { return static_cast<int>(devices.size()); }
  void validate() const;
};

struct RoundMetrics {
  int round = 0;  // 1-based
  double elapsed_s = 0.0;
  double round_latency_s = 0.0;
  std::vector<DeviceId> scheduled;
  double test_accuracy = 0.0;
  double test_loss = 0.0;

  int scheduled_count() const { return static_cast<int>(scheduled.size()); }
};

using Trace = std::vector<RoundMetrics>;

// Tasks with decision-time (expected) computation latency for every device.
CandidateView build_candidate_view(const CellConfig& cell,
                                   std::span<const DeviceProfile> devices,
                                   const ChannelState& channel);

Schedule select_devices(const PolicySpec& policy, const CandidateView& view,
                        const ConvergenceParams& cp, const Allocator& alloc,
                        RngStream& rng);

// What happened on the radio side of one round; exposed for tests and tools.
struct RoundLatency {
  ChannelState channel;
  Schedule scheduled;
  std::vector<UploadTask> realized;  // parallel to `scheduled`
  RoundPlan plan;
};

// Placement, policy and allocation of round `round` for the given seed. Pure
// function of its arguments.
RoundLatency simulate_round_latency(const SimConfig& config, int round);

class Simulator {
 public:
  // Partitions `train` across the configured devices and initializes the
  // global model; the model size in the cell config is set from the model.
  Simulator(SimConfig config, const Dataset& train, const Dataset& test);

  RoundMetrics run_round();

  const SimConfig& config() const { return config_; }
  const ModelParams& global_model() const { return global_; }
  double elapsed_s() const { return elapsed_s_; }
  int rounds_completed() const { return round_; }
  const std::vector<Dataset>& local_data() const { return local_; }
  const RoundLatency& last_latency() const { return last_; }

 private:
  SimConfig config_;
  const Dataset& test_;
  std::vector<Dataset> local_;
  ModelParams global_;
  double elapsed_s_ = 0.0;
  int round_ = 0;
  RoundLatency last_;
};

Trace run_experiment(const SimConfig& config, const Dataset& train,
                     const Dataset& test);

// Max accuracy over rounds finishing within the budget; 0 if none do.
double best_accuracy_within_budget(const Trace& trace, double budget_s);

struct TraceSummary {
  int rounds = 0;
  double best_accuracy = 0.0;
  double final_accuracy = 0.0;
  double mean_scheduled = 0.0;
  double mean_round_latency_s = 0.0;
};

TraceSummary summarize(const Trace& trace, double budget_s);

// First 1-based round whose accuracy reaches `target`, if any.
std::optional<int> first_round_reaching(const Trace& trace, double target);

struct RoundsMeasurement {
  std::vector<RoundsObservation> observations;
  std::vector<int> censored_k;
};

// For each k, random-k experiments over `seeds`; records the mean first round
// reaching `target` over the uncensored seeds. A k where no seed reaches the
// target is censored. Throws if every k is censored.
RoundsMeasurement measure_rounds_to_accuracy(const SimConfig& config,
                                             const Dataset& train,
                                             const Dataset& test, double target,
                                             std::span<const int> k_values,
                                             std::span<const std::uint64_t> seeds);

// Observations from already-recorded traces. The k of each trace is its
// (constant) scheduled count.
RoundsMeasurement rounds_from_traces(std::span<const Trace> traces,
                                     double target);

}  // namespace fedsched

#endif  // FEDSCHED_SIMULATOR_H_
