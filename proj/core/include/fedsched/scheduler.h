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

// Device selection policies.
//
// Every policy sees a CandidateView: one UploadTask per available device
// (carrying the decision-time computation latency) plus the channel snapshot.
// Policies return the selected device ids sorted ascending. Argmin ties are
// broken toward the lowest device id everywhere.

#ifndef FEDSCHED_SCHEDULER_H_
#define FEDSCHED_SCHEDULER_H_

#include <span>
#include <utility>
#include <vector>

#include "fedsched/allocator.h"
#include "fedsched/channel.h"
#include "fedsched/rng.h"

namespace fedsched {

// N(k) = beta (theta + 1/k) rounds to reach a target accuracy.
struct ConvergenceParams {
  double beta = 1.0;
  double theta = 0.0;

  double rounds(int k) const { return beta * (theta + 1.0 / k); }

  // beta > 0 and rounds(k) > 0 for every k in [1, max_k].
  void validate(int max_k) const;
};

double rounds_to_accuracy(int k, const ConvergenceParams& cp);

// Tasks must be sorted by strictly increasing device id and index-aligned with
// `channel`.
struct CandidateView {
  std::vector<UploadTask> tasks;
  ChannelState channel;

  std::size_t size() const { return tasks.size(); }
  void validate() const;
};

// Round-latency evaluator handed to the policies.
class Allocator {
 public:
  Allocator(double model_size_bits, double epsilon)
      : model_size_bits_(model_size_bits), epsilon_(epsilon) {}

  double model_size_bits() const { return model_size_bits_; }
  double epsilon() const { return epsilon_; }

  RoundPlan plan(std::span<const UploadTask> tasks) const {
    return solve_round_latency(tasks, model_size_bits_, epsilon_);
  }
  double round_latency(std::span<const UploadTask> tasks) const {
    return plan(tasks).round_latency_s;
  }

 private:
  double model_size_bits_;
  double epsilon_;
};

using Schedule = std::vector<DeviceId>;

// Round latency of a subset of the view, evaluated in device-id order so the
// same set always yields the same floating-point result.
double subset_latency(const CandidateView& view, std::span<const DeviceId> ids,
                      const Allocator& alloc);

// beta (theta + 1/|ids|) * subset_latency(ids).
double schedule_objective(const CandidateView& view,
                          std::span<const DeviceId> ids,
                          const ConvergenceParams& cp, const Allocator& alloc);

struct GreedyTrace {
  std::vector<DeviceId> order;            // admission order
  std::vector<double> prefix_latency_s;   // t_round of each accepted prefix
  std::vector<double> prefix_objective;   // beta (theta + 1/j) t_round
};

// Adds the device minimizing the round latency of the enlarged set until the
// objective would increase. The first device is always admitted.
GreedyTrace greedy_schedule_trace(const CandidateView& view,
                                  const ConvergenceParams& cp,
                                  const Allocator& alloc);

Schedule greedy_schedule(const CandidateView& view, const ConvergenceParams& cp,
                         const Allocator& alloc);

// Uniform k-subset without replacement.
Schedule random_schedule(const CandidateView& view, int k_fixed,
                         RngStream& rng);

// The k devices with the largest path gain.
Schedule proportional_fair_schedule(const CandidateView& view, int k_fixed);

// Same admission order as the greedy policy; stops once the enlarged set would
// exceed `threshold_s`. Always admits at least one device.
Schedule cl_threshold_schedule(const CandidateView& view, double threshold_s,
                               const Allocator& alloc);

inline constexpr std::size_t kMaxBruteForceDevices = 16;

// Exact minimizer of schedule_objective over all non-empty subsets. Ties go to
// the smaller set, then the lexicographically smaller id list.
Schedule brute_force_schedule(const CandidateView& view,
                              const ConvergenceParams& cp,
                              const Allocator& alloc);

// One (k, rounds-to-target) measurement.
struct RoundsObservation {
  int k = 1;
  double rounds = 0.0;
};

// Least squares of N on (1, 1/k): N = beta theta + beta / k.
ConvergenceParams fit_convergence_params(
    std::span<const RoundsObservation> observations);

}  // namespace fedsched

#endif  // FEDSCHED_SCHEDULER_H_
