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

// Uplink bandwidth allocation for a fixed set of scheduled devices.
//
// Given per-device computation latencies t_i and full-band capacities c_i, the
// min-max round latency is reached when every device finishes at the same
// instant T, i.e. gamma_i = S / ((T - t_i) c_i) with sum(gamma_i) = 1. The sum
// is strictly decreasing in T on (max t_i, inf), so T is found by bisection.

#ifndef FEDSCHED_ALLOCATOR_H_
#define FEDSCHED_ALLOCATOR_H_

#include <span>
#include <stdexcept>
#include <vector>

#include "fedsched/channel.h"

namespace fedsched {

struct UploadTask {
  DeviceId device_id = 0;
  double comp_latency_s = 0.0;
  double capacity_bps = 0.0;  // B log2(1 + SNR), full band
};

struct RoundPlan {
  std::vector<DeviceId> scheduled;
  std::vector<double> gamma;  // parallel to `scheduled`
  double round_latency_s = 0.0;
  int iterations = 0;
};

// Homogeneous-device summary used by the latency bounds.
struct HomogeneousParams {
  double local_size = 0.0;               // d, samples
  double shift_s_per_sample = 0.0;       // a
  double max_rate_per_s = 0.0;           // mu
  double expected_inverse_rate_s = 0.0;  // E{S / (B log2(1 + p h^2 / N0))}
};

enum class UpperBoundForm {
  kAsPrinted,        // a d + (k d / mu) H_k + k E{.}
  kOrderStatistic,   // a d + (d / mu) H_k + k E{.}
};

class AllocationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bandwidth fractions that make every task finish exactly at `target_s`. No
// normalization is applied, so the result may sum to more or less than one.
std::vector<double> allocation_from_latency(double target_s,
                                            std::span<const UploadTask> tasks,
                                            double model_size_bits);

// Sum of allocation_from_latency; +inf when target_s <= max t_i.
double bandwidth_demand(double target_s, std::span<const UploadTask> tasks,
                        double model_size_bits);

// Bisection on [max t_i, max t_i + sum S / c_i] until the demand lies in
// [1 - epsilon, 1]. Throws AllocationError after 200 iterations.
RoundPlan solve_round_latency(std::span<const UploadTask> tasks,
                              double model_size_bits, double epsilon);

// t_i + S / (gamma_i c_i) for each scheduled task.
std::vector<double> finish_times(const RoundPlan& plan,
                                 std::span<const UploadTask> tasks,
                                 double model_size_bits);

HomogeneousParams homogeneous_params(const DeviceProfile& profile,
                                     const CellConfig& cell);

double latency_lower_bound(int k, const HomogeneousParams& params);

double latency_upper_bound(int k, const HomogeneousParams& params,
                           UpperBoundForm form = UpperBoundForm::kAsPrinted);

// beta (theta + 1/k) * latency_lower_bound(k): expected time to reach the
// target accuracy when k devices are scheduled per round.
double approx_objective(int k, double beta, double theta,
                        const HomogeneousParams& params);

}  // namespace fedsched

#endif  // FEDSCHED_ALLOCATOR_H_
