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

#include "fedsched/allocator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fedsched {
namespace {

constexpr int kMaxBisectionIterations = 200;

double max_comp_latency(std::span<const UploadTask> tasks) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& t : tasks) m = std::max(m, t.comp_latency_s);
  return m;
}

void check_tasks(std::span<const UploadTask> tasks) {
  for (const auto& t : tasks) {
    if (!(t.comp_latency_s >= 0.0) || !(t.capacity_bps > 0.0)) {
      throw std::invalid_argument(
          "upload task for device " + std::to_string(t.device_id) +
          " needs comp latency >= 0 and capacity > 0");
    }
  }
}

}  // namespace

std::vector<double> allocation_from_latency(double target_s,
                                            std::span<const UploadTask> tasks,
                                            double model_size_bits) {
  std::vector<double> gamma;
  gamma.reserve(tasks.size());
  for (const auto& t : tasks) {
    const double slack = target_s - t.comp_latency_s;
    if (!(slack > 0.0)) {
      throw std::invalid_argument(
          "allocation_from_latency: target does not exceed the computation "
          "latency of device " + std::to_string(t.device_id));
    }
    gamma.push_back(model_size_bits / (slack * t.capacity_bps));
  }
  return gamma;
}

double bandwidth_demand(double target_s, std::span<const UploadTask> tasks,
                        double model_size_bits) {
  double s = 0.0;
  for (const auto& t : tasks) {
    const double slack = target_s - t.comp_latency_s;
    if (!(slack > 0.0)) return std::numeric_limits<double>::infinity();
    s += model_size_bits / (slack * t.capacity_bps);
  }
  return s;
}

RoundPlan solve_round_latency(std::span<const UploadTask> tasks,
                              double model_size_bits, double epsilon) {
  if (tasks.empty()) {
    throw std::invalid_argument("solve_round_latency: no scheduled devices");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("solve_round_latency: epsilon must be in (0,1)");
  }
  check_tasks(tasks);

  double low = max_comp_latency(tasks);
  double up = low;
  for (const auto& t : tasks) up += model_size_bits / t.capacity_bps;

  // T_up is feasible analytically; rounding can push the demand one ulp over.
  double demand = bandwidth_demand(up, tasks, model_size_bits);
  while (demand > 1.0) {
    up = std::nextafter(up, std::numeric_limits<double>::infinity());
    demand = bandwidth_demand(up, tasks, model_size_bits);
  }

  RoundPlan plan;
  double target = up;
  int iter = 0;
  while (!(demand >= 1.0 - epsilon && demand <= 1.0)) {
    if (++iter > kMaxBisectionIterations) {
      throw AllocationError(
          "solve_round_latency: no convergence after 200 iterations; epsilon "
          "is too small for double precision");
    }
    target = 0.5 * (low + up);
    demand = bandwidth_demand(target, tasks, model_size_bits);
    if (demand > 1.0) {
      low = target;
    } else if (demand < 1.0 - epsilon) {
      up = target;
    }
  }

  plan.round_latency_s = target;
  plan.iterations = iter;
  plan.gamma = allocation_from_latency(target, tasks, model_size_bits);
  plan.scheduled.reserve(tasks.size());
  for (const auto& t : tasks) plan.scheduled.push_back(t.device_id);
  return plan;
}

std::vector<double> finish_times(const RoundPlan& plan,
                                 std::span<const UploadTask> tasks,
                                 double model_size_bits) {
  std::vector<double> out;
  out.reserve(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    out.push_back(tasks[i].comp_latency_s +
                  model_size_bits / (plan.gamma.at(i) * tasks[i].capacity_bps));
  }
  return out;
}

HomogeneousParams homogeneous_params(const DeviceProfile& profile,
                                     const CellConfig& cell) {
  HomogeneousParams p;
  p.local_size = static_cast<double>(profile.data_size);
  p.shift_s_per_sample = profile.shift_s_per_sample;
  p.max_rate_per_s = profile.max_rate_per_s;
  p.expected_inverse_rate_s =
      expected_upload_time(cell, profile.tx_power_dbm_per_mhz);
  return p;
}

double latency_lower_bound(int k, const HomogeneousParams& params) {
  if (k < 1) throw std::invalid_argument("latency_lower_bound: k must be >= 1");
  const double d = params.local_size;
  return params.shift_s_per_sample * d + d / (k * params.max_rate_per_s) +
         k * params.expected_inverse_rate_s;
}

double latency_upper_bound(int k, const HomogeneousParams& params,
                           UpperBoundForm form) {
  if (k < 1) throw std::invalid_argument("latency_upper_bound: k must be >= 1");
  double harmonic = 0.0;
  for (int i = 1; i <= k; ++i) harmonic += 1.0 / i;
  const double d = params.local_size;
  const double tail_scale =
      form == UpperBoundForm::kAsPrinted ? k * d / params.max_rate_per_s
                                         : d / params.max_rate_per_s;
  return params.shift_s_per_sample * d + tail_scale * harmonic +
         k * params.expected_inverse_rate_s;
}

double approx_objective(int k, double beta, double theta,
                        const HomogeneousParams& params) {
  if (!(beta > 0.0)) throw std::invalid_argument("approx_objective: beta <= 0");
  return beta * (theta + 1.0 / k) * latency_lower_bound(k, params);
}

}  // namespace fedsched
