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

#include "fedsched/scheduler.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fedsched {
namespace {

std::size_t index_of(const CandidateView& view, DeviceId id) {
  const auto it = std::lower_bound(
      view.tasks.begin(), view.tasks.end(), id,
      [](const UploadTask& t, DeviceId v) { return t.device_id < v; });
  if (it == view.tasks.end() || it->device_id != id) {
    throw std::invalid_argument("device " + std::to_string(id) +
                                " is not in the candidate view");
  }
  return static_cast<std::size_t>(it - view.tasks.begin());
}

void check_k(const CandidateView& view, int k_fixed) {
  if (k_fixed < 1 || static_cast<std::size_t>(k_fixed) > view.size()) {
    throw std::invalid_argument("k_fixed = " + std::to_string(k_fixed) +
                                " outside [1, " + std::to_string(view.size()) +
                                "]");
  }
}

// Index of the remaining candidate whose addition yields the smallest round
// latency; `best_latency` receives that latency.
std::size_t fastest_addition(const CandidateView& view,
                             const std::vector<DeviceId>& selected,
                             const std::vector<bool>& taken,
                             const Allocator& alloc, double& best_latency) {
  std::size_t best = view.size();
  best_latency = std::numeric_limits<double>::infinity();
  std::vector<DeviceId> trial = selected;
  trial.push_back(0);
  for (std::size_t i = 0; i < view.size(); ++i) {
    if (taken[i]) continue;
    trial.back() = view.tasks[i].device_id;
    const double t = subset_latency(view, trial, alloc);
    if (t < best_latency) {  // strict: earlier (lower id) wins ties
      best_latency = t;
      best = i;
    }
  }
  return best;
}

}  // namespace

void ConvergenceParams::validate(int max_k) const {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  for (int k = 1; k <= max_k; ++k) {
    if (!(rounds(k) > 0.0)) {
      throw std::invalid_argument("beta (theta + 1/k) must be > 0 for k = " +
                                  std::to_string(k));
    }
  }
}

double rounds_to_accuracy(int k, const ConvergenceParams& cp) {
  if (k < 1) throw std::invalid_argument("rounds_to_accuracy: k must be >= 1");
  return cp.rounds(k);
}

void CandidateView::validate() const {
  if (tasks.size() != channel.size()) {
    throw std::invalid_argument("candidate view: tasks and channel differ in size");
  }
  for (std::size_t i = 1; i < tasks.size(); ++i) {
    if (tasks[i - 1].device_id >= tasks[i].device_id) {
      throw std::invalid_argument(
          "candidate view: device ids must be strictly increasing");
    }
  }
}

double subset_latency(const CandidateView& view, std::span<const DeviceId> ids,
                      const Allocator& alloc) {
  std::vector<std::size_t> idx;
  idx.reserve(ids.size());
  for (DeviceId id : ids) idx.push_back(index_of(view, id));
  std::sort(idx.begin(), idx.end());
  std::vector<UploadTask> tasks;
  tasks.reserve(idx.size());
  for (std::size_t i : idx) tasks.push_back(view.tasks[i]);
  return alloc.round_latency(tasks);
}

double schedule_objective(const CandidateView& view,
                          std::span<const DeviceId> ids,
                          const ConvergenceParams& cp, const Allocator& alloc) {
  const int k = static_cast<int>(ids.size());
  return cp.rounds(k) * subset_latency(view, ids, alloc);
}

GreedyTrace greedy_schedule_trace(const CandidateView& view,
                                  const ConvergenceParams& cp,
                                  const Allocator& alloc) {
  if (view.size() == 0) {
    throw std::invalid_argument("greedy_schedule: empty candidate view");
  }
  GreedyTrace trace;
  std::vector<bool> taken(view.size(), false);
  double current_latency = 0.0;

  while (trace.order.size() < view.size()) {
    double next_latency = 0.0;
    const std::size_t x =
        fastest_addition(view, trace.order, taken, alloc, next_latency);
    const int k = static_cast<int>(trace.order.size());
    if (k > 0 &&
        cp.rounds(k + 1) * next_latency > cp.rounds(k) * current_latency) {
      break;
    }
    taken[x] = true;
    trace.order.push_back(view.tasks[x].device_id);
    trace.prefix_latency_s.push_back(next_latency);
    trace.prefix_objective.push_back(cp.rounds(k + 1) * next_latency);
    current_latency = next_latency;
  }

  for (std::size_t j = 1; j < trace.prefix_objective.size(); ++j) {
    if (trace.prefix_objective[j] > trace.prefix_objective[j - 1]) {
      throw std::logic_error("greedy_schedule: prefix objective increased");
    }
  }
  return trace;
}

Schedule greedy_schedule(const CandidateView& view, const ConvergenceParams& cp,
                         const Allocator& alloc) {
  Schedule s = greedy_schedule_trace(view, cp, alloc).order;
  std::sort(s.begin(), s.end());
  return s;
}

Schedule random_schedule(const CandidateView& view, int k_fixed,
                         RngStream& rng) {
  check_k(view, k_fixed);
  std::vector<DeviceId> pool;
  pool.reserve(view.size());
  for (const auto& t : view.tasks) pool.push_back(t.device_id);
  // Partial Fisher-Yates.
  for (int i = 0; i < k_fixed; ++i) {
    const auto j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  Schedule s(pool.begin(), pool.begin() + k_fixed);
  std::sort(s.begin(), s.end());
  return s;
}

Schedule proportional_fair_schedule(const CandidateView& view, int k_fixed) {
  check_k(view, k_fixed);
  std::vector<std::size_t> idx(view.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return view.channel[a].path_gain > view.channel[b].path_gain;
  });
  Schedule s;
  for (int i = 0; i < k_fixed; ++i) s.push_back(view.tasks[idx[i]].device_id);
  std::sort(s.begin(), s.end());
  return s;
}

Schedule cl_threshold_schedule(const CandidateView& view, double threshold_s,
                               const Allocator& alloc) {
  if (!(threshold_s > 0.0)) {
    throw std::invalid_argument("cl_threshold_schedule: threshold must be > 0");
  }
  if (view.size() == 0) {
    throw std::invalid_argument("cl_threshold_schedule: empty candidate view");
  }
  Schedule s;
  std::vector<bool> taken(view.size(), false);
  while (s.size() < view.size()) {
    double latency = 0.0;
    const std::size_t x = fastest_addition(view, s, taken, alloc, latency);
    if (!s.empty() && latency > threshold_s) break;
    taken[x] = true;
    s.push_back(view.tasks[x].device_id);
  }
  std::sort(s.begin(), s.end());
  return s;
}

Schedule brute_force_schedule(const CandidateView& view,
                              const ConvergenceParams& cp,
                              const Allocator& alloc) {
  const std::size_t m = view.size();
  if (m == 0) throw std::invalid_argument("brute_force_schedule: empty view");
  if (m > kMaxBruteForceDevices) {
    throw std::invalid_argument("brute_force_schedule: at most " +
                                std::to_string(kMaxBruteForceDevices) +
                                " devices supported, got " + std::to_string(m));
  }
  Schedule best;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<DeviceId> ids;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    ids.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (1u << i)) ids.push_back(view.tasks[i].device_id);
    }
    const double obj = schedule_objective(view, ids, cp, alloc);
    const bool better =
        obj < best_obj ||
        (obj == best_obj &&
         (ids.size() < best.size() || (ids.size() == best.size() && ids < best)));
    if (better) {
      best_obj = obj;
      best = ids;
    }
  }
  return best;
}

ConvergenceParams fit_convergence_params(
    std::span<const RoundsObservation> observations) {
  if (observations.size() < 2) {
    throw std::invalid_argument(
        "fit_convergence_params: need observations at >= 2 distinct k");
  }
  const double n = static_cast<double>(observations.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& o : observations) {
    if (o.k < 1) throw std::invalid_argument("fit_convergence_params: k < 1");
    sx += 1.0 / o.k;
    sy += o.rounds;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& o : observations) {
    const double dx = 1.0 / o.k - mx;
    sxx += dx * dx;
    sxy += dx * (o.rounds - my);
  }
  if (!(sxx > 1e-300)) {
    throw std::invalid_argument(
        "fit_convergence_params: singular system, all k are equal");
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  if (!(slope > 0.0)) {
    throw std::runtime_error(
        "fit_convergence_params: fitted beta is not positive (rounds do not "
        "decrease with k)");
  }
  return ConvergenceParams{slope, intercept / slope};
}

}  // namespace fedsched
