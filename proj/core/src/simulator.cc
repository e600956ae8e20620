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

#include "fedsched/simulator.h"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace fedsched {

void PolicySpec::validate(int num_devices) const {
  switch (kind) {
    case Kind::kRandom:
    case Kind::kProportionalFair:
      if (k_fixed < 1 || k_fixed > num_devices) {
        throw std::invalid_argument("policy k must lie in [1, " +
                                    std::to_string(num_devices) + "]");
      }
      break;
    case Kind::kClThreshold:
      if (!(threshold_s > 0.0)) {
        throw std::invalid_argument("policy threshold_s must be > 0");
      }
      break;
    case Kind::kBruteForce:
      if (num_devices > static_cast<int>(kMaxBruteForceDevices)) {
        throw std::invalid_argument("brute force policy supports at most 16 devices");
      }
      break;
    case Kind::kGreedy:
      break;
  }
}

std::string to_string(PolicySpec::Kind kind) {
  switch (kind) {
    case PolicySpec::Kind::kGreedy: return "greedy";
    case PolicySpec::Kind::kRandom: return "random";
    case PolicySpec::Kind::kProportionalFair: return "pf";
    case PolicySpec::Kind::kClThreshold: return "cl";
    case PolicySpec::Kind::kBruteForce: return "brute_force";
  }
  return "unknown";
}

std::optional<PolicySpec::Kind> policy_kind_from_string(std::string_view name) {
  using K = PolicySpec::Kind;
  static const std::map<std::string_view, K> kNames = {
      {"greedy", K::kGreedy},      {"random", K::kRandom},
      {"pf", K::kProportionalFair}, {"cl", K::kClThreshold},
      {"brute_force", K::kBruteForce}};
  const auto it = kNames.find(name);
  if (it == kNames.end()) return std::nullopt;
  return it->second;
}

void SimConfig::validate() const {
  cell.validate();
  if (devices.empty()) throw std::invalid_argument("config: no devices");
  for (std::size_t i = 0; i < devices.size(); ++i) {
    devices[i].validate();
    if (i > 0 && devices[i - 1].id >= devices[i].id) {
      throw std::invalid_argument("config: device ids must be strictly increasing");
    }
  }
  partition.validate();
  policy.validate(num_devices());
  convergence.validate(num_devices());
  if (!(learning.lr >= 0.0) || learning.batch_size < 1 || learning.epochs < 1) {
    throw std::invalid_argument("config: invalid learning parameters");
  }
  if (stop.max_rounds < 0 || stop.budget_s < 0.0 ||
      (stop.max_rounds == 0 && stop.budget_s == 0.0)) {
    throw std::invalid_argument(
        "config: need max_rounds >= 1 or a positive time budget");
  }
}

CandidateView build_candidate_view(const CellConfig& cell,
                                   std::span<const DeviceProfile> devices,
                                   const ChannelState& channel) {
  CandidateView view;
  view.channel = channel;
  view.tasks.reserve(devices.size());
  for (std::size_t i = 0; i < devices.size(); ++i) {
    view.tasks.push_back({devices[i].id, expected_comp_latency(devices[i]),
                          link_capacity_bps(cell, channel[i])});
  }
  return view;
}

Schedule select_devices(const PolicySpec& policy, const CandidateView& view,
                        const ConvergenceParams& cp, const Allocator& alloc,
                        RngStream& rng) {
  switch (policy.kind) {
    case PolicySpec::Kind::kGreedy:
      return greedy_schedule(view, cp, alloc);
    case PolicySpec::Kind::kRandom:
      return random_schedule(view, policy.k_fixed, rng);
    case PolicySpec::Kind::kProportionalFair:
      return proportional_fair_schedule(view, policy.k_fixed);
    case PolicySpec::Kind::kClThreshold:
      return cl_threshold_schedule(view, policy.threshold_s, alloc);
    case PolicySpec::Kind::kBruteForce:
      return brute_force_schedule(view, cp, alloc);
  }
  throw std::logic_error("select_devices: unknown policy");
}

RoundLatency simulate_round_latency(const SimConfig& config, int round) {
  const auto r = static_cast<std::uint64_t>(round);
  RngStream placement = derive_stream(config.seed, StreamKind::kPlacement, r);
  RngStream fading = derive_stream(config.seed, StreamKind::kFading, r);
  RngStream policy_rng = derive_stream(config.seed, StreamKind::kPolicy, r);

  RoundLatency out;
  out.channel = observe_channel(config.cell, config.devices, placement, fading);
  const CandidateView view =
      build_candidate_view(config.cell, config.devices, out.channel);
  const Allocator alloc(config.cell.model_size_bits, config.cell.epsilon);
  out.scheduled =
      select_devices(config.policy, view, config.convergence, alloc, policy_rng);
  if (out.scheduled.empty()) {
    throw std::logic_error("policy returned an empty schedule");
  }

  for (DeviceId id : out.scheduled) {
    const auto it = std::find_if(config.devices.begin(), config.devices.end(),
                                 [id](const DeviceProfile& p) { return p.id == id; });
    const auto i = static_cast<std::size_t>(it - config.devices.begin());
    RngStream compute = derive_stream(config.seed, StreamKind::kCompute, r,
                                      static_cast<std::uint64_t>(id));
    out.realized.push_back({id, sample_comp_latency(*it, compute),
                            view.tasks[i].capacity_bps});
  }
  out.plan = alloc.plan(out.realized);
  return out;
}

Simulator::Simulator(SimConfig config, const Dataset& train, const Dataset& test)
    : config_(std::move(config)), test_(test) {
  RngStream init = derive_stream(config_.seed, StreamKind::kModelInit);
  global_ = init_model(init);
  config_.cell.model_size_bits = model_size_bits(global_);
  config_.validate();
  for (const auto& d : config_.devices) {
    if (static_cast<std::size_t>(d.data_size) != config_.partition.per_device_size) {
      throw std::invalid_argument(
          "config: device data_size must equal the partition per-device size");
    }
  }
  RngStream part = derive_stream(config_.seed, StreamKind::kPartition);
  local_ = partition(train, config_.num_devices(), config_.partition, part);
}

RoundMetrics Simulator::run_round() {
  ++round_;
  last_ = simulate_round_latency(config_, round_);

  std::vector<ModelParams> uploads;
  uploads.reserve(last_.scheduled.size());
  for (DeviceId id : last_.scheduled) {
    const auto it = std::find_if(config_.devices.begin(), config_.devices.end(),
                                 [id](const DeviceProfile& p) { return p.id == id; });
    const auto i = static_cast<std::size_t>(it - config_.devices.begin());
    RngStream order = derive_stream(config_.seed, StreamKind::kDataOrder,
                                    static_cast<std::uint64_t>(round_),
                                    static_cast<std::uint64_t>(id));
    uploads.push_back(local_update(global_, local_[i], config_.learning.lr,
                                   config_.learning.batch_size,
                                   config_.learning.epochs, order));
  }
  global_ = aggregate(uploads);
  elapsed_s_ += last_.plan.round_latency_s;

  const Evaluation eval = evaluate(global_, test_);
  RoundMetrics m;
  m.round = round_;
  m.elapsed_s = elapsed_s_;
  m.round_latency_s = last_.plan.round_latency_s;
  m.scheduled = last_.scheduled;
  m.test_accuracy = eval.accuracy;
  m.test_loss = eval.loss;
  return m;
}

Trace run_experiment(const SimConfig& config, const Dataset& train,
                     const Dataset& test) {
  Simulator sim(config, train, test);
  const StopRule& stop = sim.config().stop;
  Trace trace;
  do {
    trace.push_back(sim.run_round());
    if (stop.max_rounds > 0 && sim.rounds_completed() >= stop.max_rounds) break;
  } while (stop.budget_s <= 0.0 || sim.elapsed_s() < stop.budget_s);
  return trace;
}

double best_accuracy_within_budget(const Trace& trace, double budget_s) {
  double best = 0.0;
  for (const auto& m : trace) {
    if (m.elapsed_s <= budget_s) best = std::max(best, m.test_accuracy);
  }
  return best;
}

TraceSummary summarize(const Trace& trace, double budget_s) {
  TraceSummary s;
  s.rounds = static_cast<int>(trace.size());
  if (trace.empty()) return s;
  s.best_accuracy = best_accuracy_within_budget(trace, budget_s);
  s.final_accuracy = trace.back().test_accuracy;
  for (const auto& m : trace) {
    s.mean_scheduled += m.scheduled_count();
    s.mean_round_latency_s += m.round_latency_s;
  }
  s.mean_scheduled /= s.rounds;
  s.mean_round_latency_s /= s.rounds;
  return s;
}

std::optional<int> first_round_reaching(const Trace& trace, double target) {
  for (const auto& m : trace) {
    if (m.test_accuracy >= target) return m.round;
  }
  return std::nullopt;
}

namespace {

RoundsMeasurement collect(const std::map<int, std::vector<std::optional<int>>>& hits) {
  RoundsMeasurement out;
  for (const auto& [k, rounds] : hits) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rounds) {
      if (r) {
        sum += *r;
        ++n;
      }
    }
    if (n == 0) {
      out.censored_k.push_back(k);
    } else {
      out.observations.push_back({k, sum / n});
    }
  }
  if (out.observations.empty()) {
    throw std::runtime_error(
        "rounds-to-accuracy: target never reached for any k (all censored)");
  }
  return out;
}

}  // namespace

RoundsMeasurement measure_rounds_to_accuracy(
    const SimConfig& config, const Dataset& train, const Dataset& test,
    double target, std::span<const int> k_values,
    std::span<const std::uint64_t> seeds) {
  if (k_values.empty() || seeds.empty()) {
    throw std::invalid_argument("rounds-to-accuracy: need k values and seeds");
  }
  std::map<int, std::vector<std::optional<int>>> hits;
  for (int k : k_values) {
    SimConfig c = config;
    c.policy = PolicySpec{PolicySpec::Kind::kRandom, k, 0.0};
    for (std::uint64_t seed : seeds) {
      c.seed = seed;
      hits[k].push_back(first_round_reaching(run_experiment(c, train, test), target));
    }
  }
  return collect(hits);
}

RoundsMeasurement rounds_from_traces(std::span<const Trace> traces,
                                     double target) {
  std::map<int, std::vector<std::optional<int>>> hits;
  for (const auto& t : traces) {
    if (t.empty()) continue;
    const int k = t.front().scheduled_count();
    for (const auto& m : t) {
      if (m.scheduled_count() != k) {
        throw std::invalid_argument(
            "rounds-to-accuracy: trace schedules a varying number of devices");
      }
    }
    hits[k].push_back(first_round_reaching(t, target));
  }
  return collect(hits);
}

}  // namespace fedsched
