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

#include "fedsched/channel.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fedsched {

void DeviceProfile::validate() const {
  if (data_size < 1) {
    throw std::invalid_argument("device " + std::to_string(id) +
                                ": data_size must be >= 1");
  }
  if (!(shift_s_per_sample > 0.0)) {
    throw std::invalid_argument("device " + std::to_string(id) +
                                ": shift rate must be > 0");
  }
  if (!(max_rate_per_s > 0.0)) {
    throw std::invalid_argument("device " + std::to_string(id) +
                                ": max rate must be > 0");
  }
  if (!std::isfinite(tx_power_dbm_per_mhz)) {
    throw std::invalid_argument("device " + std::to_string(id) +
                                ": tx power must be finite");
  }
}

void CellConfig::validate() const {
  if (!(radius_m > 0.0)) throw std::invalid_argument("cell radius must be > 0");
  if (!(bandwidth_hz > 0.0)) {
    throw std::invalid_argument("bandwidth must be > 0");
  }
  if (!(pathloss_exponent > 0.0)) {
    throw std::invalid_argument("path loss exponent must be > 0");
  }
  if (!std::isfinite(reference_loss_db) || !std::isfinite(noise_dbm_per_mhz)) {
    throw std::invalid_argument("reference loss and noise must be finite");
  }
  if (!(model_size_bits > 0.0)) {
    throw std::invalid_argument("model size must be > 0 bits");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  }
}

std::vector<double> sample_positions(int num_devices, double radius_m,
                                     RngStream& rng) {
  std::vector<double> out(static_cast<std::size_t>(std::max(num_devices, 0)));
  for (double& d : out) {
    d = std::max(kMinDistanceM, radius_m * std::sqrt(rng.uniform_open_low()));
  }
  return out;
}

double path_gain(double distance_m, double pathloss_exponent,
                 double reference_loss_db) {
  if (!(distance_m >= kMinDistanceM)) {
    throw std::domain_error("path_gain: distance below minimum (" +
                            std::to_string(distance_m) + " m)");
  }
  return std::pow(10.0, -reference_loss_db / 10.0) *
         std::pow(distance_m, -pathloss_exponent);
}

double snr(double tx_power_dbm_per_mhz, double path_gain,
           double noise_dbm_per_mhz) {
  return std::pow(10.0, (tx_power_dbm_per_mhz - noise_dbm_per_mhz) / 10.0) *
         path_gain;
}

double spectral_efficiency(double snr_linear) {
  return std::log2(1.0 + snr_linear);
}

LinkState make_link(const CellConfig& cell, double tx_power_dbm_per_mhz,
                    double distance_m, double fading_gain) {
  LinkState link;
  link.distance_m = distance_m;
  link.path_gain =
      fading_gain * path_gain(distance_m, cell.pathloss_exponent,
                              cell.reference_loss_db);
  link.snr_linear =
      snr(tx_power_dbm_per_mhz, link.path_gain, cell.noise_dbm_per_mhz);
  link.spectral_efficiency = spectral_efficiency(link.snr_linear);
  return link;
}

ChannelState observe_channel(const CellConfig& cell,
                             std::span<const DeviceProfile> profiles,
                             RngStream& placement_rng,
                             RngStream& fading_rng) {
  const auto distances = sample_positions(static_cast<int>(profiles.size()),
                                          cell.radius_m, placement_rng);
  ChannelState state;
  state.reserve(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const double g = cell.rayleigh_fading ? fading_rng.exponential(1.0) : 1.0;
    state.push_back(
        make_link(cell, profiles[i].tx_power_dbm_per_mhz, distances[i], g));
  }
  return state;
}

double link_capacity_bps(const CellConfig& cell, const LinkState& link) {
  return cell.bandwidth_hz * link.spectral_efficiency;
}

double comp_latency_from_uniform(const DeviceProfile& profile, double u) {
  const double d = static_cast<double>(profile.data_size);
  return profile.shift_s_per_sample * d -
         (d / profile.max_rate_per_s) * std::log1p(-u);
}

double sample_comp_latency(const DeviceProfile& profile, RngStream& rng) {
  return comp_latency_from_uniform(profile, rng.uniform());
}

double expected_comp_latency(const DeviceProfile& profile) {
  const double d = static_cast<double>(profile.data_size);
  return profile.shift_s_per_sample * d + d / profile.max_rate_per_s;
}

double expected_upload_time(const CellConfig& cell,
                            double tx_power_dbm_per_mhz) {
  if (cell.rayleigh_fading) {
    // E{1 / log2(1 + s g)} diverges for g ~ Exp(1).
    throw std::domain_error(
        "expected_upload_time is unbounded under Rayleigh fading");
  }
  auto upload = [&](double u) {
    const double d = std::max(kMinDistanceM, cell.radius_m * std::sqrt(u));
    const LinkState link = make_link(cell, tx_power_dbm_per_mhz, d);
    return cell.model_size_bits / link_capacity_bps(cell, link);
  };
  constexpr int kIntervals = 1 << 14;
  const double h = 1.0 / kIntervals;
  double acc = upload(0.0) + upload(1.0);
  for (int j = 1; j < kIntervals; ++j) {
    acc += (j % 2 == 1 ? 4.0 : 2.0) * upload(j * h);
  }
  return acc * h / 3.0;
}

}  // namespace fedsched
