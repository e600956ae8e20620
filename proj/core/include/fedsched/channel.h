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

// Wireless cell model: device placement, path gain, SNR, spectral efficiency
// and the shifted-exponential local computation latency.
//
// All quantities here are SI (seconds, hertz, bits, linear ratios) except the
// two power spectral densities, which stay in dBm/MHz so their ratio is exact.

#ifndef FEDSCHED_CHANNEL_H_
#define FEDSCHED_CHANNEL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "fedsched/rng.h"

namespace fedsched {

using DeviceId = int;

// Placement floor that keeps the path gain finite at the cell center.
inline constexpr double kMinDistanceM = 1.0;

struct DeviceProfile {
  DeviceId id = 0;
  std::int64_t data_size = 1;            // samples, D_i
  double shift_s_per_sample = 0.0;       // a_i
  double max_rate_per_s = 1.0;           // mu_i, samples per second
  double tx_power_dbm_per_mhz = 0.0;     // p_i

  void validate() const;
};

struct CellConfig {
  double radius_m = 1000.0;
  double bandwidth_hz = 3.0e6;
  double pathloss_exponent = 3.76;
  // Loss at the 1 m reference distance. 15.3 dB with alpha = 3.76 is the
  // urban-macro form 128.1 + 37.6 log10(d / km).
  double reference_loss_db = 15.3;
  double noise_dbm_per_mhz = -114.0;
  double model_size_bits = 0.0;
  double epsilon = 1e-3;
  bool rayleigh_fading = false;

  void validate() const;
};

struct LinkState {
  double distance_m = 0.0;
  double path_gain = 0.0;
  double snr_linear = 0.0;
  double spectral_efficiency = 0.0;  // bits/s/Hz
};

// One entry per device, indexed like the profile list.
using ChannelState = std::vector<LinkState>;

// Area-uniform radii d = R sqrt(u), u on (0, 1], clamped below at
// kMinDistanceM.
std::vector<double> sample_positions(int num_devices, double radius_m,
                                     RngStream& rng);

// h^2 = 10^(-reference_loss_db / 10) * d^(-alpha). Throws std::domain_error
// below kMinDistanceM.
double path_gain(double distance_m, double pathloss_exponent,
                 double reference_loss_db = 0.0);

double snr(double tx_power_dbm_per_mhz, double path_gain,
           double noise_dbm_per_mhz);

double spectral_efficiency(double snr_linear);

LinkState make_link(const CellConfig& cell, double tx_power_dbm_per_mhz,
                    double distance_m, double fading_gain = 1.0);

// Places every device and evaluates its link. Rayleigh fading, when enabled
// in the cell config, draws g ~ Exp(1) per device from `fading_rng`.
ChannelState observe_channel(const CellConfig& cell,
                             std::span<const DeviceProfile> profiles,
                             RngStream& placement_rng, RngStream& fading_rng);

// Full-band uplink capacity B log2(1 + SNR) in bits/s.
double link_capacity_bps(const CellConfig& cell, const LinkState& link);

// Inverse CDF of the shifted exponential: a D - (D / mu) ln(1 - u).
double comp_latency_from_uniform(const DeviceProfile& profile, double u);

double sample_comp_latency(const DeviceProfile& profile, RngStream& rng);

// a D + D / mu.
double expected_comp_latency(const DeviceProfile& profile);

// E{ S / (B log2(1 + p h^2 / N0)) } over an area-uniform position in the cell,
// by Simpson quadrature in u = (d / R)^2. Only defined without fading.
double expected_upload_time(const CellConfig& cell,
                            double tx_power_dbm_per_mhz);

}  // namespace fedsched

#endif  // FEDSCHED_CHANNEL_H_
