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

#include "fedsched/learner.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

namespace fedsched {
namespace {

using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr std::size_t kW1Size = std::size_t{kInputDim} * kHiddenUnits;
constexpr std::size_t kB1Offset = kW1Size;
constexpr std::size_t kW2Offset = kB1Offset + kHiddenUnits;
constexpr std::size_t kB2Offset = kW2Offset + std::size_t{kHiddenUnits} * kNumClasses;

// Scratch buffers reused across mini-batches.
struct Workspace {
  RowMatrixXd x;
  Eigen::MatrixXd z1, h, z2, dz2, dz1;
  std::vector<std::uint8_t> y;

  void gather(const Dataset& ds, std::span<const std::size_t> rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    x.resize(n, kInputDim);
    y.resize(rows.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      x.row(i) = ds.inputs.row(static_cast<Eigen::Index>(rows[i])).cast<double>();
      y[i] = ds.labels[rows[i]];
    }
  }
};

void shuffle(std::vector<std::size_t>& v, RngStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.uniform_index(i)]);
  }
}

// Logits for ws.x into ws.z2 (hidden activations kept in ws.z1 / ws.h).
void forward(const ModelParams& params, Workspace& ws) {
  ws.z1.noalias() = ws.x * params.w1();
  ws.z1.rowwise() += params.b1().transpose();
  ws.h = ws.z1.cwiseMax(0.0);
  ws.z2.noalias() = ws.h * params.w2();
  ws.z2.rowwise() += params.b2().transpose();
}

// Replaces each row of `z` by its softmax and returns the summed
// cross-entropy against `y`.
double softmax_cross_entropy(Eigen::MatrixXd& z,
                             std::span<const std::uint8_t> y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < z.cols(); ++c) sum += std::exp(z(i, c) - m);
    const double lse = m + std::log(sum);
    total += lse - z(i, y[i]);
    for (Eigen::Index c = 0; c < z.cols(); ++c) z(i, c) = std::exp(z(i, c) - lse);
  }
  return total;
}

// Mean loss over ws.x; writes the gradient into `g` (length kParamCount).
double forward_backward(const ModelParams& params, Workspace& ws, double* g) {
  forward(params, ws);
  const auto n = ws.x.rows();
  ws.dz2 = ws.z2;
  const double loss = softmax_cross_entropy(ws.dz2, ws.y) / n;
  if (!std::isfinite(loss)) {
    throw DivergenceError("non-finite loss during training");
  }
  for (Eigen::Index i = 0; i < n; ++i) ws.dz2(i, ws.y[i]) -= 1.0;
  ws.dz2 /= static_cast<double>(n);

  Eigen::Map<Eigen::MatrixXd> g_w1(g, kInputDim, kHiddenUnits);
  Eigen::Map<Eigen::VectorXd> g_b1(g + kB1Offset, kHiddenUnits);
  Eigen::Map<Eigen::MatrixXd> g_w2(g + kW2Offset, kHiddenUnits, kNumClasses);
  Eigen::Map<Eigen::VectorXd> g_b2(g + kB2Offset, kNumClasses);

  g_w2.noalias() = ws.h.transpose() * ws.dz2;
  g_b2 = ws.dz2.colwise().sum().transpose();
  ws.dz1.noalias() = ws.dz2 * params.w2().transpose();
  ws.dz1 = (ws.z1.array() > 0.0).select(ws.dz1, 0.0);
  g_w1.noalias() = ws.x.transpose() * ws.dz1;
  g_b1 = ws.dz1.colwise().sum().transpose();
  return loss;
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.inputs.row(static_cast<Eigen::Index>(i)) =
        inputs.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(labels.at(rows[i]));
  }
  return out;
}

void Dataset::validate() const {
  if (static_cast<std::size_t>(inputs.rows()) != labels.size()) {
    throw std::invalid_argument("dataset: row count differs from label count");
  }
  if (inputs.cols() != kInputDim) {
    throw std::invalid_argument("dataset: expected 784 features per row");
  }
  if (inputs.size() > 0 && (inputs.minCoeff() < 0.0f || inputs.maxCoeff() > 1.0f)) {
    throw std::invalid_argument("dataset: features must lie in [0, 1]");
  }
  for (auto y : labels) {
    if (y >= kNumClasses) throw std::invalid_argument("dataset: label out of range");
  }
}

Dataset make_synthetic(const SyntheticSpec& spec, RngStream& rng) {
  if (spec.num_classes < 1 || spec.num_classes > kNumClasses) {
    throw std::invalid_argument("make_synthetic: num_classes must be in [1, 10]");
  }
  Eigen::MatrixXd centers(spec.num_classes, kInputDim);
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    for (Eigen::Index j = 0; j < kInputDim; ++j) {
      centers(c, j) = 0.25 + 0.5 * rng.uniform();
    }
  }
  Dataset ds;
  ds.inputs.resize(static_cast<Eigen::Index>(spec.num_samples), kInputDim);
  ds.labels.resize(spec.num_samples);
  for (std::size_t i = 0; i < spec.num_samples; ++i) {
    const auto c = static_cast<int>(rng.uniform_index(spec.num_classes));
    ds.labels[i] = static_cast<std::uint8_t>(c);
    for (Eigen::Index j = 0; j < kInputDim; ++j) {
      const double v = centers(c, j) + spec.noise_std * rng.normal();
      ds.inputs(static_cast<Eigen::Index>(i), j) =
          static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return ds;
}

void PartitionSpec::validate() const {
  if (per_device_size < 1) {
    throw std::invalid_argument("partition: per_device_size must be >= 1");
  }
  if (mode == Mode::kNonIid &&
      (classes_per_device < 1 || classes_per_device > kNumClasses)) {
    throw std::invalid_argument("partition: classes per device must be in [1, 10]");
  }
}

std::vector<std::vector<std::size_t>> partition_indices(
    std::span<const std::uint8_t> labels, int num_devices,
    const PartitionSpec& spec, RngStream& rng) {
  spec.validate();
  if (num_devices < 1) throw std::invalid_argument("partition: no devices");
  const auto m = static_cast<std::size_t>(num_devices);
  std::vector<std::vector<std::size_t>> out(m);

  if (spec.mode == PartitionSpec::Mode::kIid) {
    if (m * spec.per_device_size > labels.size()) {
      throw PartitionError("partition: " + std::to_string(m) + " x " +
                           std::to_string(spec.per_device_size) +
                           " samples requested, only " +
                           std::to_string(labels.size()) + " available");
    }
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    shuffle(all, rng);
    for (std::size_t d = 0; d < m; ++d) {
      const auto first = all.begin() + static_cast<std::ptrdiff_t>(d * spec.per_device_size);
      out[d].assign(first, first + static_cast<std::ptrdiff_t>(spec.per_device_size));
    }
    return out;
  }

  std::array<std::vector<std::size_t>, kNumClasses> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  std::array<std::vector<std::size_t>, kNumClasses> pools = members;
  for (auto& p : pools) shuffle(p, rng);
  std::array<std::size_t, kNumClasses> cursor{};

  std::vector<bool> held(labels.size(), false);
  for (std::size_t d = 0; d < m; ++d) {
    std::array<int, kNumClasses> classes;
    std::iota(classes.begin(), classes.end(), 0);
    for (int i = 0; i < spec.classes_per_device; ++i) {
      const auto j = i + rng.uniform_index(kNumClasses - i);
      std::swap(classes[i], classes[j]);
    }
    double mass = 0.0;
    for (int i = 0; i < spec.classes_per_device; ++i) {
      mass += static_cast<double>(members[classes[i]].size());
    }
    if (mass == 0.0) {
      throw PartitionError("partition: device " + std::to_string(d) +
                           " was assigned only empty classes");
    }

    auto& mine = out[d];
    mine.reserve(spec.per_device_size);
    for (std::size_t n = 0; n < spec.per_device_size; ++n) {
      // Class chosen in proportion to its size, i.e. a uniform draw from the
      // union of the device's classes.
      double r = rng.uniform() * mass;
      int c = classes[spec.classes_per_device - 1];
      for (int i = 0; i < spec.classes_per_device; ++i) {
        r -= static_cast<double>(members[classes[i]].size());
        if (r < 0.0) {
          c = classes[i];
          break;
        }
      }
      auto& pool = pools[c];
      auto& cur = cursor[c];
      while (cur < pool.size() && held[pool[cur]]) ++cur;
      if (cur == pool.size()) {
        if (!spec.allow_reuse) {
          throw PartitionError("partition: class " + std::to_string(c) +
                               " exhausted; demand exceeds the " +
                               std::to_string(members[c].size()) +
                               " available samples");
        }
        pool = members[c];
        std::erase_if(pool, [&](std::size_t idx) { return held[idx]; });
        if (pool.empty()) {
          throw PartitionError("partition: device " + std::to_string(d) +
                               " already holds every sample of class " +
                               std::to_string(c));
        }
        shuffle(pool, rng);
        cur = 0;
      }
      const std::size_t idx = pool[cur++];
      held[idx] = true;
      mine.push_back(idx);
    }
    // Only the current device's samples are marked; samples of earlier
    // devices are excluded by the pool cursors.
    for (std::size_t idx : mine) held[idx] = false;
  }
  return out;
}

std::vector<Dataset> partition(const Dataset& ds, int num_devices,
                               const PartitionSpec& spec, RngStream& rng) {
  const auto idx = partition_indices(ds.labels, num_devices, spec, rng);
  std::vector<Dataset> out;
  out.reserve(idx.size());
  for (const auto& rows : idx) out.push_back(ds.subset(rows));
  return out;
}

ModelParams init_model(RngStream& rng) {
  ModelParams p;
  p.values.setZero();
  const double lim1 = std::sqrt(6.0 / (kInputDim + kHiddenUnits));
  const double lim2 = std::sqrt(6.0 / (kHiddenUnits + kNumClasses));
  for (std::size_t i = 0; i < kW1Size; ++i) {
    p.values[static_cast<Eigen::Index>(i)] = (2.0 * rng.uniform() - 1.0) * lim1;
  }
  for (std::size_t i = kW2Offset; i < kB2Offset; ++i) {
    p.values[static_cast<Eigen::Index>(i)] = (2.0 * rng.uniform() - 1.0) * lim2;
  }
  return p;
}

LossGradient grad(const ModelParams& params, const Dataset& ds,
                  std::span<const std::size_t> rows) {
  if (rows.empty()) throw std::invalid_argument("grad: empty batch");
  Workspace ws;
  ws.gather(ds, rows);
  LossGradient out;
  out.gradient.resize(kParamCount);
  out.loss = forward_backward(params, ws, out.gradient.data());
  return out;
}

LossGradient grad(const ModelParams& params, const Dataset& ds) {
  std::vector<std::size_t> rows(ds.size());
  std::iota(rows.begin(), rows.end(), 0);
  return grad(params, ds, rows);
}

ModelParams local_update(const ModelParams& params, const Dataset& local,
                         double lr, std::size_t batch_size, int epochs,
                         RngStream& rng, LocalUpdateStats* stats) {
  if (local.empty()) throw std::invalid_argument("local_update: empty dataset");
  if (batch_size < 1) throw std::invalid_argument("local_update: batch size 0");
  ModelParams w = params;
  Workspace ws;
  Eigen::VectorXd g(kParamCount);
  std::vector<std::size_t> order(local.size());
  std::iota(order.begin(), order.end(), 0);

  std::size_t steps = 0;
  double loss_sum = 0.0;
  for (int e = 0; e < epochs; ++e) {
    shuffle(order, rng);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t len = std::min(batch_size, order.size() - start);
      ws.gather(local, std::span(order).subspan(start, len));
      loss_sum += forward_backward(w, ws, g.data());
      w.values -= lr * g;
      ++steps;
    }
  }
  if (stats != nullptr) {
    stats->steps = steps;
    stats->mean_loss = steps > 0 ? loss_sum / static_cast<double>(steps) : 0.0;
  }
  return w;
}

ModelParams aggregate(std::span<const ModelParams> models) {
  if (models.empty()) throw std::invalid_argument("aggregate: no models");
  for (const auto& m : models) {
    if (m.size() != models.front().size()) {
      throw std::invalid_argument("aggregate: model shape mismatch");
    }
  }
  // Each coordinate is summed in sorted order so the result does not depend
  // on upload order.
  ModelParams out;
  out.values.resize(models.front().values.size());
  const double k = static_cast<double>(models.size());
  std::vector<double> column(models.size());
  for (Eigen::Index i = 0; i < out.values.size(); ++i) {
    for (std::size_t j = 0; j < models.size(); ++j) column[j] = models[j].values[i];
    std::sort(column.begin(), column.end());
    double s = 0.0;
    for (double v : column) s += v;
    out.values[i] = s / k;
  }
  return out;
}

Evaluation evaluate(const ModelParams& params, const Dataset& test) {
  if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
  constexpr std::size_t kChunk = 1000;
  Workspace ws;
  std::vector<std::size_t> rows;
  std::size_t correct = 0;
  double loss = 0.0;
  for (std::size_t start = 0; start < test.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, test.size() - start);
    rows.resize(len);
    std::iota(rows.begin(), rows.end(), start);
    ws.gather(test, rows);
    forward(params, ws);
    for (Eigen::Index i = 0; i < ws.z2.rows(); ++i) {
      int best = 0;
      for (int c = 1; c < kNumClasses; ++c) {
        if (ws.z2(i, c) > ws.z2(i, best)) best = c;
      }
      if (best == ws.y[i]) ++correct;
    }
    loss += softmax_cross_entropy(ws.z2, ws.y);
  }
  const double n = static_cast<double>(test.size());
  return {static_cast<double>(correct) / n, loss / n};
}

double model_size_bits(const ModelParams& params) {
  return static_cast<double>(kBitsPerParam) * static_cast<double>(params.size());
}

}  // namespace fedsched
