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

// The federated learning workload: datasets, partitioning across devices, a
// 784-64-10 ReLU MLP trained with softmax cross-entropy, local mini-batch SGD
// and unweighted model averaging.

#ifndef FEDSCHED_LEARNER_H_
#define FEDSCHED_LEARNER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "fedsched/rng.h"

namespace fedsched {

inline constexpr int kInputDim = 784;
inline constexpr int kHiddenUnits = 64;
inline constexpr int kNumClasses = 10;
inline constexpr int kParamCount = kInputDim * kHiddenUnits + kHiddenUnits +
                                   kHiddenUnits * kNumClasses + kNumClasses;
inline constexpr int kBitsPerParam = 32;

using FeatureMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Rows are flattened 28x28 images scaled to [0, 1].
struct Dataset {
  FeatureMatrix inputs;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }

  Dataset subset(std::span<const std::size_t> rows) const;
  void validate() const;
};

// ---- IDX files ----

enum class IdxErrorKind { kIo, kBadMagic, kTruncated, kCountMismatch, kBadShape };

class IdxError : public std::runtime_error {
 public:
  IdxError(IdxErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  IdxErrorKind kind() const { return kind_; }

 private:
  IdxErrorKind kind_;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// Big-endian IDX parsers; images are returned as raw bytes, row-major.
struct IdxImages {
  std::uint32_t count = 0, rows = 0, cols = 0;
  std::vector<std::uint8_t> pixels;
};
IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path);

struct MnistFiles {
  Dataset train;
  Dataset test;
};
// Expects the four canonical file names in `dir`.
MnistFiles load_mnist(const std::filesystem::path& dir);

// ---- Synthetic data ----

struct SyntheticSpec {
  std::size_t num_samples = 1000;
  int num_classes = kNumClasses;
  double noise_std = 0.1;
};

// Gaussian blobs around per-class centers drawn in [0.25, 0.75]^784, clipped
// to [0, 1].
Dataset make_synthetic(const SyntheticSpec& spec, RngStream& rng);

// ---- Partitioning ----

struct PartitionSpec {
  enum class Mode { kIid, kNonIid };
  Mode mode = Mode::kIid;
  int classes_per_device = kNumClasses;  // L, non-iid only
  std::size_t per_device_size = 3000;
  // Non-iid only: when a class pool runs dry, recycle that class (never
  // duplicating a sample within one device) instead of failing.
  bool allow_reuse = false;

  void validate() const;
};

class PartitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Row indices of each device's local set.
std::vector<std::vector<std::size_t>> partition_indices(
    std::span<const std::uint8_t> labels, int num_devices,
    const PartitionSpec& spec, RngStream& rng);

std::vector<Dataset> partition(const Dataset& ds, int num_devices,
                               const PartitionSpec& spec, RngStream& rng);

// ---- Model ----

// Flat layout: W1 (784x64, column-major), b1 (64), W2 (64x10, column-major),
// b2 (10).
struct ModelParams {
  Eigen::VectorXd values = Eigen::VectorXd::Zero(kParamCount);

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }

  Eigen::Map<const Eigen::MatrixXd> w1() const {
    return {values.data(), kInputDim, kHiddenUnits};
  }
  Eigen::Map<const Eigen::VectorXd> b1() const {
    return {values.data() + kInputDim * kHiddenUnits, kHiddenUnits};
  }
  Eigen::Map<const Eigen::MatrixXd> w2() const {
    return {values.data() + kInputDim * kHiddenUnits + kHiddenUnits,
            kHiddenUnits, kNumClasses};
  }
  Eigen::Map<const Eigen::VectorXd> b2() const {
    return {values.data() + kParamCount - kNumClasses, kNumClasses};
  }
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Glorot-uniform weights, zero biases.
ModelParams init_model(RngStream& rng);

struct LossGradient {
  Eigen::VectorXd gradient;
  double loss = 0.0;  // mean cross-entropy
};

// Exact backprop gradient of the mean cross-entropy over `rows` of `ds`.
LossGradient grad(const ModelParams& params, const Dataset& ds,
                  std::span<const std::size_t> rows);
LossGradient grad(const ModelParams& params, const Dataset& ds);

struct LocalUpdateStats {
  std::size_t steps = 0;
  double mean_loss = 0.0;
};

// Sequential mini-batch SGD, reshuffling every epoch from `rng`. The trailing
// partial batch, if any, is used as a smaller step.
ModelParams local_update(const ModelParams& params, const Dataset& local,
                         double lr, std::size_t batch_size, int epochs,
                         RngStream& rng, LocalUpdateStats* stats = nullptr);

// Unweighted mean of the uploaded models.
ModelParams aggregate(std::span<const ModelParams> models);

struct Evaluation {
  double accuracy = 0.0;
  double loss = 0.0;
};

// Argmax accuracy (ties go to the lowest class) and mean cross-entropy.
Evaluation evaluate(const ModelParams& params, const Dataset& test);

double model_size_bits(const ModelParams& params);

}  // namespace fedsched

#endif  // FEDSCHED_LEARNER_H_
