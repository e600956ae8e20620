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

#include <fstream>
#include <iterator>
#include <sstream>

#include "fedsched/learner.h"

namespace fedsched {
namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes,
                        std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) |
         (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) |
         std::uint32_t{bytes[offset + 3]};
}

std::string hex(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IdxError(IdxErrorKind::kIo, "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_header(std::span<const std::uint8_t> bytes, std::size_t header,
                  std::uint32_t magic, const char* what) {
  if (bytes.size() < 4) {
    throw IdxError(IdxErrorKind::kTruncated,
                   std::string(what) + ": file shorter than the magic number");
  }
  const std::uint32_t got = read_be32(bytes, 0);
  if (got != magic) {
    throw IdxError(IdxErrorKind::kBadMagic, std::string(what) +
                                                ": bad magic " + hex(got) +
                                                ", expected " + hex(magic));
  }
  if (bytes.size() < header) {
    throw IdxError(IdxErrorKind::kTruncated,
                   std::string(what) + ": truncated header");
  }
}

}  // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = 16;
  check_header(bytes, kHeader, kIdxImagesMagic, "idx images");
  IdxImages img;
  img.count = read_be32(bytes, 4);
  img.rows = read_be32(bytes, 8);
  img.cols = read_be32(bytes, 12);
  const std::size_t payload =
      std::size_t{img.count} * img.rows * img.cols;
  if (bytes.size() - kHeader < payload) {
    throw IdxError(IdxErrorKind::kTruncated,
                   "idx images: payload has " +
                       std::to_string(bytes.size() - kHeader) +
                       " bytes, header promises " + std::to_string(payload));
  }
  img.pixels.assign(bytes.begin() + kHeader, bytes.begin() + kHeader + payload);
  return img;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = 8;
  check_header(bytes, kHeader, kIdxLabelsMagic, "idx labels");
  const std::size_t count = read_be32(bytes, 4);
  if (bytes.size() - kHeader < count) {
    throw IdxError(IdxErrorKind::kTruncated,
                   "idx labels: payload has " +
                       std::to_string(bytes.size() - kHeader) +
                       " bytes, header promises " + std::to_string(count));
  }
  return {bytes.begin() + kHeader, bytes.begin() + kHeader + count};
}

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path) {
  const auto image_bytes = read_file(images_path);
  const auto label_bytes = read_file(labels_path);
  const IdxImages img = parse_idx_images(image_bytes);
  auto labels = parse_idx_labels(label_bytes);

  if (img.rows * img.cols != static_cast<std::uint32_t>(kInputDim)) {
    throw IdxError(IdxErrorKind::kBadShape,
                   "idx images: expected 28x28 images, got " +
                       std::to_string(img.rows) + "x" + std::to_string(img.cols));
  }
  if (labels.size() != img.count) {
    throw IdxError(IdxErrorKind::kCountMismatch,
                   "idx: " + std::to_string(img.count) + " images but " +
                       std::to_string(labels.size()) + " labels");
  }
  for (auto y : labels) {
    if (y >= kNumClasses) {
      throw IdxError(IdxErrorKind::kBadShape,
                     "idx labels: label " + std::to_string(y) + " out of range");
    }
  }

  Dataset ds;
  ds.inputs.resize(img.count, kInputDim);
  float* out = ds.inputs.data();
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    out[i] = static_cast<float>(img.pixels[i]) / 255.0f;
  }
  ds.labels = std::move(labels);
  return ds;
}

MnistFiles load_mnist(const std::filesystem::path& dir) {
  return {load_idx(dir / "train-images-idx3-ubyte",
                   dir / "train-labels-idx1-ubyte"),
          load_idx(dir / "t10k-images-idx3-ubyte",
                   dir / "t10k-labels-idx1-ubyte")};
}

}  // namespace fedsched
