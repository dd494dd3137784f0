/*
 * Copyright 2026 The zonotrain Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ZONOTRAIN_DATA_HPP
#define ZONOTRAIN_DATA_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "zonotrain/error.hpp"
#include "zonotrain/net.hpp"
#include "zonotrain/zonoset.hpp"

namespace zonotrain {

/// Labelled inputs in [0, 1]^n; labels are 0-based class indices.
struct Dataset {
  std::vector<Vector> inputs;
  std::vector<Index> labels;
  Index num_classes = 0;

  [[nodiscard]] std::size_t size() const { return inputs.size(); }
  [[nodiscard]] bool empty() const { return inputs.empty(); }
  [[nodiscard]] Index input_dim() const { return inputs.empty() ? 0 : inputs.front().size(); }
  [[nodiscard]] Vector target(std::size_t i) const { return one_hot(labels.at(i), num_classes); }

  void validate() const {
    if (inputs.size() != labels.size()) throw FormatError("dataset: input/label count mismatch");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (inputs[i].size() != input_dim()) throw FormatError("dataset: ragged inputs");
      if (labels[i] < 0 || labels[i] >= num_classes) {
        throw FormatError("dataset: label " + std::to_string(labels[i]) + " out of range");
      }
    }
  }

  /// First `n` samples (all if n is 0 or too large).
  [[nodiscard]] Dataset head(std::size_t n) const {
    if (n == 0 || n >= size()) return *this;
    Dataset out;
    out.num_classes = num_classes;
    out.inputs.assign(inputs.begin(), inputs.begin() + static_cast<std::ptrdiff_t>(n));
    out.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
  }
};

// ---------------------------------------------------------------------------
// IDX (big-endian): u32 magic, u32 count, [u32 rows, u32 cols], u8 payload.

inline constexpr std::uint32_t kIdxImageMagic = 2051;
inline constexpr std::uint32_t kIdxLabelMagic = 2049;

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(const std::string& bytes, std::size_t offset, const std::string& path) {
  if (bytes.size() < offset + 4) throw FormatError("'" + path + "': truncated header");
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<std::uint8_t>(bytes[offset + i]);
  return v;
}

} // namespace detail

inline Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path,
                              Index num_classes = 10) {
  const std::string images = detail::read_file(images_path);
  const std::string labels = detail::read_file(labels_path);

  const auto image_magic = detail::read_be32(images, 0, images_path);
  if (image_magic != kIdxImageMagic) {
    throw FormatError("'" + images_path + "': wrong magic " + std::to_string(image_magic) +
                      " (expected " + std::to_string(kIdxImageMagic) + ")");
  }
  const auto label_magic = detail::read_be32(labels, 0, labels_path);
  if (label_magic != kIdxLabelMagic) {
    throw FormatError("'" + labels_path + "': wrong magic " + std::to_string(label_magic) +
                      " (expected " + std::to_string(kIdxLabelMagic) + ")");
  }
  const std::size_t count = detail::read_be32(images, 4, images_path);
  const std::size_t rows = detail::read_be32(images, 8, images_path);
  const std::size_t cols = detail::read_be32(images, 12, images_path);
  const std::size_t label_count = detail::read_be32(labels, 4, labels_path);
  if (count != label_count) {
    throw FormatError("IDX count mismatch: " + std::to_string(count) + " images but " +
                      std::to_string(label_count) + " labels");
  }
  const std::size_t pixels = rows * cols;
  if (images.size() < 16 + count * pixels) {
    throw FormatError("'" + images_path + "': truncated payload (" + std::to_string(images.size()) +
                      " bytes, need " + std::to_string(16 + count * pixels) + ")");
  }
  if (labels.size() < 8 + count) throw FormatError("'" + labels_path + "': truncated payload");

  Dataset out;
  out.num_classes = num_classes;
  out.inputs.reserve(count);
  out.labels.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    Vector x(static_cast<Index>(pixels));
    const std::size_t base = 16 + s * pixels;
    for (std::size_t p = 0; p < pixels; ++p) {
      x(static_cast<Index>(p)) = static_cast<std::uint8_t>(images[base + p]) / 255.0;
    }
    out.inputs.push_back(std::move(x));
    out.labels.push_back(static_cast<std::uint8_t>(labels[8 + s]));
  }
  out.validate();
  return out;
}

/// Writes IDX image and label files; pixels are rounded from [0, 1] to bytes.
inline void write_idx(const Dataset& data, Index rows, Index cols, const std::string& images_path,
                      const std::string& labels_path) {
  auto be32 = [](std::string& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  };
  std::string images;
  be32(images, kIdxImageMagic);
  be32(images, static_cast<std::uint32_t>(data.size()));
  be32(images, static_cast<std::uint32_t>(rows));
  be32(images, static_cast<std::uint32_t>(cols));
  std::string labels;
  be32(labels, kIdxLabelMagic);
  be32(labels, static_cast<std::uint32_t>(data.size()));
  for (std::size_t s = 0; s < data.size(); ++s) {
    for (Index p = 0; p < data.inputs[s].size(); ++p) {
      const double v = std::clamp(data.inputs[s](p), 0.0, 1.0);
      images.push_back(static_cast<char>(static_cast<std::uint8_t>(std::lround(v * 255.0))));
    }
    labels.push_back(static_cast<char>(static_cast<std::uint8_t>(data.labels[s])));
  }
  std::ofstream(images_path, std::ios::binary).write(images.data(), static_cast<std::streamsize>(images.size()));
  std::ofstream(labels_path, std::ios::binary).write(labels.data(), static_cast<std::streamsize>(labels.size()));
}

/// The 20-point binary classification benchmark in [0, 1]^2.
inline Dataset synthetic_2d() {
  struct Row {
    double x0, x1;
    Index label;
  };
  // label 1 <=> target (0, 1)
  static constexpr std::array<Row, 20> kRows{{
      {0.0622, 0.6995, 1}, {0.6534, 0.9409, 1}, {0.4759, 0.7163, 0}, {0.8812, 0.1020, 0},
      {0.5047, 0.4685, 0}, {0.1470, 0.3275, 0}, {0.3439, 0.1395, 1}, {0.9098, 0.5422, 1},
      {0.8588, 0.8696, 1}, {0.0545, 0.0825, 0}, {0.6889, 0.4771, 0}, {0.9329, 0.2857, 1},
      {0.6781, 0.3043, 1}, {0.4641, 0.3302, 1}, {0.4575, 0.9487, 1}, {0.1272, 0.4699, 0},
      {0.6506, 0.7315, 1}, {0.5207, 0.1229, 0}, {0.3271, 0.4574, 0}, {0.6858, 0.0616, 0},
  }};
  Dataset out;
  out.num_classes = 2;
  for (const auto& r : kRows) {
    Vector x(2);
    x << r.x0, r.x1;
    out.inputs.push_back(std::move(x));
    out.labels.push_back(r.label);
  }
  return out;
}

/// Conventional MNIST pixel statistics.
inline constexpr double kMnistMean = 0.1307;
inline constexpr double kMnistStd = 0.3081;

/// Pre-composes the first linear layer with x -> (x - mean) / std, so sets
/// can be built in raw input space.
inline Network normalize_into_network(const Vector& mean, const Vector& stddev, const Network& net) {
  const auto* first = std::get_if<Linear>(&net.layer(0));
  if (first == nullptr) throw Error("normalize_into_network: first layer must be linear");
  detail::require_shape(mean.size() == first->in_dim() && stddev.size() == first->in_dim(),
                        "normalize_into_network: statistics length mismatch");
  Network out = net;
  auto& lin = std::get<Linear>(out.layer(0));
  lin.weights = first->weights * stddev.cwiseInverse().asDiagonal();
  lin.bias = first->bias - lin.weights * mean;
  return out;
}

inline Network normalize_into_network(double mean, double stddev, const Network& net) {
  const Index n = net.input_dim();
  return normalize_into_network(Vector::Constant(n, mean), Vector::Constant(n, stddev), net);
}

/// Shuffled mini-batches; the permutation depends only on (seed, epoch) and
/// the last partial batch is kept.
inline std::vector<std::vector<std::size_t>> batches(std::size_t dataset_size,
                                                     std::size_t batch_size, std::uint64_t seed,
                                                     int epoch) {
  if (batch_size == 0) throw Error("batches: batch size must be positive");
  std::vector<std::size_t> order(dataset_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(epoch),
                    0x5eedu};
  std::mt19937_64 rng(seq);
  // Explicit Fisher-Yates: std::shuffle's draw pattern is library-specific.
  for (std::size_t i = dataset_size; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < dataset_size; start += batch_size) {
    const std::size_t end = std::min(dataset_size, start + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

} // namespace zonotrain

#endif
