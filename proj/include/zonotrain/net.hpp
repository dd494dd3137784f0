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

#ifndef ZONOTRAIN_NET_HPP
#define ZONOTRAIN_NET_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "zonotrain/error.hpp"
#include "zonotrain/zonoset.hpp"

namespace zonotrain {

enum class ActivationKind : std::uint8_t { Relu = 1, Tanh = 2, Sigmoid = 3 };

inline std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Relu: return "relu";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Sigmoid: return "sigmoid";
  }
  return "?";
}

inline ActivationKind parse_activation(std::string_view name) {
  if (name == "relu") return ActivationKind::Relu;
  if (name == "tanh") return ActivationKind::Tanh;
  if (name == "sigmoid") return ActivationKind::Sigmoid;
  throw FormatError("unknown activation '" + std::string(name) + "'");
}

namespace activation {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double value(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::Relu: return x > 0.0 ? x : 0.0;
    case ActivationKind::Tanh: return std::tanh(x);
    case ActivationKind::Sigmoid: return sigmoid(x);
  }
  return x;
}

/// Derivative; relu'(0) is taken as 0.
inline double derivative(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::Relu: return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

inline Vector apply(ActivationKind kind, const Vector& x) {
  return x.unaryExpr([kind](double v) { return value(kind, v); });
}

} // namespace activation

struct Linear {
  Matrix weights; // out x in
  Vector bias;    // out

  [[nodiscard]] Index in_dim() const { return weights.cols(); }
  [[nodiscard]] Index out_dim() const { return weights.rows(); }
};

struct Activation {
  ActivationKind kind = ActivationKind::Relu;
  Index width = 0;
};

using Layer = std::variant<Linear, Activation>;

inline Index layer_in_dim(const Layer& layer) {
  return std::visit(
      [](const auto& l) -> Index {
        if constexpr (std::is_same_v<std::decay_t<decltype(l)>, Linear>) {
          return l.in_dim();
        } else {
          return l.width;
        }
      },
      layer);
}

inline Index layer_out_dim(const Layer& layer) {
  return std::visit(
      [](const auto& l) -> Index {
        if constexpr (std::is_same_v<std::decay_t<decltype(l)>, Linear>) {
          return l.out_dim();
        } else {
          return l.width;
        }
      },
      layer);
}

/// Feed-forward network: an ordered chain of dense and activation layers.
class Network {
public:
  Network() = default;

  explicit Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw ShapeError("network: at least one layer required");
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      if (const auto* lin = std::get_if<Linear>(&layers_[k])) {
        detail::require_shape(lin->bias.size() == lin->out_dim(),
                              "network: layer " + std::to_string(k) + " bias length mismatch");
      }
      if (k > 0) {
        detail::require_shape(layer_in_dim(layers_[k]) == layer_out_dim(layers_[k - 1]),
                              "network: layer " + std::to_string(k) + " expects width " +
                                  std::to_string(layer_in_dim(layers_[k])) +
                                  " but previous layer produces " +
                                  std::to_string(layer_out_dim(layers_[k - 1])));
      }
    }
  }

  [[nodiscard]] std::size_t size() const { return layers_.size(); }
  [[nodiscard]] Index input_dim() const { return layer_in_dim(layers_.front()); }
  [[nodiscard]] Index output_dim() const { return layer_out_dim(layers_.back()); }
  [[nodiscard]] const std::vector<Layer>& layers() const { return layers_; }
  [[nodiscard]] const Layer& layer(std::size_t k) const { return layers_.at(k); }
  Layer& layer(std::size_t k) { return layers_.at(k); }

  [[nodiscard]] std::size_t num_parameters() const {
    std::size_t total = 0;
    for (const auto& l : layers_) {
      if (const auto* lin = std::get_if<Linear>(&l)) {
        total += static_cast<std::size_t>(lin->weights.size() + lin->bias.size());
      }
    }
    return total;
  }

  friend bool operator==(const Network& a, const Network& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const auto* la = std::get_if<Linear>(&a.layers_[k]);
      const auto* lb = std::get_if<Linear>(&b.layers_[k]);
      if ((la == nullptr) != (lb == nullptr)) return false;
      if (la != nullptr) {
        if (la->weights.rows() != lb->weights.rows() || la->weights.cols() != lb->weights.cols())
          return false;
        if (la->weights != lb->weights || la->bias != lb->bias) return false;
      } else {
        const auto& aa = std::get<Activation>(a.layers_[k]);
        const auto& ab = std::get<Activation>(b.layers_[k]);
        if (aa.kind != ab.kind || aa.width != ab.width) return false;
      }
    }
    return true;
  }

private:
  std::vector<Layer> layers_;
};

/// Per-layer parameter gradients; entries for activation layers stay empty.
struct ParamGrads {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static ParamGrads zeros_like(const Network& net) {
    ParamGrads g;
    g.weights.resize(net.size());
    g.biases.resize(net.size());
    for (std::size_t k = 0; k < net.size(); ++k) {
      if (const auto* lin = std::get_if<Linear>(&net.layer(k))) {
        g.weights[k] = Matrix::Zero(lin->weights.rows(), lin->weights.cols());
        g.biases[k] = Vector::Zero(lin->bias.size());
      }
    }
    return g;
  }

  ParamGrads& operator+=(const ParamGrads& other) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (weights[k].size() > 0) {
        weights[k] += other.weights[k];
        biases[k] += other.biases[k];
      }
    }
    return *this;
  }

  ParamGrads& operator*=(double s) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
      weights[k] *= s;
      biases[k] *= s;
    }
    return *this;
  }

  [[nodiscard]] double squared_norm() const {
    double total = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      total += weights[k].squaredNorm() + biases[k].squaredNorm();
    }
    return total;
  }
};

// ---------------------------------------------------------------------------
// Point forward / backward

struct PointForward {
  Vector output;
  std::vector<Vector> hidden; // h_0 .. h_K
};

inline PointForward point_forward(const Network& net, const Vector& x) {
  detail::require_shape(x.size() == net.input_dim(),
                        "point_forward: input has length " + std::to_string(x.size()) +
                            ", network expects " + std::to_string(net.input_dim()));
  PointForward out;
  out.hidden.reserve(net.size() + 1);
  out.hidden.push_back(x);
  for (const auto& layer : net.layers()) {
    const Vector& h = out.hidden.back();
    if (const auto* lin = std::get_if<Linear>(&layer)) {
      out.hidden.push_back(lin->weights * h + lin->bias);
    } else {
      out.hidden.push_back(activation::apply(std::get<Activation>(layer).kind, h));
    }
  }
  out.output = out.hidden.back();
  return out;
}

inline Vector predict(const Network& net, const Vector& x) { return point_forward(net, x).output; }

/// Numerically stable softmax via max-shifting.
inline Vector softmax(const Vector& y) {
  const Vector e = (y.array() - y.maxCoeff()).exp().matrix();
  return e / e.sum();
}

inline double log_sum_exp(const Vector& y) {
  const double m = y.maxCoeff();
  return m + std::log((y.array() - m).exp().sum());
}

inline Vector one_hot(Index label, Index classes) {
  Vector t = Vector::Zero(classes);
  t(label) = 1.0;
  return t;
}

/// -sum_i t_i ln softmax(y)_i
inline double cross_entropy(const Vector& target, const Vector& y) {
  detail::require_shape(target.size() == y.size(), "cross_entropy: length mismatch");
  const double lse = log_sum_exp(y);
  return -(target.array() * (y.array() - lse)).sum();
}

/// softmax(y) - t (for one-hot t).
inline Vector cross_entropy_grad(const Vector& target, const Vector& y) {
  detail::require_shape(target.size() == y.size(), "cross_entropy_grad: length mismatch");
  return softmax(y) * target.sum() - target;
}

struct PointBackward {
  std::vector<Vector> layer_grads; // g_0 .. g_K
  ParamGrads params;
};

inline PointBackward point_backward(const Network& net, const std::vector<Vector>& hidden,
                                    const Vector& output_grad) {
  if (hidden.size() != net.size() + 1) {
    throw ShapeError("point_backward: expected " + std::to_string(net.size() + 1) +
                     " hidden states, got " + std::to_string(hidden.size()));
  }
  detail::require_shape(output_grad.size() == net.output_dim(),
                        "point_backward: output gradient length mismatch");
  PointBackward out;
  out.layer_grads.resize(net.size() + 1);
  out.params.weights.resize(net.size());
  out.params.biases.resize(net.size());
  out.layer_grads[net.size()] = output_grad;
  for (std::size_t k = net.size(); k-- > 0;) {
    const Vector& g = out.layer_grads[k + 1];
    const Vector& h_prev = hidden[k];
    detail::require_shape(h_prev.size() == layer_in_dim(net.layer(k)),
                          "point_backward: hidden state " + std::to_string(k) + " has wrong size");
    if (const auto* lin = std::get_if<Linear>(&net.layer(k))) {
      out.params.weights[k] = g * h_prev.transpose();
      out.params.biases[k] = g;
      out.layer_grads[k] = lin->weights.transpose() * g;
    } else {
      const auto kind = std::get<Activation>(net.layer(k)).kind;
      out.layer_grads[k] =
          h_prev.unaryExpr([kind](double v) { return activation::derivative(kind, v); })
              .cwiseProduct(g);
    }
  }
  return out;
}

/// Gradient of the cross-entropy at x w.r.t. the input.
inline Vector input_gradient(const Network& net, const Vector& x, const Vector& target) {
  const auto fwd = point_forward(net, x);
  return point_backward(net, fwd.hidden, cross_entropy_grad(target, fwd.output)).layer_grads[0];
}

// ---------------------------------------------------------------------------
// Construction

/// Shape of a dense network: widths n_0 .. n_K and the hidden activation.
/// Every linear layer except the last one is followed by the activation.
struct NetworkShape {
  std::vector<Index> widths;
  ActivationKind activation = ActivationKind::Relu;
};

/// Weights ~ Normal(0, 2 / fan_in), biases zero; a pure function of the seed.
inline Network init_params(const NetworkShape& shape, std::uint64_t seed) {
  if (shape.widths.size() < 2) throw ShapeError("init_params: need at least input and output width");
  std::mt19937_64 rng(seed);
  std::vector<Layer> layers;
  for (std::size_t k = 1; k < shape.widths.size(); ++k) {
    const Index fan_in = shape.widths[k - 1];
    const Index fan_out = shape.widths[k];
    if (fan_in <= 0 || fan_out <= 0) throw ShapeError("init_params: widths must be positive");
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    Linear lin{Matrix(fan_out, fan_in), Vector::Zero(fan_out)};
    // Row-major fill keeps the draw order independent of Eigen's storage.
    for (Index i = 0; i < fan_out; ++i) {
      for (Index j = 0; j < fan_in; ++j) lin.weights(i, j) = normal(rng);
    }
    layers.emplace_back(std::move(lin));
    if (k + 1 < shape.widths.size()) layers.emplace_back(Activation{shape.activation, fan_out});
  }
  return Network(std::move(layers));
}

// ---------------------------------------------------------------------------
// Model file: little-endian "ZNTN", u32 version, u32 layer count, then per
// layer a u8 tag (0 linear, 1..3 relu/tanh/sigmoid) followed by
//   linear:     u32 out, u32 in, out*in f64 (row-major W), out f64 (b)
//   activation: u32 width

inline constexpr std::uint32_t kModelFormatVersion = 1;
inline constexpr std::string_view kModelMagic = "ZNTN";

namespace detail {

class ByteWriter {
public:
  void bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
  }
  std::string take() { return std::move(out_); }

private:
  std::string out_;
};

class ByteReader {
public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(bytes(1)[0]); }
  std::uint32_t u32() {
    const auto s = bytes(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(s[i]);
    return v;
  }
  double f64() {
    const auto s = bytes(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(s[i]);
    return std::bit_cast<double>(v);
  }
  [[nodiscard]] bool done() const { return pos_ == data_.size(); }

private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw FormatError("model file truncated at byte " + std::to_string(pos_));
    }
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

} // namespace detail

inline std::string serialize(const Network& net) {
  detail::ByteWriter w;
  w.bytes(kModelMagic);
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(net.size()));
  for (const auto& layer : net.layers()) {
    if (const auto* lin = std::get_if<Linear>(&layer)) {
      w.u8(0);
      w.u32(static_cast<std::uint32_t>(lin->out_dim()));
      w.u32(static_cast<std::uint32_t>(lin->in_dim()));
      for (Index i = 0; i < lin->out_dim(); ++i) {
        for (Index j = 0; j < lin->in_dim(); ++j) w.f64(lin->weights(i, j));
      }
      for (Index i = 0; i < lin->out_dim(); ++i) w.f64(lin->bias(i));
    } else {
      const auto& act = std::get<Activation>(layer);
      w.u8(static_cast<std::uint8_t>(act.kind));
      w.u32(static_cast<std::uint32_t>(act.width));
    }
  }
  return w.take();
}

inline Network deserialize(std::string_view bytes) {
  detail::ByteReader r(bytes);
  if (bytes.size() < 4 || r.bytes(4) != kModelMagic) throw FormatError("model file: bad magic");
  const auto version = r.u32();
  if (version != kModelFormatVersion) {
    throw FormatError("model file: unsupported version " + std::to_string(version) +
                      " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  const auto count = r.u32();
  if (count == 0) throw FormatError("model file: zero layers");
  std::vector<Layer> layers;
  Index prev_width = -1;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto tag = r.u8();
    Index in_width = 0;
    if (tag == 0) {
      const Index out = r.u32();
      const Index in = r.u32();
      Linear lin{Matrix(out, in), Vector(out)};
      for (Index i = 0; i < out; ++i) {
        for (Index j = 0; j < in; ++j) lin.weights(i, j) = r.f64();
      }
      for (Index i = 0; i < out; ++i) lin.bias(i) = r.f64();
      in_width = in;
      layers.emplace_back(std::move(lin));
    } else if (tag >= 1 && tag <= 3) {
      const Index width = r.u32();
      in_width = width;
      layers.emplace_back(Activation{static_cast<ActivationKind>(tag), width});
    } else {
      throw FormatError("model file: unknown layer tag " + std::to_string(tag) + " at layer " +
                        std::to_string(k));
    }
    if (prev_width >= 0 && in_width != prev_width) {
      throw FormatError("model file: shape error at layer " + std::to_string(k) + ": input width " +
                        std::to_string(in_width) + " does not match previous output width " +
                        std::to_string(prev_width));
    }
    prev_width = layer_out_dim(layers.back());
  }
  if (!r.done()) throw FormatError("model file: trailing bytes after last layer");
  return Network(std::move(layers));
}

inline void save_model(const Network& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  const auto bytes = serialize(net);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing '" + path + "'");
}

inline Network load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

} // namespace zonotrain

#endif
