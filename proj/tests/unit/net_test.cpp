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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support/oracles.hpp"

namespace zt = zonotrain;
using zt::ActivationKind;
using zt::Matrix;
using zt::Vector;

namespace {

zt::Network identity_net(zt::Index n) { return zt::Network({zt::Linear{Matrix::Identity(n, n), Vector::Zero(n)}}); }

} // namespace

TEST(PointForward, IdentityNetwork) {
  Vector x(3);
  x << 1, -2, 3;
  EXPECT_EQ(zt::predict(identity_net(3), x), x);
}

TEST(PointForward, HandEvaluatedRelu) {
  Matrix w(1, 2);
  w << 1, -1;
  const zt::Network net({zt::Linear{w, Vector::Zero(1)}, zt::Activation{ActivationKind::Relu, 1}});
  Vector x(2);
  x << 2, 3;
  const auto fwd = zt::point_forward(net, x);
  EXPECT_EQ(fwd.hidden[1](0), -1.0);
  EXPECT_EQ(fwd.output(0), 0.0);
}

TEST(PointForward, TanhOfZero) {
  const zt::Network net({zt::Activation{ActivationKind::Tanh, 4}});
  EXPECT_EQ(zt::predict(net, Vector::Zero(4)), Vector::Zero(4));
}

TEST(PointForward, DimensionMismatch) {
  EXPECT_THROW(zt::predict(identity_net(3), Vector::Zero(2)), zt::ShapeError);
}

TEST(Network, RejectsIncompatibleWidths) {
  EXPECT_THROW(zt::Network({zt::Linear{Matrix::Zero(3, 2), Vector::Zero(3)}, zt::Activation{ActivationKind::Relu, 4}}),
               zt::ShapeError);
  EXPECT_THROW(zt::Network(std::vector<zt::Layer>{}), zt::ShapeError);
}

TEST(CrossEntropy, UniformLogits) {
  EXPECT_NEAR(zt::cross_entropy(zt::one_hot(3, 10), Vector::Constant(10, 0.7)), std::log(10.0), 1e-12);
}

TEST(CrossEntropy, GradientSumsToZeroAndMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    Vector y = zt::testing::uniform_vector(rng, 5, -3, 3);
    const Vector t = zt::one_hot(trial % 5, 5);
    const Vector g = zt::cross_entropy_grad(t, y);
    EXPECT_NEAR(g.sum(), 0.0, 1e-12);
    for (zt::Index i = 0; i < 5; ++i) {
      const double fd = zt::testing::central_difference([&] { return zt::cross_entropy(t, y); }, y(i), 1e-6);
      EXPECT_TRUE(zt::testing::rel_close(fd, g(i), 1e-6, 1e-9)) << fd << " vs " << g(i);
    }
  }
}

TEST(Softmax, SumsToOneAndShiftInvariant) {
  Vector y(4);
  y << 1000, 999, -5, 0;
  const Vector p = zt::softmax(y);
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
  EXPECT_LE((zt::softmax((y.array() + 17.0).matrix()) - p).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(std::isfinite(zt::cross_entropy(zt::one_hot(2, 4), y)));
}

TEST(PointBackward, IdentityLayer) {
  Vector x(2);
  x << 0.5, -1;
  Vector g(2);
  g << 2, 3;
  const auto net = identity_net(2);
  const auto back = zt::point_backward(net, zt::point_forward(net, x).hidden, g);
  EXPECT_EQ(back.layer_grads[0], g);
  EXPECT_EQ(back.params.weights[0], g * x.transpose());
}

TEST(PointBackward, DeadReluGivesZeroGradient) {
  const zt::Network net({zt::Linear{-Matrix::Identity(2, 2), Vector::Constant(2, -1)}, zt::Activation{ActivationKind::Relu, 2}});
  Vector x(2);
  x << 0.5, 0.25;
  const auto back = zt::point_backward(net, zt::point_forward(net, x).hidden, Vector::Ones(2));
  EXPECT_EQ(back.layer_grads[0], Vector::Zero(2));
  EXPECT_EQ(back.params.weights[0], Matrix::Zero(2, 2));
}

TEST(PointBackward, RejectsWrongHiddenStates) {
  const auto net = identity_net(2);
  EXPECT_THROW(zt::point_backward(net, {Vector::Zero(2)}, Vector::Zero(2)), zt::ShapeError);
}

TEST(PointBackward, MatchesFiniteDifferences) {
  std::mt19937_64 rng(31);
  for (ActivationKind kind : {ActivationKind::Relu, ActivationKind::Tanh, ActivationKind::Sigmoid}) {
    for (int trial = 0; trial < 50; ++trial) {
      zt::Network net = zt::testing::random_network(rng, 4, 3, 2, 8, kind);
      const Vector x = zt::testing::uniform_vector(rng, 4, 0, 1);
      const Vector t = zt::one_hot(trial % 3, 3);
      const auto fwd = zt::point_forward(net, x);
      const auto back = zt::point_backward(net, fwd.hidden, zt::cross_entropy_grad(t, fwd.output));
      auto f = [&] { return zt::cross_entropy(t, zt::predict(net, x)); };
      for (std::size_t k = 0; k < net.size(); ++k) {
        auto* lin = std::get_if<zt::Linear>(&net.layer(k));
        if (lin == nullptr) continue;
        for (zt::Index i = 0; i < lin->weights.size(); ++i) {
          const double fd = zt::testing::central_difference(f, lin->weights.data()[i], 1e-6);
          EXPECT_TRUE(zt::testing::rel_close(fd, back.params.weights[k].data()[i], 1e-5, 1e-8));
        }
        for (zt::Index i = 0; i < lin->bias.size(); ++i) {
          const double fd = zt::testing::central_difference(f, lin->bias(i), 1e-6);
          EXPECT_TRUE(zt::testing::rel_close(fd, back.params.biases[k](i), 1e-5, 1e-8));
        }
      }
    }
  }
}

TEST(InitParams, DeterministicPerSeed) {
  const zt::NetworkShape shape{{3, 5, 2}, ActivationKind::Tanh};
  EXPECT_TRUE(zt::init_params(shape, 42) == zt::init_params(shape, 42));
  EXPECT_FALSE(zt::init_params(shape, 42) == zt::init_params(shape, 43));
}

TEST(InitParams, LayoutAndZeroBias) {
  const auto net = zt::init_params({{3, 5, 4, 2}, ActivationKind::Sigmoid}, 1);
  ASSERT_EQ(net.size(), 5U);
  EXPECT_TRUE(std::holds_alternative<zt::Activation>(net.layer(1)));
  EXPECT_TRUE(std::holds_alternative<zt::Linear>(net.layer(4)));
  EXPECT_EQ(std::get<zt::Linear>(net.layer(0)).bias, Vector::Zero(5));
}

TEST(InitParams, VarianceMatchesFanIn) {
  const auto net = zt::init_params({{1000, 1000}, ActivationKind::Relu}, 9);
  const Matrix& w = std::get<zt::Linear>(net.layer(0)).weights;
  const double var = w.array().square().mean() - std::pow(w.mean(), 2);
  EXPECT_NEAR(var, 2.0 / 1000.0, 0.1 * 2.0 / 1000.0);
}

TEST(Serialization, RoundTripIsBitExact) {
  std::mt19937_64 rng(4);
  for (ActivationKind kind : {ActivationKind::Relu, ActivationKind::Tanh, ActivationKind::Sigmoid}) {
    const auto net = zt::testing::random_network(rng, 5, 3, 3, 9, kind);
    EXPECT_TRUE(zt::deserialize(zt::serialize(net)) == net);
  }
}

TEST(Serialization, BadMagic) {
  auto bytes = zt::serialize(identity_net(2));
  bytes[0] = 'X';
  try {
    (void)zt::deserialize(bytes);
    FAIL() << "expected an error";
  } catch (const zt::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
  }
}

TEST(Serialization, TruncationAndVersion) {
  const auto bytes = zt::serialize(identity_net(2));
  EXPECT_THROW((void)zt::deserialize(bytes.substr(0, bytes.size() - 3)), zt::FormatError);
  auto wrong_version = bytes;
  wrong_version[4] = 7;
  EXPECT_THROW((void)zt::deserialize(wrong_version), zt::FormatError);
  EXPECT_THROW((void)zt::deserialize(bytes + "x"), zt::FormatError);
}

TEST(Serialization, WidthInconsistencyIsShapeError) {
  // A 3 -> 5 layer followed by a layer that consumes 2 inputs.
  zt::detail::ByteWriter w;
  w.bytes(zt::kModelMagic);
  w.u32(zt::kModelFormatVersion);
  w.u32(2);
  w.u8(0);
  w.u32(5);
  w.u32(3);
  for (int i = 0; i < 5 * 3 + 5; ++i) w.f64(0.5);
  w.u8(0);
  w.u32(5);
  w.u32(2);
  for (int i = 0; i < 5 * 2 + 5; ++i) w.f64(0.5);
  try {
    (void)zt::deserialize(w.take());
    FAIL() << "expected an error";
  } catch (const zt::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("shape error"), std::string::npos) << e.what();
  }
}

TEST(Serialization, FileRoundTrip) {
  const auto net = zt::init_params({{2, 4, 2}, ActivationKind::Relu}, 3);
  const std::string path = ::testing::TempDir() + "/net_test_model.znt";
  zt::save_model(net, path);
  EXPECT_TRUE(zt::load_model(path) == net);
  EXPECT_THROW(zt::load_model(path + ".missing"), zt::Error);
}
