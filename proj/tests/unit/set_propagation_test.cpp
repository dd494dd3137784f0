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

#include <random>

#include <gtest/gtest.h>

#include "support/oracles.hpp"

namespace zt = zonotrain;
using zt::ActivationKind;
using zt::Backend;
using zt::Matrix;
using zt::Vector;
using zt::Zonotope;

namespace {

constexpr ActivationKind kKinds[] = {ActivationKind::Relu, ActivationKind::Tanh, ActivationKind::Sigmoid};
constexpr Backend kBackends[] = {Backend::Zonotope, Backend::ZonotopeIntervalErrors, Backend::Ibp};

} // namespace

TEST(Backend, NamesRoundTrip) {
  for (Backend b : kBackends) EXPECT_EQ(zt::parse_backend(zt::to_string(b)), b);
  EXPECT_THROW(zt::parse_backend("box"), zt::FormatError);
}

TEST(SetForward, PointInputMatchesPointForward) {
  std::mt19937_64 rng(1);
  for (Backend b : kBackends) {
    for (ActivationKind k : kKinds) {
      const auto net = zt::testing::random_network(rng, 3, 4, 3, 10, k);
      const Vector x = zt::testing::uniform_vector(rng, 3, 0, 1);
      const auto fwd = zt::set_forward(net, Zonotope::point(x), b);
      EXPECT_LE((fwd.output.center() - zt::predict(net, x)).cwiseAbs().maxCoeff(), 1e-12) << zt::to_string(b);
      EXPECT_EQ(zt::f_radius(fwd.output), 0.0);
    }
  }
}

TEST(SetForward, SingleLinearLayerIsAffineMap) {
  std::mt19937_64 rng(2);
  const Matrix w = zt::testing::uniform_matrix(rng, 2, 3, -1, 1);
  const Vector b = zt::testing::uniform_vector(rng, 2, -1, 1);
  const zt::Network net({zt::Linear{w, b}});
  const Zonotope in(zt::testing::uniform_vector(rng, 3, 0, 1), zt::testing::uniform_matrix(rng, 3, 3, -0.1, 0.1));
  const auto fwd = zt::set_forward(net, in);
  const auto ref = zt::affine_map(w, b, in);
  EXPECT_EQ(fwd.output.center(), ref.center());
  EXPECT_EQ(fwd.output.generators(), ref.generators());
}

TEST(SetForward, DimensionMismatch) {
  const auto net = zt::init_params({{3, 4, 2}, ActivationKind::Relu}, 1);
  EXPECT_THROW(zt::set_forward(net, Zonotope::point(Vector::Zero(2))), zt::ShapeError);
}

TEST(SetForward, AllBackendsSound) {
  std::mt19937_64 rng(3);
  for (Backend b : kBackends) {
    for (ActivationKind k : kKinds) {
      for (int trial = 0; trial < 5; ++trial) {
        const auto net = zt::testing::random_network(rng, 3, 3, 3, 12, k);
        const Zonotope in(zt::testing::uniform_vector(rng, 3, 0, 1), zt::testing::uniform_matrix(rng, 3, 5, -0.1, 0.1));
        const auto h = zt::interval_hull(zt::set_forward(net, in, b).output);
        for (int s = 0; s < 500; ++s) {
          EXPECT_TRUE(h.contains(zt::predict(net, zt::testing::sample_point(rng, in)), 1e-9)) << zt::to_string(b);
        }
      }
    }
  }
}

TEST(SetForward, IntervalErrorsEnclosesFullZonotopeWithOneHiddenLayer) {
  // With one activation layer both backends see the same bounds, so only the
  // final linear map differs and |W E| <= |W| e row-wise.
  std::mt19937_64 rng(4);
  for (ActivationKind k : kKinds) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto net = zt::testing::random_network(rng, 3, 3, 1, 12, k);
      const auto in = zt::linf_ball(zt::testing::uniform_vector(rng, 3, 0, 1), 0.1);
      const auto full = zt::interval_hull(zt::set_forward(net, in, Backend::Zonotope).output);
      const auto ierr = zt::interval_hull(zt::set_forward(net, in, Backend::ZonotopeIntervalErrors).output);
      EXPECT_TRUE((full.lower.array() >= ierr.lower.array() - 1e-9).all());
      EXPECT_TRUE((full.upper.array() <= ierr.upper.array() + 1e-9).all());
    }
  }
}

TEST(SetForward, ZonotopeHullIsNotAlwaysInsideIbpHull) {
  // relu on [-1, 1]: the chord enclosure gives [-0.5, 1], intervals give [0, 1].
  const zt::Network net({zt::Activation{ActivationKind::Relu, 1}});
  const Zonotope in(Vector::Zero(1), Matrix::Ones(1, 1));
  const auto zono = zt::interval_hull(zt::set_forward(net, in, Backend::Zonotope).output);
  const auto ibp = zt::interval_hull(zt::set_forward(net, in, Backend::Ibp).output);
  EXPECT_DOUBLE_EQ(zono.lower(0), -0.5);
  EXPECT_DOUBLE_EQ(ibp.lower(0), 0.0);
  EXPECT_DOUBLE_EQ(zono.upper(0), ibp.upper(0));
}

TEST(SetForward, TraceShapes) {
  const auto net = zt::init_params({{3, 5, 4, 2}, ActivationKind::Tanh}, 2);
  const auto in = zt::linf_ball(Vector::Constant(3, 0.5), 0.1);
  const auto fwd = zt::set_forward(net, in);
  const auto& tr = std::get<zt::ZonotopeTrace>(fwd.trace.data);
  ASSERT_EQ(tr.hidden.size(), net.size() + 1);
  EXPECT_TRUE(tr.records[1].has_value());
  EXPECT_FALSE(tr.records[0].has_value());
  // each activation adds one generator per neuron
  EXPECT_EQ(fwd.output.num_generators(), 3 + 5 + 4);
  const auto ibp = zt::set_forward(net, in, Backend::Ibp);
  EXPECT_EQ(ibp.output.num_generators(), 2);
}

TEST(SetBackward, RequiresZonotopeTrace) {
  const auto net = zt::init_params({{2, 3, 2}, ActivationKind::Relu}, 1);
  const auto fwd = zt::set_forward(net, zt::linf_ball(Vector::Constant(2, 0.5), 0.1), Backend::Ibp);
  EXPECT_THROW(zt::set_backward(net, fwd.trace, Zonotope::zero(2, fwd.output.num_generators())), zt::Error);
}

TEST(SetBackward, SingleLinearLayerOuterProduct) {
  Matrix w(1, 1);
  w << 0.5;
  const zt::Network net({zt::Linear{w, Vector::Zero(1)}});
  Matrix g(1, 1);
  g << 2.0;
  const Zonotope in(Vector::Constant(1, 1.0), g);
  const auto fwd = zt::set_forward(net, in);
  Matrix gg(1, 1);
  gg << 4.0;
  const auto grads = zt::set_backward(net, fwd.trace, {Vector::Constant(1, 3.0), gg});
  EXPECT_EQ(grads.weights[0](0, 0), 11.0);
  EXPECT_EQ(grads.biases[0](0), 3.0);
}

TEST(SetBackward, DegenerateInputMatchesPointBackward) {
  std::mt19937_64 rng(5);
  for (Backend b : kBackends) {
    for (ActivationKind k : kKinds) {
      const auto net = zt::testing::random_network(rng, 3, 3, 3, 10, k);
      const Vector x = zt::testing::uniform_vector(rng, 3, 0, 1);
      const Vector t = zt::one_hot(1, 3);
      const auto fwd = zt::set_forward(net, Zonotope::point(x), b);
      const auto set = zt::backward(net, fwd.trace, zt::set_loss_gradient(t, fwd.output, {0.0, 0.0}));
      const auto pf = zt::point_forward(net, x);
      const auto point = zt::point_backward(net, pf.hidden, zt::cross_entropy_grad(t, pf.output)).params;
      for (std::size_t l = 0; l < net.size(); ++l) {
        if (point.weights[l].size() == 0) continue;
        EXPECT_LE((set.weights[l] - point.weights[l]).cwiseAbs().maxCoeff(), 1e-12) << zt::to_string(b);
        EXPECT_LE((set.biases[l] - point.biases[l]).cwiseAbs().maxCoeff(), 1e-12) << zt::to_string(b);
      }
    }
  }
}

TEST(SetBackward, MatchesFiniteDifferencesOnAllBackends) {
  std::mt19937_64 rng(6);
  for (Backend b : kBackends) {
    int nets = 0;
    for (int trial = 0; trial < 12; ++trial) {
      const ActivationKind k = kKinds[trial % 3];
      zt::Network net;
      Zonotope in;
      do {
        net = zt::testing::random_network(rng, 3, 3, 2, 8, k);
        in = zt::linf_ball(zt::testing::uniform_vector(rng, 3, 0, 1), 0.05);
      } while (zt::testing::min_bound_clearance(net, in, b) < 1e-3);
      ++nets;
      const Vector t = zt::one_hot(trial % 3, 3);
      const zt::SetLossConfig cfg{0.3, 0.05};
      const auto fwd = zt::set_forward(net, in, b);
      const auto grads = zt::backward(net, fwd.trace, zt::set_loss_gradient(t, fwd.output, cfg));
      auto f = [&] { return zt::set_loss(t, zt::set_forward(net, in, b).output, cfg); };
      for (std::size_t l = 0; l < net.size(); ++l) {
        auto* lin = std::get_if<zt::Linear>(&net.layer(l));
        if (lin == nullptr) continue;
        for (zt::Index i = 0; i < lin->weights.size(); ++i) {
          const double fd = zt::testing::central_difference(f, lin->weights.data()[i], 1e-6);
          EXPECT_TRUE(zt::testing::rel_close(fd, grads.weights[l].data()[i], 1e-4)) << zt::to_string(b);
        }
        for (zt::Index i = 0; i < lin->bias.size(); ++i) {
          const double fd = zt::testing::central_difference(f, lin->bias(i), 1e-6);
          EXPECT_TRUE(zt::testing::rel_close(fd, grads.biases[l](i), 1e-4)) << zt::to_string(b);
        }
      }
    }
    EXPECT_EQ(nets, 12);
  }
}
