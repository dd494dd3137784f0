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

#ifndef ZONOTRAIN_ATTACK_HPP
#define ZONOTRAIN_ATTACK_HPP

#include <algorithm>
#include <string>

#include "zonotrain/error.hpp"
#include "zonotrain/net.hpp"
#include "zonotrain/zonoset.hpp"

namespace zonotrain {

struct AttackConfig {
  double epsilon = 0.1;
  int iterations = 40;
  double step_size = 0.01;
  double clamp_lower = 0.0;
  double clamp_upper = 1.0;

  void validate() const {
    if (!(epsilon >= 0.0)) throw Error("attack: epsilon must be non-negative");
    if (iterations < 1) throw Error("attack: iterations must be >= 1");
    if (!(step_size >= 0.0)) throw Error("attack: step size must be non-negative");
    if (!(clamp_lower <= clamp_upper)) throw Error("attack: empty clamp range");
  }
};

namespace detail {

inline Vector sign_vector(const Vector& v) {
  return v.unaryExpr([](double x) { return sign(x); });
}

/// Projection onto the l-inf ball around `origin` intersected with the clamp box.
inline Vector project(const Vector& x, const Vector& origin, double epsilon, double lo, double hi) {
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double a = std::max(origin(i) - epsilon, lo);
    const double b = std::min(origin(i) + epsilon, hi);
    // origin outside the clamp box leaves an empty intersection; prefer the ball
    out(i) = a <= b ? std::clamp(x(i), a, b) : std::clamp(x(i), origin(i) - epsilon, origin(i) + epsilon);
  }
  return out;
}

} // namespace detail

/// One signed-gradient ascent step on the cross-entropy, clamped to [lo, hi].
inline Vector fgsm(const Network& net, const Vector& x, const Vector& target, double epsilon,
                   double lo = 0.0, double hi = 1.0) {
  detail::require_shape(x.size() == net.input_dim(), "fgsm: input length mismatch");
  const Vector step = epsilon * detail::sign_vector(input_gradient(net, x, target));
  return detail::project(x + step, x, epsilon, lo, hi);
}

/// Descends the cross-entropy towards `target_class`.
inline Vector targeted_fgsm(const Network& net, const Vector& x, Index target_class, double epsilon,
                            double lo = 0.0, double hi = 1.0) {
  detail::require_shape(x.size() == net.input_dim(), "targeted_fgsm: input length mismatch");
  const Vector g = input_gradient(net, x, one_hot(target_class, net.output_dim()));
  return detail::project(x - epsilon * detail::sign_vector(g), x, epsilon, lo, hi);
}

/// Constant-step PGD started at x; returns the final iterate.
inline Vector pgd(const Network& net, const Vector& x, const Vector& target, const AttackConfig& cfg) {
  cfg.validate();
  detail::require_shape(x.size() == net.input_dim(), "pgd: input length mismatch");
  Vector current = x;
  for (int it = 0; it < cfg.iterations; ++it) {
    const Vector g = input_gradient(net, current, target);
    current = detail::project(current + cfg.step_size * detail::sign_vector(g), x, cfg.epsilon,
                              cfg.clamp_lower, cfg.clamp_upper);
  }
  return current;
}

} // namespace zonotrain

#endif
