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

#ifndef ZONOTRAIN_SET_LOSS_HPP
#define ZONOTRAIN_SET_LOSS_HPP

#include <string>

#include "zonotrain/error.hpp"
#include "zonotrain/net.hpp"
#include "zonotrain/zonoset.hpp"

namespace zonotrain {

/// tau trades the center's cross-entropy against the F-radius of the output
/// set; the F-radius is normalized by the perturbation radius epsilon.
struct SetLossConfig {
  double tau = 0.0;
  double epsilon = 0.0;

  void validate() const {
    if (!(tau >= 0.0 && tau <= 1.0)) throw Error("set loss: tau must lie in [0, 1]");
    if (!(epsilon >= 0.0)) throw Error("set loss: epsilon must be non-negative");
    if (tau > 0.0 && epsilon <= 0.0) throw Error("set loss: tau > 0 requires epsilon > 0");
  }

  // With tau == 0 the robustness term vanishes, so epsilon == 0 is allowed.
  [[nodiscard]] double robustness_weight() const { return tau == 0.0 ? 0.0 : tau / epsilon; }
};

/// (1 - tau) * CE(t, c_K) + (tau / eps) * ||Y||_F
inline double set_loss(const Vector& target, const Zonotope& output, const SetLossConfig& cfg) {
  detail::require_shape(target.size() == output.dim(), "set_loss: target length mismatch");
  double loss = (1.0 - cfg.tau) * cross_entropy(target, output.center());
  if (cfg.tau > 0.0) loss += cfg.robustness_weight() * f_radius(output);
  return loss;
}

/// Gradient set of set_loss w.r.t. the output zonotope.
inline Zonotope set_loss_gradient(const Vector& target, const Zonotope& output,
                                  const SetLossConfig& cfg) {
  detail::require_shape(target.size() == output.dim(), "set_loss_gradient: target length mismatch");
  Vector dc = (1.0 - cfg.tau) * cross_entropy_grad(target, output.center());
  if (cfg.tau == 0.0) return {std::move(dc), Matrix::Zero(output.dim(), output.num_generators())};
  Matrix dg = cfg.robustness_weight() * f_radius_gradient(output).generators();
  return {std::move(dc), std::move(dg)};
}

} // namespace zonotrain

#endif
