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

#ifndef ZONOTRAIN_OPTIM_HPP
#define ZONOTRAIN_OPTIM_HPP

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "zonotrain/error.hpp"
#include "zonotrain/net.hpp"

namespace zonotrain {

enum class OptimizerKind : std::uint8_t { Sgd, Adam };

inline std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::Sgd ? "sgd" : "adam"; }

inline OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  throw FormatError("unknown optimizer '" + std::string(name) + "' (expected sgd or adam)");
}

/// Rescales `grads` to `max_norm` when their global l2 norm exceeds it.
/// Non-positive `max_norm` disables clipping. Returns the norm before clipping.
inline double clip_gradients(ParamGrads& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (max_norm > 0.0 && norm > max_norm) grads *= max_norm / norm;
  return norm;
}

/// SGD or Adam (beta1 0.9, beta2 0.999, eps 1e-8, bias-corrected).
class Optimizer {
public:
  explicit Optimizer(OptimizerKind kind = OptimizerKind::Adam) : kind_(kind) {}

  void step(Network& net, const ParamGrads& grads, double lr) {
    if (kind_ == OptimizerKind::Adam && first_moment_.weights.empty()) {
      first_moment_ = ParamGrads::zeros_like(net);
      second_moment_ = ParamGrads::zeros_like(net);
    }
    ++steps_;
    for (std::size_t k = 0; k < net.size(); ++k) {
      auto* lin = std::get_if<Linear>(&net.layer(k));
      if (lin == nullptr) continue;
      if (kind_ == OptimizerKind::Sgd) {
        lin->weights -= lr * grads.weights[k];
        lin->bias -= lr * grads.biases[k];
      } else {
        adam_update(lin->weights, grads.weights[k], first_moment_.weights[k],
                    second_moment_.weights[k], lr);
        adam_update(lin->bias, grads.biases[k], first_moment_.biases[k], second_moment_.biases[k],
                    lr);
      }
    }
  }

  [[nodiscard]] long steps() const { return steps_; }
  [[nodiscard]] OptimizerKind kind() const { return kind_; }

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

private:
  template <typename Param, typename State>
  void adam_update(Param& param, const Param& grad, State& m, State& v, double lr) const {
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(steps_));
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
  }

  OptimizerKind kind_;
  long steps_ = 0;
  ParamGrads first_moment_;
  ParamGrads second_moment_;
};

/// Warm-up, linear ramp-up and step learning-rate decay.
struct Schedule {
  int warmup_epochs = 0;
  int rampup_epochs = 0;
  std::vector<int> lr_decay_epochs;
  double lr_decay_factor = 0.1;
};

struct ScheduledValues {
  double epsilon = 0.0;
  double tau = 0.0;
  double learning_rate = 0.0;
};

/// Values for the 1-based `epoch`: epsilon and tau are zero during warm-up,
/// ramp linearly to their targets over the ramp-up epochs, then stay there.
inline ScheduledValues schedule(int epoch, const Schedule& s, double epsilon, double tau,
                                double learning_rate) {
  double fraction = 1.0;
  if (epoch <= s.warmup_epochs) {
    fraction = 0.0;
  } else if (s.rampup_epochs > 0 && epoch < s.warmup_epochs + s.rampup_epochs) {
    fraction = static_cast<double>(epoch - s.warmup_epochs) / static_cast<double>(s.rampup_epochs);
  }
  double lr = learning_rate;
  for (int d : s.lr_decay_epochs) {
    if (epoch >= d) lr *= s.lr_decay_factor;
  }
  return {fraction * epsilon, fraction * tau, lr};
}

} // namespace zonotrain

#endif
