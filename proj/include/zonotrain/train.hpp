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

#ifndef ZONOTRAIN_TRAIN_HPP
#define ZONOTRAIN_TRAIN_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zonotrain/attack.hpp"
#include "zonotrain/csv.hpp"
#include "zonotrain/data.hpp"
#include "zonotrain/error.hpp"
#include "zonotrain/net.hpp"
#include "zonotrain/optim.hpp"
#include "zonotrain/set_loss.hpp"
#include "zonotrain/set_propagation.hpp"
#include "zonotrain/verify.hpp"
#include "zonotrain/zonoset.hpp"

namespace zonotrain {

enum class InputSetMode : std::uint8_t { Linf, Fgsm };

inline std::string_view to_string(InputSetMode m) { return m == InputSetMode::Linf ? "linf" : "fgsm"; }

inline InputSetMode parse_input_set_mode(std::string_view name) {
  if (name == "linf") return InputSetMode::Linf;
  if (name == "fgsm") return InputSetMode::Fgsm;
  throw FormatError("unknown input set mode '" + std::string(name) + "' (expected linf or fgsm)");
}

enum class TrainMethod : std::uint8_t { Point, Set };

inline std::string_view to_string(TrainMethod m) { return m == TrainMethod::Point ? "point" : "set"; }

inline TrainMethod parse_train_method(std::string_view name) {
  if (name == "point") return TrainMethod::Point;
  if (name == "set") return TrainMethod::Set;
  throw FormatError("unknown training method '" + std::string(name) + "' (expected point or set)");
}

/// Input set around x. FGSM mode averages `attacks` FGSM perturbations into the
/// center and uses the scaled perturbations as generators: the first one is
/// untargeted, the rest target the most likely wrong classes.
inline Zonotope build_input_set(const Vector& x, InputSetMode mode, double epsilon,
                                const Network* net = nullptr, Index label = 0, int attacks = 1) {
  if (!(epsilon >= 0.0)) throw Error("build_input_set: epsilon must be non-negative");
  if (mode == InputSetMode::Linf) return linf_ball(x, epsilon);
  if (net == nullptr) throw Error("build_input_set: fgsm mode needs a network");
  if (attacks < 1) throw Error("build_input_set: need at least one attack");
  if (epsilon == 0.0) return Zonotope::point(x);

  const Index classes = net->output_dim();
  const auto count = static_cast<Index>(std::min<long long>(attacks, classes));
  Matrix deltas(x.size(), count);
  deltas.col(0) = fgsm(*net, x, one_hot(label, classes), epsilon) - x;
  if (count > 1) {
    const Vector y = predict(*net, x);
    std::vector<Index> wrong;
    for (Index k = 0; k < classes; ++k) {
      if (k != label) wrong.push_back(k);
    }
    std::stable_sort(wrong.begin(), wrong.end(), [&y](Index a, Index b) { return y(a) > y(b); });
    for (Index i = 1; i < count; ++i) {
      deltas.col(i) = targeted_fgsm(*net, x, wrong[static_cast<std::size_t>(i - 1)], epsilon) - x;
    }
  }
  const double inv = 1.0 / static_cast<double>(count);
  return {x + inv * deltas.rowwise().sum(), inv * deltas};
}

struct TrainConfig {
  TrainMethod method = TrainMethod::Set;
  double learning_rate = 0.01;
  int epochs = 1;
  std::size_t batch_size = 32;
  OptimizerKind optimizer = OptimizerKind::Adam;
  std::uint64_t seed = 0;
  double grad_clip_norm = 10.0;
  Schedule schedule;
  Backend backend = Backend::Zonotope;
  InputSetMode input_set_mode = InputSetMode::Linf;
  int fgsm_attacks = 1;
  double epsilon = 0.0; // target perturbation radius
  double tau = 0.0;     // target robustness weight

  void validate() const {
    if (!(learning_rate > 0.0)) throw Error("train: learning_rate must be positive");
    if (epochs < 1) throw Error("train: epochs must be >= 1");
    if (batch_size < 1) throw Error("train: batch_size must be >= 1");
    if (schedule.warmup_epochs < 0 || schedule.rampup_epochs < 0) {
      throw Error("train: warmup/rampup epochs must be non-negative");
    }
    if (schedule.warmup_epochs + schedule.rampup_epochs > epochs) {
      throw Error("train: warmup + rampup exceeds epochs");
    }
    if (!(schedule.lr_decay_factor > 0.0)) throw Error("train: lr decay factor must be positive");
    if (fgsm_attacks < 1) throw Error("train: fgsm_attacks must be >= 1");
    SetLossConfig{tau, epsilon}.validate();
  }
};

struct EpochMetrics {
  int epoch = 0;
  double epsilon = 0.0;
  double tau = 0.0;
  double learning_rate = 0.0;
  double mean_set_loss = 0.0;
  double mean_f_radius = 0.0;
  double train_accuracy = 0.0;
  double wall_time_s = 0.0;
};

inline CsvWriter metrics_csv(const std::vector<EpochMetrics>& log, bool include_wall_time = true) {
  std::vector<std::string> header{"epoch",         "epsilon",        "tau",
                                  "learning_rate", "mean_set_loss",  "mean_f_radius",
                                  "train_accuracy"};
  if (include_wall_time) header.emplace_back("wall_time_s");
  CsvWriter csv(std::move(header));
  for (const auto& e : log) {
    std::vector<std::string> row{std::to_string(e.epoch),        format_number(e.epsilon),
                                 format_number(e.tau),           format_number(e.learning_rate),
                                 format_number(e.mean_set_loss), format_number(e.mean_f_radius),
                                 format_number(e.train_accuracy)};
    if (include_wall_time) row.push_back(format_number(e.wall_time_s));
    csv.add_row(std::move(row));
  }
  return csv;
}

inline double accuracy(const Network& net, const Dataset& data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    correct += classify(predict(net, data.inputs[i])) == data.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

struct SampleStep {
  double loss = 0.0;
  double f_radius = 0.0;
  ParamGrads grads;
};

/// Loss and parameter gradients of one sample.
inline SampleStep point_sample_step(const Network& net, const Vector& x, const Vector& target) {
  const auto fwd = point_forward(net, x);
  SampleStep s;
  s.loss = cross_entropy(target, fwd.output);
  s.grads = point_backward(net, fwd.hidden, cross_entropy_grad(target, fwd.output)).params;
  return s;
}

inline SampleStep set_sample_step(const Network& net, const Zonotope& input, const Vector& target,
                                  const SetLossConfig& loss_cfg, Backend backend) {
  const auto fwd = set_forward(net, input, backend);
  SampleStep s;
  s.loss = set_loss(target, fwd.output, loss_cfg);
  s.f_radius = f_radius(fwd.output);
  s.grads = backward(net, fwd.trace, set_loss_gradient(target, fwd.output, loss_cfg));
  return s;
}

/// Mini-batch training with averaged per-sample gradients, clipping and an
/// optimizer update per batch.
class Trainer {
public:
  Trainer(Network net, TrainConfig cfg) : net_(std::move(net)), cfg_(std::move(cfg)), opt_(cfg_.optimizer) {
    cfg_.validate();
  }

  [[nodiscard]] const Network& network() const { return net_; }
  [[nodiscard]] const TrainConfig& config() const { return cfg_; }

  /// One update on the listed samples; returns (mean loss, mean F-radius).
  std::pair<double, double> step(const Dataset& data, const std::vector<std::size_t>& batch,
                                 const ScheduledValues& sv) {
    if (batch.empty()) throw Error("train: empty batch");
    ParamGrads total = ParamGrads::zeros_like(net_);
    double loss = 0.0;
    double radius = 0.0;
    // Target epsilon normalizes the F-radius even while epsilon ramps up.
    const SetLossConfig loss_cfg{sv.tau, cfg_.epsilon};
    for (std::size_t idx : batch) {
      const Vector& x = data.inputs.at(idx);
      const Vector t = data.target(idx);
      SampleStep s;
      if (cfg_.method == TrainMethod::Point) {
        s = point_sample_step(net_, x, t);
      } else {
        const Zonotope input = build_input_set(x, cfg_.input_set_mode, sv.epsilon, &net_,
                                               data.labels[idx], cfg_.fgsm_attacks);
        s = set_sample_step(net_, input, t, loss_cfg, cfg_.backend);
      }
      if (!std::isfinite(s.loss)) {
        throw NumericError("non-finite loss at sample " + std::to_string(idx) + " (epoch " +
                           std::to_string(epoch_) + ")");
      }
      total += s.grads;
      loss += s.loss;
      radius += s.f_radius;
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    total *= inv;
    const double norm = clip_gradients(total, cfg_.grad_clip_norm);
    if (!std::isfinite(norm)) {
      throw NumericError("non-finite gradient norm (epoch " + std::to_string(epoch_) + ")");
    }
    opt_.step(net_, total, sv.learning_rate);
    return {loss * inv, radius * inv};
  }

  /// Runs one full epoch (1-based numbering).
  EpochMetrics run_epoch(const Dataset& data, int epoch) {
    epoch_ = epoch;
    const auto start = std::chrono::steady_clock::now();
    const ScheduledValues sv =
        schedule(epoch, cfg_.schedule, cfg_.epsilon, cfg_.tau, cfg_.learning_rate);
    double loss = 0.0;
    double radius = 0.0;
    for (const auto& b : batches(data.size(), cfg_.batch_size, cfg_.seed, epoch)) {
      const auto [l, r] = step(data, b, sv);
      loss += l * static_cast<double>(b.size());
      radius += r * static_cast<double>(b.size());
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.epsilon = sv.epsilon;
    m.tau = sv.tau;
    m.learning_rate = sv.learning_rate;
    m.mean_set_loss = loss / static_cast<double>(data.size());
    m.mean_f_radius = radius / static_cast<double>(data.size());
    m.train_accuracy = accuracy(net_, data);
    m.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return m;
  }

private:
  Network net_;
  TrainConfig cfg_;
  Optimizer opt_;
  int epoch_ = 0;
};

struct TrainResult {
  Network network;
  std::vector<EpochMetrics> log;
};

inline TrainResult train(const Network& net, const Dataset& data, const TrainConfig& cfg,
                         const std::function<void(const EpochMetrics&)>& on_epoch = {}) {
  if (data.empty()) throw Error("train: empty dataset");
  detail::require_shape(data.input_dim() == net.input_dim(),
                        "train: dataset input dimension " + std::to_string(data.input_dim()) +
                            " does not match network input " + std::to_string(net.input_dim()));
  detail::require_shape(data.num_classes == net.output_dim(),
                        "train: dataset has " + std::to_string(data.num_classes) +
                            " classes, network outputs " + std::to_string(net.output_dim()));
  Trainer trainer(net, cfg);
  TrainResult out;
  for (int e = 1; e <= cfg.epochs; ++e) {
    out.log.push_back(trainer.run_epoch(data, e));
    if (on_epoch) on_epoch(out.log.back());
  }
  out.network = trainer.network();
  return out;
}

} // namespace zonotrain

#endif
