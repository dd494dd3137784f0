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

#ifndef ZONOTRAIN_VERIFY_HPP
#define ZONOTRAIN_VERIFY_HPP

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zonotrain/attack.hpp"
#include "zonotrain/csv.hpp"
#include "zonotrain/data.hpp"
#include "zonotrain/error.hpp"
#include "zonotrain/net.hpp"
#include "zonotrain/set_propagation.hpp"
#include "zonotrain/zonoset.hpp"

namespace zonotrain {

/// Index of the largest entry; ties go to the lowest index.
inline Index classify(const Vector& y) {
  if (y.size() == 0) throw ShapeError("classify: empty output");
  Index best = 0;
  for (Index i = 1; i < y.size(); ++i) {
    if (y(i) > y(best)) best = i;
  }
  return best;
}

/// The l-inf ball <x, eps * I>.
inline Zonotope linf_ball(const Vector& x, double epsilon) {
  if (!(epsilon >= 0.0)) throw Error("linf_ball: epsilon must be non-negative");
  if (epsilon == 0.0) return Zonotope::point(x);
  return {x, epsilon * Matrix::Identity(x.size(), x.size())};
}

/// True iff the output set misses every halfspace y_k > y_label, k != label.
inline bool output_set_robust(const Zonotope& y, Index label) {
  detail::require_shape(label >= 0 && label < y.dim(), "verify: label out of range");
  Vector dir = Vector::Zero(y.dim());
  for (Index k = 0; k < y.dim(); ++k) {
    if (k == label) continue;
    dir.setZero();
    dir(k) = 1.0;
    dir(label) = -1.0;
    if (!(support(y, dir) <= 0.0)) return false;
  }
  return true;
}

inline bool verify_robust(const Network& net, const Vector& x, Index label, double epsilon,
                          Backend backend = Backend::Zonotope) {
  const auto fwd = set_forward(net, linf_ball(x, epsilon), backend);
  return output_set_robust(fwd.output, label);
}

/// Mean width of the interval hull.
inline double interval_norm(const Zonotope& y) {
  if (y.dim() == 0) return 0.0;
  const Interval h = interval_hull(y);
  return (h.upper - h.lower).sum() / static_cast<double>(y.dim());
}

/// Binary search for the largest verifiable radius in [lo, hi].
inline double max_verified_radius(const Network& net, const Vector& x, Index label, double lo,
                                  double hi, int iters = 10, Backend backend = Backend::Zonotope) {
  if (!(hi > lo)) throw Error("max_verified_radius: hi must exceed lo");
  if (!verify_robust(net, x, label, lo, backend)) return 0.0;
  if (verify_robust(net, x, label, hi, backend)) return hi;
  double good = lo;
  double bad = hi;
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (good + bad);
    if (verify_robust(net, x, label, mid, backend)) {
      good = mid;
    } else {
      bad = mid;
    }
  }
  return good;
}

enum class VerdictStatus : std::uint8_t { Verified, Falsified, Unknown };

inline std::string_view to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Verified: return "verified";
    case VerdictStatus::Falsified: return "falsified";
    case VerdictStatus::Unknown: return "unknown";
  }
  return "unknown";
}

struct Verdict {
  Index label = 0;
  Index predicted = 0;
  bool verified = false;
  bool falsified = false; // misclassified, or PGD found a misclassifying input
  std::optional<Vector> witness;
  std::optional<Interval> output_hull;

  /// Both flags set can only come from an unsound run; reported as verified
  /// here and counted separately in Metrics::conflicts.
  [[nodiscard]] VerdictStatus status() const {
    if (verified) return VerdictStatus::Verified;
    if (falsified) return VerdictStatus::Falsified;
    return VerdictStatus::Unknown;
  }
};

struct Metrics {
  double clean = 0.0;              // correctly classified
  double falsified = 0.0;          // correctly classified and not broken by PGD
  double falsified_fraction = 0.0; // broken by PGD, misclassified samples included
  double fast_verified = 0.0;      // certified by one set propagation
  std::size_t conflicts = 0;       // samples both verified and falsified
  std::vector<Verdict> verdicts;
};

struct EvaluateOptions {
  Backend backend = Backend::Zonotope;
  bool run_attack = true;
  bool keep_witness = false;
  bool keep_hull = false;
};

inline Verdict evaluate_sample(const Network& net, const Vector& x, Index label, double epsilon,
                               const AttackConfig& attack, const EvaluateOptions& opts = {}) {
  Verdict v;
  v.label = label;
  v.predicted = classify(predict(net, x));
  const auto fwd = set_forward(net, linf_ball(x, epsilon), opts.backend);
  v.verified = output_set_robust(fwd.output, label);
  if (opts.keep_hull) v.output_hull = interval_hull(fwd.output);
  if (v.predicted != label) {
    v.falsified = true;
    if (opts.keep_witness) v.witness = x;
  } else if (opts.run_attack && epsilon > 0.0) {
    AttackConfig cfg = attack;
    cfg.epsilon = epsilon;
    const Vector adv = pgd(net, x, one_hot(label, net.output_dim()), cfg);
    if (classify(predict(net, adv)) != label) {
      v.falsified = true;
      if (opts.keep_witness) v.witness = adv;
    }
  }
  return v;
}

inline Metrics evaluate(const Network& net, const Dataset& data, double epsilon,
                        const AttackConfig& attack, const EvaluateOptions& opts = {}) {
  if (data.empty()) throw Error("evaluate: empty dataset");
  detail::require_shape(data.input_dim() == net.input_dim(),
                        "evaluate: dataset has input dimension " + std::to_string(data.input_dim()) +
                            ", model expects " + std::to_string(net.input_dim()));
  detail::require_shape(data.num_classes == net.output_dim(),
                        "evaluate: dataset has " + std::to_string(data.num_classes) +
                            " classes, model outputs " + std::to_string(net.output_dim()));
  Metrics m;
  m.verdicts.reserve(data.size());
  std::size_t clean = 0;
  std::size_t robust = 0;
  std::size_t broken = 0;
  std::size_t verified = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Verdict v = evaluate_sample(net, data.inputs[i], data.labels[i], epsilon, attack, opts);
    clean += v.predicted == v.label;
    robust += v.predicted == v.label && !v.falsified;
    broken += v.falsified;
    verified += v.verified;
    m.conflicts += v.verified && v.falsified;
    m.verdicts.push_back(std::move(v));
  }
  const auto n = static_cast<double>(data.size());
  m.clean = static_cast<double>(clean) / n;
  m.falsified = static_cast<double>(robust) / n;
  m.falsified_fraction = static_cast<double>(broken) / n;
  m.fast_verified = static_cast<double>(verified) / n;
  return m;
}

/// index,label,predicted,verdict[,max_radius]
inline CsvWriter verdict_csv(const Metrics& m, const std::vector<double>* max_radius = nullptr) {
  std::vector<std::string> header{"index", "label", "predicted", "verdict"};
  if (max_radius != nullptr) header.emplace_back("max_radius");
  CsvWriter csv(std::move(header));
  for (std::size_t i = 0; i < m.verdicts.size(); ++i) {
    const auto& v = m.verdicts[i];
    std::vector<std::string> row{std::to_string(i), std::to_string(v.label),
                                 std::to_string(v.predicted), std::string(to_string(v.status()))};
    if (max_radius != nullptr) row.push_back(format_number(max_radius->at(i)));
    csv.add_row(std::move(row));
  }
  return csv;
}

} // namespace zonotrain

#endif
