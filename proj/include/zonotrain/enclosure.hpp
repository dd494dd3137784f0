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

#ifndef ZONOTRAIN_ENCLOSURE_HPP
#define ZONOTRAIN_ENCLOSURE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "zonotrain/error.hpp"
#include "zonotrain/net.hpp"
#include "zonotrain/zonoset.hpp"

namespace zonotrain {

/// Intervals narrower than this use the tangent at the midpoint and carry no
/// enclosure gradients.
inline constexpr double kDegenerateWidth = 1e-9;

/// Where an approximation error is attained.
enum class CandidateKind : std::uint8_t { Interior, AtLower, AtUpper };

enum class ErrorSide : std::uint8_t { Lower, Upper };

/// Chord slope of the activation over [l, u].
inline double linear_slope(double l, double u, ActivationKind kind) {
  if (u - l < kDegenerateWidth) return activation::derivative(kind, 0.5 * (l + u));
  return (activation::value(kind, u) - activation::value(kind, l)) / (u - l);
}

struct ApproxErrors {
  double lower = 0.0;
  double upper = 0.0;
  double arg_lower = 0.0;
  double arg_upper = 0.0;
  CandidateKind kind_lower = CandidateKind::AtLower;
  CandidateKind kind_upper = CandidateKind::AtLower;
};

namespace detail {

// Stationary points of phi(x) - slope * x; at most two.
struct InteriorCandidates {
  std::array<double, 2> x{};
  int count = 0;
};

inline InteriorCandidates interior_candidates(double slope, ActivationKind kind) {
  InteriorCandidates out;
  switch (kind) {
    case ActivationKind::Relu:
      out.x[0] = 0.0;
      out.count = 1;
      break;
    case ActivationKind::Tanh:
    case ActivationKind::Sigmoid: {
      const bool is_tanh = kind == ActivationKind::Tanh;
      double radicand = is_tanh ? 1.0 - slope : 1.0 - 4.0 * slope;
      if (radicand >= 1.0) break; // slope <= 0: no stationary point
      radicand = std::max(radicand, 0.0);
      const double a = (is_tanh ? 1.0 : 2.0) * std::atanh(std::sqrt(radicand));
      out.x = {-a, a};
      out.count = a == 0.0 ? 1 : 2;
      break;
    }
  }
  return out;
}

} // namespace detail

/// Extreme values of phi(x) - slope * x over [l, u], evaluated on the finite
/// candidate set {stationary points} u {l, u}. Ties prefer interior
/// candidates, then l, then u.
inline ApproxErrors approx_errors(double slope, double l, double u, ActivationKind kind) {
  ApproxErrors out;
  bool first = true;
  auto consider = [&](double x, CandidateKind ck) {
    const double d = activation::value(kind, x) - slope * x;
    if (first || d < out.lower) {
      out.lower = d;
      out.arg_lower = x;
      out.kind_lower = ck;
    }
    if (first || d > out.upper) {
      out.upper = d;
      out.arg_upper = x;
      out.kind_upper = ck;
    }
    first = false;
  };
  if (u - l >= kDegenerateWidth) {
    const auto interior = detail::interior_candidates(slope, kind);
    for (int i = 0; i < interior.count; ++i) {
      if (interior.x[i] >= l && interior.x[i] <= u) consider(interior.x[i], CandidateKind::Interior);
    }
  } else {
    consider(0.5 * (l + u), CandidateKind::Interior);
  }
  consider(l, CandidateKind::AtLower);
  consider(u, CandidateKind::AtUpper);
  return out;
}

/// Per-neuron cache of one image enclosure, kept for the backward pass.
struct EnclosureRecord {
  ActivationKind kind = ActivationKind::Relu;
  Index input_generators = 0;
  Vector lower, upper, slope, err_lower, err_upper, arg_lower, arg_upper;
  std::vector<CandidateKind> kind_lower, kind_upper;

  [[nodiscard]] Index size() const { return slope.size(); }
  [[nodiscard]] bool degenerate(Index i) const { return upper(i) - lower(i) < kDegenerateWidth; }

  void resize(Index n) {
    for (Vector* v : {&lower, &upper, &slope, &err_lower, &err_upper, &arg_lower, &arg_upper}) {
      v->resize(n);
    }
    kind_lower.resize(static_cast<std::size_t>(n));
    kind_upper.resize(static_cast<std::size_t>(n));
  }

  /// Fills neuron i from its bounds.
  void fill(Index i, double l, double u) {
    lower(i) = l;
    upper(i) = u;
    slope(i) = linear_slope(l, u, kind);
    const auto e = approx_errors(slope(i), l, u, kind);
    err_lower(i) = e.lower;
    err_upper(i) = e.upper;
    arg_lower(i) = e.arg_lower;
    arg_upper(i) = e.arg_upper;
    kind_lower[static_cast<std::size_t>(i)] = e.kind_lower;
    kind_upper[static_cast<std::size_t>(i)] = e.kind_upper;
  }
};

/// Sensitivities of slope and both errors w.r.t. the neuron's bounds l and u.
/// All zero on degenerate intervals.
struct BoundPartials {
  double slope_l = 0.0, slope_u = 0.0;
  double lower_l = 0.0, lower_u = 0.0;
  double upper_l = 0.0, upper_u = 0.0;
};

inline BoundPartials bound_partials(const EnclosureRecord& rec, Index i) {
  BoundPartials p;
  if (rec.degenerate(i)) return p;
  const double l = rec.lower(i);
  const double u = rec.upper(i);
  const double lambda = rec.slope(i);
  const double dphi_l = activation::derivative(rec.kind, l);
  const double dphi_u = activation::derivative(rec.kind, u);
  p.slope_u = (dphi_u - lambda) / (u - l);
  p.slope_l = (lambda - dphi_l) / (u - l);

  // d = phi(x*) - lambda x*; interior points satisfy phi'(x*) = lambda, so
  // only the -x* dlambda term survives there.
  auto error_partials = [&](CandidateKind ck, double x, double& wrt_l, double& wrt_u) {
    switch (ck) {
      case CandidateKind::Interior:
        wrt_l = -x * p.slope_l;
        wrt_u = -x * p.slope_u;
        break;
      case CandidateKind::AtLower:
        wrt_l = (dphi_l - lambda) - l * p.slope_l;
        wrt_u = -l * p.slope_u;
        break;
      case CandidateKind::AtUpper:
        wrt_l = -u * p.slope_l;
        wrt_u = (dphi_u - lambda) - u * p.slope_u;
        break;
    }
  };
  error_partials(rec.kind_lower[static_cast<std::size_t>(i)], rec.arg_lower(i), p.lower_l,
                 p.lower_u);
  error_partials(rec.kind_upper[static_cast<std::size_t>(i)], rec.arg_upper(i), p.upper_l,
                 p.upper_u);
  return p;
}

struct Enclosure {
  Zonotope output;
  EnclosureRecord record;
};

/// Encloses phi(Z) for an element-wise activation: slope diag(lambda) on the
/// input set, the error midpoint as offset, and one diagonal generator per
/// neuron holding the error half-width.
inline Enclosure enclose_layer(const Zonotope& input, ActivationKind kind) {
  const Index n = input.dim();
  const Index p = input.num_generators();
  const Interval bounds = interval_hull(input);
  Enclosure out;
  auto& rec = out.record;
  rec.kind = kind;
  rec.input_generators = p;
  rec.resize(n);
  for (Index i = 0; i < n; ++i) rec.fill(i, bounds.lower(i), bounds.upper(i));

  const Vector mid = 0.5 * (rec.err_upper + rec.err_lower);
  Vector center = rec.slope.cwiseProduct(input.center()) + mid;
  Matrix gens(n, p + n);
  gens.leftCols(p) = rec.slope.asDiagonal() * input.generators();
  gens.rightCols(n) = (0.5 * (rec.err_upper - rec.err_lower)).asDiagonal();
  out.output = Zonotope(std::move(center), std::move(gens));
  return out;
}

namespace detail {

// Gradient zonotope over (c_i, G_(i,.)) of a quantity with bound partials
// (wrt_l, wrt_u): dl/dc = du/dc = 1, du/dG = sign(G), dl/dG = -sign(G).
inline Zonotope row_gradient(const Zonotope& input, Index i, double wrt_l, double wrt_u) {
  const Index p = input.num_generators();
  Matrix g(1, p);
  for (Index j = 0; j < p; ++j) g(0, j) = detail::sign(input.generators()(i, j)) * (wrt_u - wrt_l);
  Vector c(1);
  c(0) = wrt_l + wrt_u;
  return {std::move(c), std::move(g)};
}

} // namespace detail

/// Gradient of lambda_i w.r.t. the i-th input center entry and generator row.
inline Zonotope slope_gradient(const EnclosureRecord& rec, Index i, const Zonotope& input) {
  const auto p = bound_partials(rec, i);
  return detail::row_gradient(input, i, p.slope_l, p.slope_u);
}

/// Gradient of the lower or upper approximation error of neuron i.
inline Zonotope error_gradient(const EnclosureRecord& rec, Index i, ErrorSide side,
                               const Zonotope& input) {
  const auto p = bound_partials(rec, i);
  return side == ErrorSide::Lower ? detail::row_gradient(input, i, p.lower_l, p.lower_u)
                                  : detail::row_gradient(input, i, p.upper_l, p.upper_u);
}

/// Pulls a gradient set through an image enclosure. `grad_out` refers to the
/// enclosure output (p + n generators); the result refers to the input (p).
inline Zonotope backprop_enclosure(const EnclosureRecord& rec, const Zonotope& input,
                                   const Zonotope& grad_out) {
  const Index n = input.dim();
  const Index p = input.num_generators();
  detail::require_shape(rec.size() == n && rec.input_generators == p,
                        "backprop_enclosure: record does not match input set");
  detail::require_shape(grad_out.dim() == n && grad_out.num_generators() == p + n,
                        "backprop_enclosure: gradient set has " +
                            std::to_string(grad_out.num_generators()) + " generators, expected " +
                            std::to_string(p + n));
  const Vector& c = input.center();
  const Matrix& g = input.generators();
  const Vector& dc = grad_out.center();
  const auto dg_main = grad_out.generators().leftCols(p);

  // s_i = c'_i c_i + G'_(i,[p]) G_(i,.)^T, the weight of dlambda_i.
  const Vector s = dc.cwiseProduct(c) + dg_main.cwiseProduct(g).rowwise().sum();

  Vector out_c(n);
  Matrix out_g = rec.slope.asDiagonal() * dg_main;
  for (Index i = 0; i < n; ++i) {
    const auto bp = bound_partials(rec, i);
    const double err_gen = grad_out.generators()(i, p + i);
    const double w_upper = 0.5 * (dc(i) + err_gen);
    const double w_lower = 0.5 * (dc(i) - err_gen);
    const double a_l = s(i) * bp.slope_l + w_upper * bp.upper_l + w_lower * bp.lower_l;
    const double a_u = s(i) * bp.slope_u + w_upper * bp.upper_u + w_lower * bp.lower_u;
    out_c(i) = rec.slope(i) * dc(i) + a_l + a_u;
    const double spread = a_u - a_l;
    if (spread != 0.0) {
      for (Index j = 0; j < p; ++j) out_g(i, j) += detail::sign(g(i, j)) * spread;
    }
  }
  return {std::move(out_c), std::move(out_g)};
}

// ---------------------------------------------------------------------------
// Parallel-line enclosure of s-shaped activations, kept for comparison.

struct SinghEnclosure {
  double slope = 0.0;
  double offset = 0.0;
  double error = 0.0;
};

inline SinghEnclosure singh_enclose(double l, double u, ActivationKind kind) {
  if (kind == ActivationKind::Relu) {
    throw Error("singh_enclose: only defined for s-shaped activations (tanh, sigmoid)");
  }
  const double fl = activation::value(kind, l);
  const double fu = activation::value(kind, u);
  SinghEnclosure s;
  s.slope = std::min(activation::derivative(kind, l), activation::derivative(kind, u));
  s.offset = 0.5 * (fu + fl - s.slope * (u + l));
  s.error = 0.5 * (fu - fl - s.slope * (u - l));
  return s;
}

/// Integrated approximation error (u - l) * (d_upper - d_lower).
inline double enclosure_area(double d_lower, double d_upper, double l, double u) {
  return (u - l) * (d_upper - d_lower);
}

} // namespace zonotrain

#endif
