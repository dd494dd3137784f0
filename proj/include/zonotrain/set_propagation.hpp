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

#ifndef ZONOTRAIN_SET_PROPAGATION_HPP
#define ZONOTRAIN_SET_PROPAGATION_HPP

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "zonotrain/enclosure.hpp"
#include "zonotrain/error.hpp"
#include "zonotrain/net.hpp"
#include "zonotrain/zonoset.hpp"

namespace zonotrain {

/// How sets are pushed through the network.
///  - Zonotope: every image enclosure appends its error generators.
///  - ZonotopeIntervalErrors: error bands travel as one interval radius,
///    mapped by |W| and lambda, and are Minkowski-added at the output.
///  - Ibp: plain interval bound propagation.
enum class Backend : std::uint8_t { Zonotope, ZonotopeIntervalErrors, Ibp };

inline std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::Zonotope: return "zono";
    case Backend::ZonotopeIntervalErrors: return "zono-int-err";
    case Backend::Ibp: return "ibp";
  }
  return "?";
}

inline Backend parse_backend(std::string_view name) {
  if (name == "zono") return Backend::Zonotope;
  if (name == "zono-int-err") return Backend::ZonotopeIntervalErrors;
  if (name == "ibp") return Backend::Ibp;
  throw FormatError("unknown backend '" + std::string(name) + "' (expected zono, zono-int-err, ibp)");
}

struct ZonotopeTrace {
  std::vector<Zonotope> hidden;                       // H_0 .. H_K
  std::vector<std::optional<EnclosureRecord>> records; // per layer
};

struct IntervalErrorTrace {
  std::vector<Zonotope> hidden; // input-generator part only
  std::vector<Vector> errors;   // accumulated error radius per layer output
  std::vector<std::optional<EnclosureRecord>> records;
};

struct IbpTrace {
  std::vector<Vector> centers;
  std::vector<Vector> radii;
};

struct ForwardTrace {
  Backend backend = Backend::Zonotope;
  std::variant<ZonotopeTrace, IntervalErrorTrace, IbpTrace> data;
};

struct SetForward {
  Zonotope output;
  ForwardTrace trace;
};

namespace detail {

inline SetForward forward_zonotope(const Network& net, const Zonotope& input) {
  ZonotopeTrace tr;
  tr.hidden.reserve(net.size() + 1);
  tr.records.resize(net.size());
  tr.hidden.push_back(input);
  for (std::size_t k = 0; k < net.size(); ++k) {
    const Zonotope& h = tr.hidden.back();
    if (const auto* lin = std::get_if<Linear>(&net.layer(k))) {
      tr.hidden.push_back(affine_map(lin->weights, lin->bias, h));
    } else {
      auto enc = enclose_layer(h, std::get<Activation>(net.layer(k)).kind);
      tr.records[k] = std::move(enc.record);
      tr.hidden.push_back(std::move(enc.output));
    }
  }
  SetForward out{tr.hidden.back(), {Backend::Zonotope, {}}};
  out.trace.data = std::move(tr);
  return out;
}

inline Zonotope with_error_generators(const Zonotope& z, const Vector& errors) {
  const Index n = z.dim();
  const Index q = z.num_generators();
  Matrix g(n, q + n);
  g.leftCols(q) = z.generators();
  g.rightCols(n) = errors.asDiagonal();
  return {z.center(), std::move(g)};
}

inline SetForward forward_interval_errors(const Network& net, const Zonotope& input) {
  IntervalErrorTrace tr;
  tr.hidden.reserve(net.size() + 1);
  tr.errors.reserve(net.size() + 1);
  tr.records.resize(net.size());
  tr.hidden.push_back(input);
  tr.errors.push_back(Vector::Zero(input.dim()));
  for (std::size_t k = 0; k < net.size(); ++k) {
    const Zonotope& h = tr.hidden.back();
    const Vector& e = tr.errors.back();
    if (const auto* lin = std::get_if<Linear>(&net.layer(k))) {
      Zonotope next = affine_map(lin->weights, lin->bias, h);
      Vector next_e = lin->weights.cwiseAbs() * e;
      tr.hidden.push_back(std::move(next));
      tr.errors.push_back(std::move(next_e));
    } else {
      EnclosureRecord rec;
      rec.kind = std::get<Activation>(net.layer(k)).kind;
      rec.input_generators = h.num_generators();
      rec.resize(h.dim());
      const Vector radius = h.generators().cwiseAbs().rowwise().sum() + e;
      for (Index i = 0; i < h.dim(); ++i) {
        rec.fill(i, h.center()(i) - radius(i), h.center()(i) + radius(i));
      }
      Vector c = rec.slope.cwiseProduct(h.center()) + 0.5 * (rec.err_upper + rec.err_lower);
      Matrix g = rec.slope.asDiagonal() * h.generators();
      Vector next_e = rec.slope.cwiseProduct(e) + 0.5 * (rec.err_upper - rec.err_lower);
      tr.records[k] = std::move(rec);
      tr.hidden.emplace_back(std::move(c), std::move(g));
      tr.errors.push_back(std::move(next_e));
    }
  }
  SetForward out{with_error_generators(tr.hidden.back(), tr.errors.back()),
                 {Backend::ZonotopeIntervalErrors, {}}};
  out.trace.data = std::move(tr);
  return out;
}

inline SetForward forward_ibp(const Network& net, const Zonotope& input) {
  IbpTrace tr;
  tr.centers.reserve(net.size() + 1);
  tr.radii.reserve(net.size() + 1);
  tr.centers.push_back(input.center());
  tr.radii.push_back(input.generators().cwiseAbs().rowwise().sum());
  for (std::size_t k = 0; k < net.size(); ++k) {
    const Vector& m = tr.centers.back();
    const Vector& r = tr.radii.back();
    if (const auto* lin = std::get_if<Linear>(&net.layer(k))) {
      Vector next_m = lin->weights * m + lin->bias;
      Vector next_r = lin->weights.cwiseAbs() * r;
      tr.centers.push_back(std::move(next_m));
      tr.radii.push_back(std::move(next_r));
    } else {
      const auto kind = std::get<Activation>(net.layer(k)).kind;
      const Vector lo = activation::apply(kind, m - r);
      const Vector hi = activation::apply(kind, m + r);
      tr.centers.push_back(0.5 * (hi + lo));
      tr.radii.push_back(0.5 * (hi - lo));
    }
  }
  SetForward out{Zonotope(tr.centers.back(), Matrix(tr.radii.back().asDiagonal())),
                 {Backend::Ibp, {}}};
  out.trace.data = std::move(tr);
  return out;
}

} // namespace detail

/// Encloses N(input) layer by layer: affine maps for linear layers and image
/// enclosures for activation layers.
inline SetForward set_forward(const Network& net, const Zonotope& input,
                              Backend backend = Backend::Zonotope) {
  detail::require_shape(input.dim() == net.input_dim(),
                        "set_forward: input set has dimension " + std::to_string(input.dim()) +
                            ", network expects " + std::to_string(net.input_dim()));
  switch (backend) {
    case Backend::Zonotope: return detail::forward_zonotope(net, input);
    case Backend::ZonotopeIntervalErrors: return detail::forward_interval_errors(net, input);
    case Backend::Ibp: return detail::forward_ibp(net, input);
  }
  throw Error("set_forward: unknown backend");
}

// ---------------------------------------------------------------------------
// Backward passes. Each returns the parameter gradients of a scalar loss whose
// gradient w.r.t. the output set is `output_grad`.

/// Set-based backpropagation for the full zonotope backend.
inline ParamGrads set_backward(const Network& net, const ForwardTrace& trace,
                               const Zonotope& output_grad) {
  const auto* tr = std::get_if<ZonotopeTrace>(&trace.data);
  if (trace.backend != Backend::Zonotope || tr == nullptr) {
    throw Error("set_backward: requires a trace from the zono backend, got '" +
                std::string(to_string(trace.backend)) + "'");
  }
  detail::require_shape(tr->hidden.size() == net.size() + 1, "set_backward: trace/network mismatch");
  const Zonotope& out = tr->hidden.back();
  detail::require_shape(output_grad.dim() == out.dim() &&
                            output_grad.num_generators() == out.num_generators(),
                        "set_backward: output gradient shape mismatch");

  ParamGrads grads;
  grads.weights.resize(net.size());
  grads.biases.resize(net.size());
  Zonotope g = output_grad;
  for (std::size_t k = net.size(); k-- > 0;) {
    const Zonotope& h_prev = tr->hidden[k];
    if (const auto* lin = std::get_if<Linear>(&net.layer(k))) {
      grads.weights[k] = outer_product(g, h_prev);
      grads.biases[k] = g.center();
      if (k > 0) g = Zonotope(lin->weights.transpose() * g.center(),
                              lin->weights.transpose() * g.generators());
    } else if (k > 0) {
      g = backprop_enclosure(*tr->records[k], h_prev, g);
    }
  }
  return grads;
}

namespace detail {

inline ParamGrads backward_interval_errors(const Network& net, const IntervalErrorTrace& tr,
                                           const Zonotope& output_grad) {
  const Zonotope& out = tr.hidden.back();
  const Index n = out.dim();
  const Index q = out.num_generators();
  require_shape(output_grad.dim() == n && output_grad.num_generators() == q + n,
                "interval-errors backward: output gradient shape mismatch");
  Vector dc = output_grad.center();
  Matrix dg = output_grad.generators().leftCols(q);
  Vector de = output_grad.generators().rightCols(n).diagonal();

  ParamGrads grads;
  grads.weights.resize(net.size());
  grads.biases.resize(net.size());
  for (std::size_t k = net.size(); k-- > 0;) {
    const Zonotope& h = tr.hidden[k];
    const Vector& e = tr.errors[k];
    if (const auto* lin = std::get_if<Linear>(&net.layer(k))) {
      Matrix gw = outer_product(Zonotope(dc, dg), h);
      gw += lin->weights.unaryExpr([](double v) { return sign(v); })
                .cwiseProduct(de * e.transpose());
      grads.weights[k] = std::move(gw);
      grads.biases[k] = dc;
      if (k > 0) {
        dc = lin->weights.transpose() * dc;
        dg = lin->weights.transpose() * dg;
        de = lin->weights.cwiseAbs().transpose() * de;
      }
    } else if (k > 0) {
      const auto& rec = *tr.records[k];
      const Matrix& g = h.generators();
      const Vector s = dc.cwiseProduct(h.center()) + dg.cwiseProduct(g).rowwise().sum() +
                       de.cwiseProduct(e);
      Vector next_dc(h.dim());
      Vector next_de(h.dim());
      Matrix next_dg = rec.slope.asDiagonal() * dg;
      for (Index i = 0; i < h.dim(); ++i) {
        const auto bp = bound_partials(rec, i);
        const double w_upper = 0.5 * (dc(i) + de(i));
        const double w_lower = 0.5 * (dc(i) - de(i));
        const double a_l = s(i) * bp.slope_l + w_upper * bp.upper_l + w_lower * bp.lower_l;
        const double a_u = s(i) * bp.slope_u + w_upper * bp.upper_u + w_lower * bp.lower_u;
        next_dc(i) = rec.slope(i) * dc(i) + a_l + a_u;
        next_de(i) = rec.slope(i) * de(i) + (a_u - a_l);
        const double spread = a_u - a_l;
        if (spread != 0.0) {
          for (Index j = 0; j < g.cols(); ++j) next_dg(i, j) += sign(g(i, j)) * spread;
        }
      }
      dc = std::move(next_dc);
      dg = std::move(next_dg);
      de = std::move(next_de);
    }
  }
  return grads;
}

inline ParamGrads backward_ibp(const Network& net, const IbpTrace& tr, const Zonotope& output_grad) {
  const Index n = tr.centers.back().size();
  require_shape(output_grad.dim() == n && output_grad.num_generators() == n,
                "ibp backward: output gradient shape mismatch");
  Vector dm = output_grad.center();
  Vector dr = output_grad.generators().diagonal();
  ParamGrads grads;
  grads.weights.resize(net.size());
  grads.biases.resize(net.size());
  for (std::size_t k = net.size(); k-- > 0;) {
    const Vector& m = tr.centers[k];
    const Vector& r = tr.radii[k];
    if (const auto* lin = std::get_if<Linear>(&net.layer(k))) {
      Matrix gw = dm * m.transpose();
      gw += lin->weights.unaryExpr([](double v) { return sign(v); })
                .cwiseProduct(dr * r.transpose());
      grads.weights[k] = std::move(gw);
      grads.biases[k] = dm;
      if (k > 0) {
        dm = lin->weights.transpose() * dm;
        dr = lin->weights.cwiseAbs().transpose() * dr;
      }
    } else if (k > 0) {
      const auto kind = std::get<Activation>(net.layer(k)).kind;
      Vector next_dm(m.size());
      Vector next_dr(m.size());
      for (Index i = 0; i < m.size(); ++i) {
        const double du = activation::derivative(kind, m(i) + r(i)) * 0.5 * (dm(i) + dr(i));
        const double dl = activation::derivative(kind, m(i) - r(i)) * 0.5 * (dm(i) - dr(i));
        next_dm(i) = du + dl;
        next_dr(i) = du - dl;
      }
      dm = std::move(next_dm);
      dr = std::move(next_dr);
    }
  }
  return grads;
}

} // namespace detail

/// Backward pass matching whichever backend produced the trace.
inline ParamGrads backward(const Network& net, const ForwardTrace& trace,
                           const Zonotope& output_grad) {
  switch (trace.backend) {
    case Backend::Zonotope: return set_backward(net, trace, output_grad);
    case Backend::ZonotopeIntervalErrors:
      return detail::backward_interval_errors(net, std::get<IntervalErrorTrace>(trace.data),
                                              output_grad);
    case Backend::Ibp:
      return detail::backward_ibp(net, std::get<IbpTrace>(trace.data), output_grad);
  }
  throw Error("backward: unknown backend");
}

} // namespace zonotrain

#endif
