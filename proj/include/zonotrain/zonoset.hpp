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

#ifndef ZONOTRAIN_ZONOSET_HPP
#define ZONOTRAIN_ZONOSET_HPP

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "zonotrain/error.hpp"

namespace zonotrain {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Axis-aligned box [lower, upper].
struct Interval {
  Vector lower;
  Vector upper;

  Interval() = default;
  Interval(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    detail::require_shape(lower.size() == upper.size(), "interval: bound lengths differ");
    detail::require_shape(((upper - lower).array() >= 0.0).all(), "interval: lower > upper");
  }

  [[nodiscard]] Index dim() const { return lower.size(); }
  [[nodiscard]] Vector center() const { return 0.5 * (upper + lower); }
  [[nodiscard]] Vector radius() const { return 0.5 * (upper - lower); }
  [[nodiscard]] bool contains(const Vector& x, double tol = 0.0) const {
    return x.size() == dim() && ((x - lower).array() >= -tol).all() &&
           ((upper - x).array() >= -tol).all();
  }
};

/// Zonotope <c, G> = { c + G beta : beta in [-1, 1]^q }.
///
/// The same type carries gradient sets: the gradient of a scalar w.r.t. a
/// zonotope is a zonotope whose center is the derivative w.r.t. the center
/// and whose generators are the derivative w.r.t. the generator matrix.
/// A generator count of zero is legal and describes a point.
class Zonotope {
public:
  Zonotope() = default;

  Zonotope(Vector center, Matrix generators)
      : center_(std::move(center)), generators_(std::move(generators)) {
    if (generators_.size() == 0 && generators_.rows() != center_.size()) {
      generators_.resize(center_.size(), 0);
    }
    detail::require_shape(generators_.rows() == center_.size(),
                          "zonotope: center length " + std::to_string(center_.size()) +
                              " != generator rows " + std::to_string(generators_.rows()));
  }

  static Zonotope point(Vector c) {
    const Index n = c.size();
    return {std::move(c), Matrix(n, 0)};
  }

  static Zonotope zero(Index n, Index q) { return {Vector::Zero(n), Matrix::Zero(n, q)}; }

  [[nodiscard]] Index dim() const { return center_.size(); }
  [[nodiscard]] Index num_generators() const { return generators_.cols(); }

  [[nodiscard]] const Vector& center() const { return center_; }
  [[nodiscard]] const Matrix& generators() const { return generators_; }
  Vector& center() { return center_; }
  Matrix& generators() { return generators_; }

  [[nodiscard]] bool all_finite() const {
    return center_.allFinite() && generators_.allFinite();
  }

  /// c + G beta.
  [[nodiscard]] Vector point_at(const Vector& beta) const {
    detail::require_shape(beta.size() == num_generators(), "zonotope: beta length mismatch");
    return center_ + generators_ * beta;
  }

private:
  Vector center_;
  Matrix generators_;
};

namespace detail {

// Exactly diagonal square matrix; exits at the first off-diagonal non-zero.
inline bool is_diagonal(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (i != j && m(i, j) != 0.0) return false;
    }
  }
  return true;
}

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

} // namespace detail

/// Interval hull: c -/+ |G| 1.
inline Interval interval_hull(const Zonotope& z) {
  if (!z.all_finite()) throw NumericError("interval_hull: non-finite zonotope");
  const Vector radius = z.generators().cwiseAbs().rowwise().sum();
  return {z.center() - radius, z.center() + radius};
}

/// Z (+) I; appends diag((u - l) / 2) as n new generators.
inline Zonotope minkowski_sum(const Zonotope& z, const Interval& box) {
  detail::require_shape(z.dim() == box.dim(), "minkowski_sum: dimension mismatch");
  const Index n = z.dim();
  const Index q = z.num_generators();
  Matrix g(n, q + n);
  g.leftCols(q) = z.generators();
  g.rightCols(n) = box.radius().asDiagonal();
  return {z.center() + box.center(), std::move(g)};
}

/// W Z + b.
inline Zonotope affine_map(const Matrix& w, const Vector& b, const Zonotope& z) {
  detail::require_shape(w.cols() == z.dim(), "affine_map: W has " + std::to_string(w.cols()) +
                                                  " columns, zonotope dimension is " +
                                                  std::to_string(z.dim()));
  detail::require_shape(b.size() == w.rows(), "affine_map: bias length mismatch");
  Vector c = w * z.center() + b;
  if (detail::is_diagonal(z.generators())) {
    return {std::move(c), w * z.generators().diagonal().asDiagonal()};
  }
  return {std::move(c), w * z.generators()};
}

/// (1/n) * ||G||_F.
inline double f_radius(const Zonotope& z) {
  if (z.dim() == 0) return 0.0;
  return z.generators().norm() / static_cast<double>(z.dim());
}

/// Below this F-radius the gradient is reported as zero.
inline constexpr double kDegenerateFRadius = 1e-12;

/// Exact derivative of f_radius: <0, G / (n^2 ||Z||_F)>.
inline Zonotope f_radius_gradient(const Zonotope& z) {
  const double r = f_radius(z);
  if (r < kDegenerateFRadius) return Zonotope::zero(z.dim(), z.num_generators());
  const double n = static_cast<double>(z.dim());
  return {Vector::Zero(z.dim()), z.generators() / (n * n * r)};
}

/// c1 c2^T + G1 G2^T.
inline Matrix outer_product(const Zonotope& a, const Zonotope& b) {
  detail::require_shape(a.num_generators() == b.num_generators(),
                        "outer_product: generator counts differ (" +
                            std::to_string(a.num_generators()) + " vs " +
                            std::to_string(b.num_generators()) + ")");
  Matrix out = a.center() * b.center().transpose();
  if (detail::is_diagonal(b.generators())) {
    out.noalias() += a.generators() * b.generators().diagonal().asDiagonal();
  } else {
    out.noalias() += a.generators() * b.generators().transpose();
  }
  return out;
}

/// sup_{z in Z} a^T z = a^T c + sum_j |a^T G_j|.
inline double support(const Zonotope& z, const Vector& direction) {
  detail::require_shape(direction.size() == z.dim(), "support: direction length mismatch");
  return direction.dot(z.center()) + (direction.transpose() * z.generators()).cwiseAbs().sum();
}

/// Entry-wise sum (not the Minkowski sum).
inline Zonotope add(const Zonotope& a, const Zonotope& b) {
  detail::require_shape(a.dim() == b.dim() && a.num_generators() == b.num_generators(),
                        "add: zonotope shapes differ");
  return {a.center() + b.center(), a.generators() + b.generators()};
}

inline Zonotope scale(const Zonotope& z, double s) {
  return {s * z.center(), s * z.generators()};
}

} // namespace zonotrain

#endif
