// Copyright 2026 The rigba Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Geometry>

#include "rigba/types.hpp"

namespace rigba {

// Wraps an axis-angle vector into the canonical range: angle in [0, pi],
// flipping the axis when the wrapped angle lands in (pi, 2*pi).
Vec3 canonical_axis_angle(const Vec3& axis_angle);

// Rodrigues rotation of v by an axis-angle vector in any representation
// (no canonicalization applied).
Vec3 rodrigues_rotate(const Vec3& axis_angle, const Vec3& v);

// SO(3) rotation stored as an axis-angle 3-vector, canonicalized on
// construction. The zero vector is the identity.
class Rotation {
 public:
  Rotation() : axis_angle_(Vec3::Zero()) {}
  explicit Rotation(const Vec3& axis_angle)
      : axis_angle_(canonical_axis_angle(axis_angle)) {}

  static Rotation identity() { return Rotation(); }
  static Rotation from_matrix(const Mat3& m);
  static Rotation from_quaternion(const Eigen::Quaterniond& q);

  const Vec3& axis_angle() const { return axis_angle_; }
  double angle() const { return axis_angle_.norm(); }

  Mat3 matrix() const;
  Eigen::Quaterniond quaternion() const;

  bool operator==(const Rotation& other) const {
    return axis_angle_ == other.axis_angle_;
  }

 private:
  Vec3 axis_angle_;
};

Vec3 rotate(const Rotation& r, const Vec3& v);

// compose(r1, r2) acts as r1 after r2: rotate(compose(r1,r2), v) ==
// rotate(r1, rotate(r2, v)).
Rotation compose(const Rotation& r1, const Rotation& r2);

Rotation inverse(const Rotation& r);

Mat3 skew(const Vec3& v);

// Inverse right/left Jacobians of the SO(3) logarithm at phi. Used to
// differentiate axis-angle coordinates under multiplicative increments:
//   log(Q * exp(w)) ~ log(Q) + Jr_inv(log Q) * w
//   log(exp(w) * Q) ~ log(Q) + Jl_inv(log Q) * w
Mat3 so3_right_jacobian_inverse(const Vec3& phi);
Mat3 so3_left_jacobian_inverse(const Vec3& phi);

}  // namespace rigba
