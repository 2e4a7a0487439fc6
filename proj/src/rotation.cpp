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

#include "rigba/rotation.hpp"

#include <cmath>

namespace rigba {

namespace {
constexpr double kTinyAngle = 1e-12;
}

Vec3 canonical_axis_angle(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle <= M_PI) {
    return axis_angle;
  }
  // Wrap the angle into (-pi, pi]; a negative wrapped angle flips the axis.
  double wrapped = std::fmod(angle, 2.0 * M_PI);
  if (wrapped > M_PI) {
    wrapped -= 2.0 * M_PI;
  }
  return axis_angle * (wrapped / angle);
}

Vec3 rodrigues_rotate(const Vec3& axis_angle, const Vec3& v) {
  const double theta2 = axis_angle.squaredNorm();
  if (theta2 > kTinyAngle * kTinyAngle) {
    const double theta = std::sqrt(theta2);
    const Vec3 axis = axis_angle / theta;
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);
    return v * cos_t + axis.cross(v) * sin_t + axis * (axis.dot(v) * (1.0 - cos_t));
  }
  // First-order expansion near the identity.
  return v + axis_angle.cross(v);
}

Rotation Rotation::from_matrix(const Mat3& m) {
  return from_quaternion(Eigen::Quaterniond(m));
}

Rotation Rotation::from_quaternion(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in.normalized();
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  const double vec_norm = q.vec().norm();
  if (vec_norm < kTinyAngle) {
    // angle ~ 2 * |v| / w near identity
    return Rotation(2.0 * q.vec());
  }
  const double angle = 2.0 * std::atan2(vec_norm, q.w());  // in [0, pi]
  return Rotation(q.vec() * (angle / vec_norm));
}

Mat3 Rotation::matrix() const {
  const double theta = angle();
  if (theta < kTinyAngle) {
    return Mat3::Identity() + skew(axis_angle_);
  }
  return Eigen::AngleAxisd(theta, axis_angle_ / theta).toRotationMatrix();
}

Eigen::Quaterniond Rotation::quaternion() const {
  const double theta = angle();
  if (theta < kTinyAngle) {
    return Eigen::Quaterniond(1.0, 0.5 * axis_angle_.x(), 0.5 * axis_angle_.y(),
                              0.5 * axis_angle_.z())
        .normalized();
  }
  return Eigen::Quaterniond(Eigen::AngleAxisd(theta, axis_angle_ / theta));
}

Vec3 rotate(const Rotation& r, const Vec3& v) {
  return rodrigues_rotate(r.axis_angle(), v);
}

Rotation compose(const Rotation& r1, const Rotation& r2) {
  return Rotation::from_quaternion(r1.quaternion() * r2.quaternion());
}

Rotation inverse(const Rotation& r) { return Rotation(-r.axis_angle()); }

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

namespace {

// Coefficient c in Jr_inv = I + 0.5*[phi]x + c*[phi]x^2. Valid for
// angle in [0, pi]; c = 1/theta^2 - cot(theta/2)/(2*theta).
double jacobian_inverse_coefficient(double theta) {
  if (theta < 1e-4) {
    const double t2 = theta * theta;
    return 1.0 / 12.0 + t2 / 720.0;
  }
  const double half = 0.5 * theta;
  const double cot_half = std::cos(half) / std::sin(half);
  return 1.0 / (theta * theta) - cot_half / (2.0 * theta);
}

}  // namespace

Mat3 so3_right_jacobian_inverse(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 s = skew(phi);
  return Mat3::Identity() + 0.5 * s + jacobian_inverse_coefficient(theta) * s * s;
}

Mat3 so3_left_jacobian_inverse(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 s = skew(phi);
  return Mat3::Identity() - 0.5 * s + jacobian_inverse_coefficient(theta) * s * s;
}

}  // namespace rigba
