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

#include "rigba/rig.hpp"

#include <cmath>
#include <stdexcept>

#include "rigba/errors.hpp"

namespace rigba {

RelativePose compute_relative_pose(const CameraPose& pose_a,
                                   const CameraPose& pose_b) {
  const Rotation relative = compose(pose_b.rotation, inverse(pose_a.rotation));
  const Vec3 translation = rotate(pose_a.rotation, pose_b.center - pose_a.center);
  return RelativePose::from_parts(relative.axis_angle(), translation);
}

double evaluate_baseline_cost(std::span<const RelativePose> pairs) {
  double cost = 0.0;
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    cost += (pairs[i].p - pairs[i + 1].p).squaredNorm();
  }
  return 0.5 * cost;
}

Vec6 baseline_residual(const RelativePose& p_i, const RelativePose& p_next) {
  return p_i.p - p_next.p;
}

double global_weight(const ConstraintWeights& w) {
  if (w.n_total_pairs == 0) {
    throw std::domain_error("global_weight: total pair count is zero");
  }
  return w.lambda * static_cast<double>(w.n_reconstructed_pairs) /
         static_cast<double>(w.n_total_pairs);
}

RelativePose average_relative_pose(std::span<const RelativePose> pairs) {
  if (pairs.empty()) {
    throw PreconditionError("average_relative_pose: empty pair list");
  }
  Vec6 sum = Vec6::Zero();
  for (const RelativePose& rp : pairs) {
    sum += rp.p;
  }
  RelativePose avg;
  avg.p = sum / static_cast<double>(pairs.size());
  return avg;
}

double per_pair_weight(const RelativePose& p_i, const RelativePose& p_avg,
                       const ConstraintWeights& w) {
  for (int k = 0; k < 6; ++k) {
    const double avg = p_avg.p[k];
    const double deviation = std::abs(p_i.p[k] - avg);
    bool outlier;
    if (std::abs(avg) < kAverageZeroEpsilon) {
      outlier = std::abs(p_i.p[k]) > kPerPairAbsoluteFloor;
    } else {
      outlier = deviation > w.outlier_factor * std::abs(avg);
    }
    if (outlier) {
      return w.lambda;
    }
  }
  return w.lambda_low;
}

RelativePoseJacobians relative_pose_jacobians(const CameraPose& pose_a,
                                              const CameraPose& pose_b) {
  const RelativePose rel = compute_relative_pose(pose_a, pose_b);
  const Vec3 phi = rel.rotation_part();
  const Vec3 t = rel.translation_part();
  const Mat3 rot_a = pose_a.rotation.matrix();

  RelativePoseJacobians jac;
  // Rotation rows: phi = log(exp(db) R_b R_a^T exp(-da)).
  jac.pose_a.block<3, 3>(0, 0) = -so3_right_jacobian_inverse(phi);
  jac.pose_b.block<3, 3>(0, 0) = so3_left_jacobian_inverse(phi);
  // Translation rows: t = exp(da) R_a (c_b - c_a).
  jac.pose_a.block<3, 3>(3, 0) = -skew(t);
  jac.pose_a.block<3, 3>(3, 3) = -rot_a;
  jac.pose_b.block<3, 3>(3, 3) = rot_a;
  return jac;
}

}  // namespace rigba
