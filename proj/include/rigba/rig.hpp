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

#include <span>

#include "rigba/geometry.hpp"
#include "rigba/types.hpp"

namespace rigba {

// The two images captured by the two rig cameras at one time index.
// lambda holds the per-pair constraint weight assigned by the final full
// pass; it is 0 until that pass runs.
struct RigPair {
  int time_index = 0;
  ImageId image_a = kInvalidImageId;
  ImageId image_b = kInvalidImageId;
  double lambda = 0.0;
};

// Relative orientation between the two rig cameras at one time index:
// p = [axis-angle of R_b o R_a^-1 | camera-A-frame vector from center a to
// center b]. Expressing the translation in camera A's frame makes p
// invariant to the rig's placement in the world.
struct RelativePose {
  Vec6 p = Vec6::Zero();

  Vec3 rotation_part() const { return p.head<3>(); }
  Vec3 translation_part() const { return p.tail<3>(); }

  static RelativePose from_parts(const Vec3& rotation, const Vec3& translation) {
    RelativePose rp;
    rp.p.head<3>() = rotation;
    rp.p.tail<3>() = translation;
    return rp;
  }
};

// Weights of the baseline constraint. During incremental growth the global
// weight is lambda * N_p / N_t; the final full pass switches each pair to
// lambda_low or lambda depending on its deviation from the average relative
// orientation. component_scale optionally rebalances the six residual
// components and defaults to identity.
struct ConstraintWeights {
  double lambda = 500.0;
  double lambda_low = 250.0;
  double outlier_factor = 5.0;
  int n_reconstructed_pairs = 0;
  int n_total_pairs = 0;
  Vec6 component_scale = Vec6::Ones();
};

// Average components smaller than this make the multiplicative outlier test
// degenerate; such components pass unless the pair's own component exceeds
// kPerPairAbsoluteFloor.
inline constexpr double kAverageZeroEpsilon = 1e-12;
inline constexpr double kPerPairAbsoluteFloor = 1e-6;

RelativePose compute_relative_pose(const CameraPose& pose_a,
                                   const CameraPose& pose_b);

// Half the sum of squared consecutive 6-vector differences. Empty or
// single-element input yields 0.
double evaluate_baseline_cost(std::span<const RelativePose> pairs);

// Unweighted residual p_i - p_next consumed by the solver; the solver scales
// it by sqrt(effective weight) on assembly.
Vec6 baseline_residual(const RelativePose& p_i, const RelativePose& p_next);

// lambda * N_p / N_t. Throws std::domain_error when N_t == 0.
double global_weight(const ConstraintWeights& w);

// Component-wise arithmetic mean. Only meaningful for tightly clustered
// rotation parts (axis-angle averaging is not defined for widely spread
// rotations or angles near pi). Throws PreconditionError on empty input.
RelativePose average_relative_pose(std::span<const RelativePose> pairs);

// Final-pass weight switch: returns w.lambda if any component deviates from
// the average by more than outlier_factor times the average's magnitude,
// w.lambda_low otherwise (boundary inclusive in the low branch).
double per_pair_weight(const RelativePose& p_i, const RelativePose& p_avg,
                       const ConstraintWeights& w);

// Derivatives of the relative orientation w.r.t. the two poses under the
// solver's local increments ([dtheta | dcenter] per pose, rotation updated
// as exp(dtheta) * R).
struct RelativePoseJacobians {
  Mat6 pose_a = Mat6::Zero();
  Mat6 pose_b = Mat6::Zero();
};

RelativePoseJacobians relative_pose_jacobians(const CameraPose& pose_a,
                                              const CameraPose& pose_b);

}  // namespace rigba
