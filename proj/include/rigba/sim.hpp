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

#include <cstdint>

#include "rigba/problem.hpp"
#include "rigba/rig.hpp"

namespace rigba {

// Ground-truth geometry of the two rigidly coupled cameras.
struct RigDefinition {
  RelativePose relative;  // camera B w.r.t. camera A
  Intrinsics intrinsics_a;
  Intrinsics intrinsics_b;
  double image_width = 2000.0;
  double image_height = 1500.0;
};

enum class TrajectoryShape { kLoop, kStraight, kArc };

struct TrajectorySpec {
  TrajectoryShape shape = TrajectoryShape::kLoop;
  int n_time_steps = 40;
  double step_length = 1.0;
  // Camera A viewing direction relative to the direction of travel
  // (0 = forward, pi/2 = left side).
  double heading_offset_rad = 0.0;
  double arc_angle_rad = M_PI / 2.0;  // kArc only
  double height = 1.5;                // camera height above the ground plane
};

struct NoiseSpec {
  double pixel_sigma = 0.0;          // Gaussian, pixels
  double pose_rotation_sigma = 0.0;  // radians
  double pose_center_sigma = 0.0;    // scene units
  double landmark_sigma = 0.0;       // scene units
  // When set, pose perturbations accumulate as an independent random walk
  // per camera stream (drift injection); otherwise they are i.i.d.
  bool accumulate_pose_noise = false;
  std::uint64_t seed = 0;
};

struct SceneSpec {
  RigDefinition rig;
  TrajectorySpec trajectory;
  int n_landmarks = 1000;
  int covisibility_window = 20;
  // Treat time indices circularly for covisibility on loop trajectories,
  // joining the two ends of the sequence.
  bool loop_closure_covisibility = false;
  // Landmarks anchored at time indices divisible by this period are
  // matchable across the two camera streams; all others stay tied to their
  // anchor stream. Cross-sequence feature matching succeeds only in
  // limited sections of real footage, so the two chains are welded
  // together at these anchors and free to shear in between. 1 makes every
  // anchor cross-matchable.
  int cross_anchor_period = 1;
  // Fraction of landmarks anchored in camera A's frustum; the rest anchor
  // in camera B's. Unequal shares model one sequence tracking more
  // features than the other.
  double stream_a_landmark_share = 0.5;
  NoiseSpec noise;
};

// Ground truth plus the perturbed initial estimate. Both problems share
// topology: identical ids, observations and pairs.
struct SceneBundle {
  RigProblem ground_truth;
  RigProblem initial;
  SceneSpec spec;
};

// Ground-truth camera A centers in time order (the reference trajectory).
std::vector<Vec3> trajectory_centers(const RigProblem& problem, StreamId stream);

// Deterministic scene generation: the same spec (seed included) yields a
// bitwise-identical bundle. Throws DegenerateScene when any frame sees
// fewer than 6 landmarks.
SceneBundle generate(const SceneSpec& spec);

SceneBundle generate(const RigDefinition& rig, const TrajectorySpec& trajectory,
                     int n_landmarks, int covisibility_window,
                     const NoiseSpec& noise);

}  // namespace rigba
