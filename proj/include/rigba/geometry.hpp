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

#include <optional>
#include <span>
#include <vector>

#include "rigba/rotation.hpp"
#include "rigba/types.hpp"

namespace rigba {

// Depth below this is treated as a cheirality violation.
inline constexpr double kDepthEpsilon = 1e-9;

// Exterior orientation of one image: world->camera rotation and the camera
// center in the world frame. Camera coordinates of X are R * (X - c).
struct CameraPose {
  Rotation rotation;
  Vec3 center = Vec3::Zero();

  Vec3 to_camera(const Vec3& world_point) const {
    return rotate(rotation, world_point - center);
  }
};

// Interior orientation: focal length (pixels), principal point (pixels) and
// two radial distortion coefficients applied to the squared normalized radius.
struct Intrinsics {
  double focal = 1.0;
  Vec2 principal_point = Vec2::Zero();
  Vec2 radial = Vec2::Zero();  // (k1, k2)
};

struct Landmark {
  Vec3 position = Vec3::Zero();
};

struct Observation {
  ImageId image_id = kInvalidImageId;
  LandmarkId landmark_id = kInvalidLandmarkId;
  Vec2 pixel = Vec2::Zero();
};

// p -> scale * R * p + t. scale must stay positive.
struct SimilarityTransform {
  double scale = 1.0;
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const {
    return scale * rotate(rotation, p) + translation;
  }
  SimilarityTransform inverse() const;
};

SimilarityTransform compose(const SimilarityTransform& outer,
                            const SimilarityTransform& inner);

// 1 + k1*r2 + k2*r2^2 evaluated at the squared normalized radius.
double radial_distortion_factor(const Intrinsics& k, double r2);

// Projects a camera-frame point with positive depth to pixel coordinates.
Vec2 project_camera_point(const Intrinsics& k, const Vec3& camera_point);

// Pinhole projection with radial distortion. Empty when the camera-frame
// depth falls at or below kDepthEpsilon.
std::optional<Vec2> try_project(const Intrinsics& k, const CameraPose& pose,
                                const Vec3& point);

// Same as try_project but throws CheiralityViolation instead.
Vec2 project(const Intrinsics& k, const CameraPose& pose, const Vec3& point);

// Inverts the radial distortion by fixed-point iteration, returning
// normalized (undistorted) image coordinates for a pixel.
Vec2 undistort_to_normalized(const Intrinsics& k, const Vec2& pixel);

std::vector<Vec3> apply_similarity(const SimilarityTransform& t,
                                   std::span<const Vec3> points);

}  // namespace rigba
