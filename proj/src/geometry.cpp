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

#include "rigba/geometry.hpp"

#include "rigba/errors.hpp"

namespace rigba {

SimilarityTransform SimilarityTransform::inverse() const {
  SimilarityTransform inv;
  inv.scale = 1.0 / scale;
  inv.rotation = rigba::inverse(rotation);
  inv.translation = -inv.scale * rotate(inv.rotation, translation);
  return inv;
}

SimilarityTransform compose(const SimilarityTransform& outer,
                            const SimilarityTransform& inner) {
  SimilarityTransform out;
  out.scale = outer.scale * inner.scale;
  out.rotation = compose(outer.rotation, inner.rotation);
  out.translation =
      outer.scale * rotate(outer.rotation, inner.translation) + outer.translation;
  return out;
}

double radial_distortion_factor(const Intrinsics& k, double r2) {
  return 1.0 + r2 * (k.radial.x() + r2 * k.radial.y());
}

Vec2 project_camera_point(const Intrinsics& k, const Vec3& camera_point) {
  const double inv_depth = 1.0 / camera_point.z();
  const Vec2 normalized(camera_point.x() * inv_depth, camera_point.y() * inv_depth);
  const double factor = radial_distortion_factor(k, normalized.squaredNorm());
  return k.focal * factor * normalized + k.principal_point;
}

std::optional<Vec2> try_project(const Intrinsics& k, const CameraPose& pose,
                                const Vec3& point) {
  const Vec3 camera_point = pose.to_camera(point);
  if (camera_point.z() <= kDepthEpsilon) {
    return std::nullopt;
  }
  return project_camera_point(k, camera_point);
}

Vec2 project(const Intrinsics& k, const CameraPose& pose, const Vec3& point) {
  const auto pixel = try_project(k, pose, point);
  if (!pixel) {
    throw CheiralityViolation();
  }
  return *pixel;
}

Vec2 undistort_to_normalized(const Intrinsics& k, const Vec2& pixel) {
  const Vec2 distorted = (pixel - k.principal_point) / k.focal;
  Vec2 normalized = distorted;
  for (int i = 0; i < 25; ++i) {
    normalized = distorted / radial_distortion_factor(k, normalized.squaredNorm());
  }
  return normalized;
}

std::vector<Vec3> apply_similarity(const SimilarityTransform& t,
                                   std::span<const Vec3> points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const Vec3& p : points) {
    out.push_back(t.apply(p));
  }
  return out;
}

}  // namespace rigba
