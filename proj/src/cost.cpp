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

#include "rigba/cost.hpp"

#include <cmath>
#include <stdexcept>

#include "rigba/errors.hpp"
#include "rigba/problem.hpp"

namespace rigba {

double huber_rho(double s, double delta) {
  if (s < 0.0) {
    throw std::domain_error("huber_rho: negative squared norm");
  }
  if (delta <= 0.0) {
    throw std::domain_error("huber_rho: delta must be positive");
  }
  const double delta2 = delta * delta;
  if (s <= delta2) {
    return s;
  }
  return 2.0 * delta * std::sqrt(s) - delta2;
}

double huber_weight(double s, double delta) {
  if (s < 0.0) {
    throw std::domain_error("huber_weight: negative squared norm");
  }
  if (delta <= 0.0) {
    throw std::domain_error("huber_weight: delta must be positive");
  }
  const double delta2 = delta * delta;
  if (s <= delta2) {
    return 1.0;
  }
  return delta / std::sqrt(s);
}

Vec2 reprojection_residual(const Observation& obs, const CameraPose& pose,
                           const Landmark& landmark, const Intrinsics& k) {
  return obs.pixel - project(k, pose, landmark.position);
}

bool evaluate_reprojection(const Vec2& pixel, const CameraPose& pose,
                           const Vec3& point, const Intrinsics& k,
                           Vec2* residual, ReprojectionJacobians* jacobians) {
  // Same value path as project(), so exact observations give exact zeros.
  const Vec3 y = pose.to_camera(point);
  if (y.z() <= kDepthEpsilon) {
    return false;
  }

  const double inv_z = 1.0 / y.z();
  const Vec2 n(y.x() * inv_z, y.y() * inv_z);
  const double r2 = n.squaredNorm();
  const double factor = radial_distortion_factor(k, r2);
  if (residual != nullptr) {
    *residual = pixel - project_camera_point(k, y);
  }
  if (jacobians == nullptr) {
    return true;
  }
  const Mat3 rot = pose.rotation.matrix();

  // d(projected)/d(n): focal * (factor*I + d(factor)/d(n) * n^T)
  const double dfactor_dr2 = k.radial.x() + 2.0 * k.radial.y() * r2;
  Eigen::Matrix2d proj_wrt_n;
  proj_wrt_n(0, 0) = k.focal * (factor + 2.0 * dfactor_dr2 * n.x() * n.x());
  proj_wrt_n(0, 1) = k.focal * (2.0 * dfactor_dr2 * n.x() * n.y());
  proj_wrt_n(1, 0) = proj_wrt_n(0, 1);
  proj_wrt_n(1, 1) = k.focal * (factor + 2.0 * dfactor_dr2 * n.y() * n.y());

  Eigen::Matrix<double, 2, 3> n_wrt_y;
  n_wrt_y << inv_z, 0.0, -y.x() * inv_z * inv_z,
             0.0, inv_z, -y.y() * inv_z * inv_z;

  const Eigen::Matrix<double, 2, 3> proj_wrt_y = proj_wrt_n * n_wrt_y;

  // residual = pixel - projected, so every block carries a leading minus.
  // y = exp(dtheta) R (X - c): dy/dtheta = -[y]x, dy/dc = -R, dy/dX = R.
  jacobians->pose.leftCols<3>() = proj_wrt_y * skew(y);
  jacobians->pose.rightCols<3>() = proj_wrt_y * rot;
  jacobians->landmark = -proj_wrt_y * rot;

  const double r4 = r2 * r2;
  jacobians->intrinsics.col(0) = -factor * n;
  jacobians->intrinsics.col(1) = -Vec2::UnitX();
  jacobians->intrinsics.col(2) = -Vec2::UnitY();
  jacobians->intrinsics.col(3) = -k.focal * r2 * n;
  jacobians->intrinsics.col(4) = -k.focal * r4 * n;
  return true;
}

ReprojectionCost evaluate_reprojection_cost(const RigProblem& problem) {
  ReprojectionCost out;
  for (const Observation& obs : problem.observations) {
    const ImageRecord* image = problem.find_image(obs.image_id);
    const LandmarkRecord* landmark = problem.find_landmark(obs.landmark_id);
    if (image == nullptr || landmark == nullptr) {
      throw PreconditionError("evaluate_reprojection_cost: dangling observation");
    }
    const CameraStream* stream = problem.find_stream(image->stream_id);
    if (stream == nullptr) {
      throw PreconditionError("evaluate_reprojection_cost: image without stream");
    }
    Vec2 residual;
    if (!evaluate_reprojection(obs.pixel, image->pose, landmark->landmark.position,
                               stream->intrinsics, &residual, nullptr)) {
      ++out.dropped_observations;
      continue;
    }
    out.cost += 0.5 * huber_rho(residual.squaredNorm(), problem.loss.huber_delta);
  }
  return out;
}

}  // namespace rigba
