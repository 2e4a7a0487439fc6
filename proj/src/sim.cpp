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

#include "rigba/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rigba/errors.hpp"
#include "rigba/rng.hpp"

namespace rigba {

namespace {

// Landmark depths along the viewing direction, in multiples of step_length.
constexpr double kMinDepthSteps = 4.0;
constexpr double kMaxDepthSteps = 25.0;
// Fraction of the half image used when sampling landmark directions, so
// anchored landmarks stay visible over the covisibility window.
constexpr double kFrustumFraction = 0.75;

struct FramePose {
  Vec3 center;
  double view_azimuth;  // world yaw of the viewing direction
};

// Camera A center and viewing azimuth for one time step.
FramePose frame_pose(const TrajectorySpec& traj, int t) {
  FramePose out;
  switch (traj.shape) {
    case TrajectoryShape::kStraight: {
      out.center = Vec3(t * traj.step_length, 0.0, traj.height);
      out.view_azimuth = traj.heading_offset_rad;
      break;
    }
    case TrajectoryShape::kLoop: {
      const double radius =
          traj.n_time_steps * traj.step_length / (2.0 * M_PI);
      const double alpha = 2.0 * M_PI * t / traj.n_time_steps;
      out.center = Vec3(radius * std::cos(alpha), radius * std::sin(alpha),
                        traj.height);
      out.view_azimuth = alpha + M_PI / 2.0 + traj.heading_offset_rad;
      break;
    }
    case TrajectoryShape::kArc: {
      const double radius =
          traj.n_time_steps * traj.step_length / traj.arc_angle_rad;
      const double alpha = traj.arc_angle_rad * t / traj.n_time_steps;
      out.center = Vec3(radius * std::cos(alpha), radius * std::sin(alpha),
                        traj.height);
      out.view_azimuth = alpha + M_PI / 2.0 + traj.heading_offset_rad;
      break;
    }
  }
  return out;
}

// World->camera rotation for a horizontal viewing azimuth, world z up,
// camera axes x right / y down / z forward.
Rotation look_rotation(double azimuth) {
  const Vec3 forward(std::cos(azimuth), std::sin(azimuth), 0.0);
  const Vec3 right(std::sin(azimuth), -std::cos(azimuth), 0.0);
  const Vec3 down(0.0, 0.0, -1.0);
  Mat3 rot;
  rot.row(0) = right;
  rot.row(1) = down;
  rot.row(2) = forward;
  return Rotation::from_matrix(rot);
}

CameraPose pose_b_from_a(const CameraPose& pose_a, const RelativePose& rig) {
  CameraPose pose_b;
  pose_b.rotation = compose(Rotation(rig.rotation_part()), pose_a.rotation);
  pose_b.center =
      pose_a.center + rotate(inverse(pose_a.rotation), rig.translation_part());
  return pose_b;
}

bool inside_image(const RigDefinition& rig, const Vec2& pixel) {
  return pixel.x() >= 0.0 && pixel.x() <= rig.image_width && pixel.y() >= 0.0 &&
         pixel.y() <= rig.image_height;
}

int covisibility_distance(int anchor, int frame_time, int n_steps, bool circular) {
  int d = std::abs(anchor - frame_time);
  if (circular) {
    d = std::min(d, n_steps - d);
  }
  return d;
}

}  // namespace

std::vector<Vec3> trajectory_centers(const RigProblem& problem, StreamId stream) {
  std::vector<const ImageRecord*> frames;
  for (const ImageRecord& image : problem.images) {
    if (image.stream_id == stream) frames.push_back(&image);
  }
  std::sort(frames.begin(), frames.end(),
            [](const ImageRecord* a, const ImageRecord* b) {
              return a->time_index < b->time_index;
            });
  std::vector<Vec3> centers;
  centers.reserve(frames.size());
  for (const ImageRecord* image : frames) centers.push_back(image->pose.center);
  return centers;
}

SceneBundle generate(const SceneSpec& spec) {
  if (spec.trajectory.n_time_steps < 2) {
    throw PreconditionError("generate: need at least 2 time steps");
  }
  if (spec.n_landmarks < 10) {
    throw PreconditionError("generate: need at least 10 landmarks");
  }
  if (spec.covisibility_window < 1) {
    throw PreconditionError("generate: covisibility window must be >= 1");
  }

  CounterRng rng(spec.noise.seed);
  const int n_steps = spec.trajectory.n_time_steps;
  const bool circular = spec.loop_closure_covisibility &&
                        spec.trajectory.shape == TrajectoryShape::kLoop;

  RigProblem truth;
  truth.add_stream({0, spec.rig.intrinsics_a});
  truth.add_stream({1, spec.rig.intrinsics_b});

  std::vector<CameraPose> poses_a(n_steps);
  for (int t = 0; t < n_steps; ++t) {
    const FramePose fp = frame_pose(spec.trajectory, t);
    poses_a[t].rotation = look_rotation(fp.view_azimuth);
    poses_a[t].center = fp.center;

    ImageRecord image_a{2 * t, 0, t, poses_a[t]};
    ImageRecord image_b{2 * t + 1, 1, t, pose_b_from_a(poses_a[t], spec.rig.relative)};
    truth.add_image(image_a);
    truth.add_image(image_b);
    truth.add_pair({t, image_a.id, image_b.id, 0.0});
  }

  if (spec.cross_anchor_period < 1) {
    throw PreconditionError("generate: cross_anchor_period must be >= 1");
  }
  if (spec.stream_a_landmark_share < 0.0 || spec.stream_a_landmark_share > 1.0) {
    throw PreconditionError("generate: stream_a_landmark_share must be in [0, 1]");
  }

  // Interleave landmark anchor streams at the requested share; each
  // stream's landmarks cycle through the time indices independently.
  const int a_per_dozen =
      static_cast<int>(std::lround(12.0 * spec.stream_a_landmark_share));
  std::vector<StreamId> anchor_streams(spec.n_landmarks);
  std::vector<int> anchors(spec.n_landmarks);
  {
    int count_per_stream[2] = {0, 0};
    for (int i = 0; i < spec.n_landmarks; ++i) {
      const StreamId stream = (i % 12) < a_per_dozen ? 0 : 1;
      anchor_streams[i] = stream;
      anchors[i] = count_per_stream[stream]++ % n_steps;
    }
  }

  // An observation exists iff the landmark anchor lies within half the
  // window of the frame (so two frames sharing a landmark are at most
  // covisibility_window apart), the landmark is matchable into the frame's
  // stream, the projection lands inside the image and the point is in
  // front of the camera.
  const auto visible_in = [&](const ImageRecord& image, const Vec3& world,
                              int anchor, LandmarkId id) {
    if (2 * covisibility_distance(anchor, image.time_index, n_steps, circular) >
        spec.covisibility_window) {
      return false;
    }
    if (image.stream_id != anchor_streams[id] &&
        anchor % spec.cross_anchor_period != 0) {
      return false;
    }
    const Intrinsics& k = truth.find_stream(image.stream_id)->intrinsics;
    const auto pixel = try_project(k, image.pose, world);
    return pixel && inside_image(spec.rig, *pixel);
  };

  // Landmarks are anchored to time indices and sampled inside the anchor
  // frame's frustum, alternating between the two cameras so each stream has
  // its own feature corridor plus the overlap region (the two video
  // sequences are self-matched and joined by overlapping views). Positions
  // are resampled until at least two images see them; a point with fewer
  // views would be underdetermined.
  const double xn_half = kFrustumFraction * 0.5 * spec.rig.image_width /
                         spec.rig.intrinsics_a.focal;
  const double yn_half = kFrustumFraction * 0.5 * spec.rig.image_height /
                         spec.rig.intrinsics_a.focal;
  std::vector<int> anchors(spec.n_landmarks);
  for (int i = 0; i < spec.n_landmarks; ++i) {
    const int anchor = (i / 2) % n_steps;
    anchors[i] = anchor;
    const CameraPose anchor_pose =
        (i % 2 == 0) ? poses_a[anchor]
                     : pose_b_from_a(poses_a[anchor], spec.rig.relative);
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      const double depth = rng.uniform(kMinDepthSteps * spec.trajectory.step_length,
                                       kMaxDepthSteps * spec.trajectory.step_length);
      const double xn = rng.uniform(-xn_half, xn_half);
      const double yn = rng.uniform(-yn_half, yn_half);
      const Vec3 camera_point(xn * depth, yn * depth, depth);
      const Vec3 world =
          anchor_pose.center + rotate(inverse(anchor_pose.rotation), camera_point);
      int views = 0;
      for (const ImageRecord& image : truth.images) {
        if (visible_in(image, world, anchor, i)) ++views;
      }
      if (views >= 2) {
        truth.add_landmark({i, Landmark{world}});
        placed = true;
      }
    }
    if (!placed) {
      throw DegenerateScene("no twice-visible position for landmark " +
                            std::to_string(i) + " anchored at time " +
                            std::to_string(anchor));
    }
  }

  for (const ImageRecord& image : truth.images) {
    const Intrinsics& k = truth.find_stream(image.stream_id)->intrinsics;
    for (int i = 0; i < spec.n_landmarks; ++i) {
      const Vec3& world = truth.landmarks[i].landmark.position;
      if (!visible_in(image, world, anchors[i], i)) {
        continue;
      }
      Vec2 measured = *try_project(k, image.pose, world);
      if (spec.noise.pixel_sigma > 0.0) {
        measured.x() += spec.noise.pixel_sigma * rng.normal();
        measured.y() += spec.noise.pixel_sigma * rng.normal();
      }
      truth.add_observation({image.id, i, measured});
    }
  }

  // Every frame must stay resectable.
  std::unordered_map<ImageId, int> obs_per_image;
  for (const Observation& obs : truth.observations) obs_per_image[obs.image_id]++;
  for (const ImageRecord& image : truth.images) {
    if (obs_per_image[image.id] < 6) {
      throw DegenerateScene("frame " + std::to_string(image.id) + " at time " +
                            std::to_string(image.time_index) + " sees only " +
                            std::to_string(obs_per_image[image.id]) +
                            " landmarks");
    }
  }

  truth.weights.n_total_pairs = n_steps;
  refresh_pair_counts(truth);

  SceneBundle bundle;
  bundle.spec = spec;
  bundle.initial = truth;

  // Pose perturbations: i.i.d. per image, or an independent random walk per
  // stream when drift injection is requested. The draw order is fixed
  // (time-major, stream A then B) in both modes. A zero sigma leaves the
  // corresponding field bitwise untouched.
  const bool perturb_rotation = spec.noise.pose_rotation_sigma > 0.0;
  const bool perturb_center = spec.noise.pose_center_sigma > 0.0;
  Rotation walk_rot[2];
  Vec3 walk_center[2] = {Vec3::Zero(), Vec3::Zero()};
  for (int t = 0; t < n_steps; ++t) {
    for (int s = 0; s < 2; ++s) {
      ImageRecord* image = bundle.initial.find_image(2 * t + s);
      if (perturb_rotation) {
        const Vec3 rot_noise = spec.noise.pose_rotation_sigma * rng.normal_vec3();
        if (spec.noise.accumulate_pose_noise) {
          walk_rot[s] = compose(Rotation(rot_noise), walk_rot[s]);
          image->pose.rotation = compose(walk_rot[s], image->pose.rotation);
        } else {
          image->pose.rotation = compose(Rotation(rot_noise), image->pose.rotation);
        }
      }
      if (perturb_center) {
        const Vec3 center_noise = spec.noise.pose_center_sigma * rng.normal_vec3();
        if (spec.noise.accumulate_pose_noise) {
          walk_center[s] += center_noise;
          image->pose.center += walk_center[s];
        } else {
          image->pose.center += center_noise;
        }
      }
    }
  }
  if (spec.noise.landmark_sigma > 0.0) {
    for (LandmarkRecord& lm : bundle.initial.landmarks) {
      lm.landmark.position += spec.noise.landmark_sigma * rng.normal_vec3();
    }
  }

  bundle.ground_truth = std::move(truth);
  return bundle;
}

SceneBundle generate(const RigDefinition& rig, const TrajectorySpec& trajectory,
                     int n_landmarks, int covisibility_window,
                     const NoiseSpec& noise) {
  SceneSpec spec;
  spec.rig = rig;
  spec.trajectory = trajectory;
  spec.n_landmarks = n_landmarks;
  spec.covisibility_window = covisibility_window;
  spec.noise = noise;
  return generate(spec);
}

}  // namespace rigba
