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

#include <unordered_map>
#include <vector>

#include "rigba/geometry.hpp"
#include "rigba/rig.hpp"
#include "rigba/types.hpp"

namespace rigba {

// One physical camera; its interior orientation is shared by every image it
// captured.
struct CameraStream {
  StreamId id = kInvalidStreamId;
  Intrinsics intrinsics;
};

struct ImageRecord {
  ImageId id = kInvalidImageId;
  StreamId stream_id = kInvalidStreamId;
  int time_index = 0;
  CameraPose pose;
};

struct LandmarkRecord {
  LandmarkId id = kInvalidLandmarkId;
  Landmark landmark;
};

struct RobustLossConfig {
  double huber_delta = 1.0;  // pixels
};

// Gauge anchors chosen by fix_gauge: the anchor image's pose is held
// constant and the scale-image center moves on a sphere of radius
// baseline_distance around the anchor's center.
struct GaugeConfig {
  bool fixed = false;
  ImageId anchor_image = kInvalidImageId;
  ImageId scale_image = kInvalidImageId;
  double baseline_distance = 0.0;
};

// Full optimization state: two camera streams, posed images, landmarks,
// observations, rig pairs and constraint weights.
class RigProblem {
 public:
  std::vector<CameraStream> streams;
  std::vector<ImageRecord> images;
  std::vector<LandmarkRecord> landmarks;
  std::vector<Observation> observations;
  std::vector<RigPair> pairs;  // kept sorted by time_index
  ConstraintWeights weights;
  RobustLossConfig loss;
  GaugeConfig gauge;

  void add_stream(CameraStream stream);
  void add_image(ImageRecord image);
  void add_landmark(LandmarkRecord landmark);
  void add_observation(Observation obs) { observations.push_back(obs); }
  void add_pair(RigPair pair);  // keeps pairs ordered by time_index

  const CameraStream* find_stream(StreamId id) const;
  CameraStream* find_stream(StreamId id);
  const ImageRecord* find_image(ImageId id) const;
  ImageRecord* find_image(ImageId id);
  const LandmarkRecord* find_landmark(LandmarkId id) const;
  LandmarkRecord* find_landmark(LandmarkId id);

  int image_index(ImageId id) const;      // -1 when absent
  int landmark_index(LandmarkId id) const;
  int stream_index(StreamId id) const;

  // Rebuilds the id lookup tables after direct container edits.
  void rebuild_index();

 private:
  std::unordered_map<StreamId, std::size_t> stream_index_;
  std::unordered_map<ImageId, std::size_t> image_index_;
  std::unordered_map<LandmarkId, std::size_t> landmark_index_;
};

// Recomputes N_p as the number of pairs whose both images are present;
// N_t is raised to N_p if it lagged behind but never lowered (the total
// refers to the dataset, not the reconstructed subset).
void refresh_pair_counts(RigProblem& problem);

// Pairs whose both images are posed, in time order.
std::vector<const RigPair*> reconstructed_pairs(const RigProblem& problem);

// Relative orientations of the reconstructed pairs, in time order.
std::vector<RelativePose> reconstructed_relative_poses(const RigProblem& problem);

// Maps the whole reconstruction through a similarity: centers and landmarks
// transform, rotations absorb the rotation part. Reprojection residuals are
// invariant under this map.
void apply_similarity_to_problem(RigProblem& problem,
                                 const SimilarityTransform& t);

// Exact content equality over streams, images, landmarks, observations and
// pairs (weights/loss/gauge excluded; they are configuration, not state).
bool problems_equal(const RigProblem& a, const RigProblem& b);

}  // namespace rigba
