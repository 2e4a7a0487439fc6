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

#include "rigba/problem.hpp"

#include <algorithm>

namespace rigba {

void RigProblem::add_stream(CameraStream stream) {
  stream_index_[stream.id] = streams.size();
  streams.push_back(std::move(stream));
}

void RigProblem::add_image(ImageRecord image) {
  image_index_[image.id] = images.size();
  images.push_back(std::move(image));
}

void RigProblem::add_landmark(LandmarkRecord landmark) {
  landmark_index_[landmark.id] = landmarks.size();
  landmarks.push_back(std::move(landmark));
}

void RigProblem::add_pair(RigPair pair) {
  const auto at = std::upper_bound(
      pairs.begin(), pairs.end(), pair,
      [](const RigPair& a, const RigPair& b) { return a.time_index < b.time_index; });
  pairs.insert(at, pair);
}

const CameraStream* RigProblem::find_stream(StreamId id) const {
  const int idx = stream_index(id);
  return idx < 0 ? nullptr : &streams[idx];
}

CameraStream* RigProblem::find_stream(StreamId id) {
  const int idx = stream_index(id);
  return idx < 0 ? nullptr : &streams[idx];
}

const ImageRecord* RigProblem::find_image(ImageId id) const {
  const int idx = image_index(id);
  return idx < 0 ? nullptr : &images[idx];
}

ImageRecord* RigProblem::find_image(ImageId id) {
  const int idx = image_index(id);
  return idx < 0 ? nullptr : &images[idx];
}

const LandmarkRecord* RigProblem::find_landmark(LandmarkId id) const {
  const int idx = landmark_index(id);
  return idx < 0 ? nullptr : &landmarks[idx];
}

LandmarkRecord* RigProblem::find_landmark(LandmarkId id) {
  const int idx = landmark_index(id);
  return idx < 0 ? nullptr : &landmarks[idx];
}

int RigProblem::image_index(ImageId id) const {
  const auto it = image_index_.find(id);
  return it == image_index_.end() ? -1 : static_cast<int>(it->second);
}

int RigProblem::landmark_index(LandmarkId id) const {
  const auto it = landmark_index_.find(id);
  return it == landmark_index_.end() ? -1 : static_cast<int>(it->second);
}

int RigProblem::stream_index(StreamId id) const {
  const auto it = stream_index_.find(id);
  return it == stream_index_.end() ? -1 : static_cast<int>(it->second);
}

void RigProblem::rebuild_index() {
  stream_index_.clear();
  image_index_.clear();
  landmark_index_.clear();
  for (std::size_t i = 0; i < streams.size(); ++i) stream_index_[streams[i].id] = i;
  for (std::size_t i = 0; i < images.size(); ++i) image_index_[images[i].id] = i;
  for (std::size_t i = 0; i < landmarks.size(); ++i) landmark_index_[landmarks[i].id] = i;
}

void refresh_pair_counts(RigProblem& problem) {
  int reconstructed = 0;
  for (const RigPair& pair : problem.pairs) {
    if (problem.find_image(pair.image_a) != nullptr &&
        problem.find_image(pair.image_b) != nullptr) {
      ++reconstructed;
    }
  }
  problem.weights.n_reconstructed_pairs = reconstructed;
  if (problem.weights.n_total_pairs < reconstructed) {
    problem.weights.n_total_pairs = reconstructed;
  }
}

std::vector<const RigPair*> reconstructed_pairs(const RigProblem& problem) {
  std::vector<const RigPair*> out;
  out.reserve(problem.pairs.size());
  for (const RigPair& pair : problem.pairs) {
    if (problem.find_image(pair.image_a) != nullptr &&
        problem.find_image(pair.image_b) != nullptr) {
      out.push_back(&pair);
    }
  }
  return out;
}

std::vector<RelativePose> reconstructed_relative_poses(const RigProblem& problem) {
  std::vector<RelativePose> out;
  for (const RigPair* pair : reconstructed_pairs(problem)) {
    out.push_back(compute_relative_pose(problem.find_image(pair->image_a)->pose,
                                        problem.find_image(pair->image_b)->pose));
  }
  return out;
}

void apply_similarity_to_problem(RigProblem& problem,
                                 const SimilarityTransform& t) {
  const Rotation rot_inverse = inverse(t.rotation);
  for (ImageRecord& image : problem.images) {
    image.pose.rotation = compose(image.pose.rotation, rot_inverse);
    image.pose.center = t.apply(image.pose.center);
  }
  for (LandmarkRecord& lm : problem.landmarks) {
    lm.landmark.position = t.apply(lm.landmark.position);
  }
}

bool problems_equal(const RigProblem& a, const RigProblem& b) {
  if (a.streams.size() != b.streams.size() || a.images.size() != b.images.size() ||
      a.landmarks.size() != b.landmarks.size() ||
      a.observations.size() != b.observations.size() || a.pairs.size() != b.pairs.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.streams.size(); ++i) {
    const CameraStream& s = a.streams[i];
    const CameraStream& o = b.streams[i];
    if (s.id != o.id || s.intrinsics.focal != o.intrinsics.focal ||
        s.intrinsics.principal_point != o.intrinsics.principal_point ||
        s.intrinsics.radial != o.intrinsics.radial) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.images.size(); ++i) {
    const ImageRecord& s = a.images[i];
    const ImageRecord& o = b.images[i];
    if (s.id != o.id || s.stream_id != o.stream_id || s.time_index != o.time_index ||
        s.pose.rotation.axis_angle() != o.pose.rotation.axis_angle() ||
        s.pose.center != o.pose.center) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.landmarks.size(); ++i) {
    if (a.landmarks[i].id != b.landmarks[i].id ||
        a.landmarks[i].landmark.position != b.landmarks[i].landmark.position) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.observations.size(); ++i) {
    const Observation& s = a.observations[i];
    const Observation& o = b.observations[i];
    if (s.image_id != o.image_id || s.landmark_id != o.landmark_id ||
        s.pixel != o.pixel) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    const RigPair& s = a.pairs[i];
    const RigPair& o = b.pairs[i];
    if (s.time_index != o.time_index || s.image_a != o.image_a ||
        s.image_b != o.image_b) {
      return false;
    }
  }
  return true;
}

}  // namespace rigba
