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
#include <string>
#include <utility>
#include <vector>

#include "rigba/problem.hpp"

namespace rigba {

// Closed-form least-squares similarity (Umeyama) mapping estimated[i] onto
// reference[i]: minimizes sum ||s R p + t - q||^2. The recovered rotation is
// always proper (det = +1), also for mirrored inputs. Throws
// DegenerateConfiguration for < 3, coincident or collinear points.
SimilarityTransform umeyama_align(std::span<const Vec3> estimated,
                                  std::span<const Vec3> reference);

// RMS of ||t(e_i) - r_i|| after applying the alignment.
double alignment_rms(const SimilarityTransform& t, std::span<const Vec3> estimated,
                     std::span<const Vec3> reference);

// For each estimated point, the distance to its nearest reference point;
// returns (mean, population standard deviation). Exact search. Throws on
// empty inputs.
std::pair<double, double> mean_absolute_distance(std::span<const Vec3> estimated,
                                                 std::span<const Vec3> reference);

// 100 * (base - ours) / base.
double improvement_percent(double base, double ours);

struct SpreadReport {
  Vec6 per_component_std = Vec6::Zero();
  double max_abs_deviation = 0.0;  // max_k max_i |(p_i)_k - (p_avg)_k|
  double rms = 0.0;                // norm of per_component_std
};

// Dispersion of the reconstructed relative orientations: component-wise
// standard deviation of {p_i} and their largest deviation from the average.
// Throws PreconditionError with fewer than 2 reconstructed pairs.
SpreadReport relative_pose_spread(const RigProblem& problem);

struct EndpointDrift {
  Vec3 displacement = Vec3::Zero();  // in ground-truth axes
  double horizontal = 0.0;           // in-plane norm
  double vertical = 0.0;             // |component along up|
  double norm = 0.0;
};

// Displacement between the aligned estimated final camera center and the
// ground-truth final center, split into the ground plane and the vertical
// axis (default up = +z of the ground-truth frame). Trajectories must have
// equal length.
EndpointDrift endpoint_drift(std::span<const Vec3> estimated_trajectory,
                             std::span<const Vec3> truth_trajectory,
                             const SimilarityTransform& alignment,
                             const Vec3& up = Vec3::UnitZ());

struct DriftReport {
  double mad_mean = 0.0;
  double mad_std = 0.0;
  EndpointDrift endpoint;
  SpreadReport spread;
  double alignment_rms = 0.0;
  std::optional<double> improvement_percent;  // vs. a baseline report
};

// Max per-camera rotation (radians) and center error after aligning the
// estimated camera centers onto the truth with a similarity. Used for
// exact-recovery checks.
struct PoseErrors {
  double max_rotation_error = 0.0;
  double max_center_error = 0.0;
};

PoseErrors pose_errors_after_alignment(const RigProblem& estimated,
                                       const RigProblem& truth);

// Full protocol for one solved problem: align on landmark correspondences
// (matched by id), measure landmark distances, endpoint drift of the
// stream-0 trajectory and relative-pose spread. Throws
// PreconditionError naming the first offending id on a mismatch.
DriftReport evaluate_drift(const RigProblem& estimated, const RigProblem& truth);

std::string drift_report_to_json(const DriftReport& report);
std::string drift_report_to_csv(const DriftReport& report);

}  // namespace rigba
