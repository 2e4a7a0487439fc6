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
#include <vector>

#include <Eigen/Sparse>

#include "rigba/problem.hpp"

namespace rigba {

struct SolverOptions {
  int max_iterations = 100;
  double initial_damping = 1e-4;
  double gradient_tolerance = 1e-10;
  double parameter_tolerance = 1e-10;
  double cost_tolerance = 1e-12;
  double damping_increase = 10.0;  // on rejected step
  double damping_decrease = 0.5;   // on accepted step
  double max_damping = 1e32;       // escalation beyond this is a NumericalFailure
  bool refine_intrinsics = true;
  // Skips every baseline term, leaving exactly the code path of a build
  // without the rig constraint. A zero effective weight takes the same path.
  bool disable_rig_constraint = false;
};

enum class TerminationReason {
  kGradientTolerance,
  kParameterTolerance,
  kCostTolerance,
  kMaxIterations,
};

const char* termination_reason_name(TerminationReason reason);

// One candidate step. Costs are evaluated at the candidate state;
// effective_weight is the baseline multiplier in force (mean of the
// per-pair weights in the final pass).
struct IterationRecord {
  int iteration = 0;
  double cost_reproj = 0.0;
  double cost_baseline = 0.0;  // unweighted Eq-style half sum
  double effective_weight = 0.0;
  double damping = 0.0;
  double step_norm = 0.0;
  bool accepted = false;
};

struct SolveReport {
  std::vector<IterationRecord> iterations;
  TerminationReason termination = TerminationReason::kMaxIterations;
  bool converged = false;
  int n_accepted_steps = 0;
  int dropped_observations = 0;  // cheirality-violating at the final state
  double initial_cost_reproj = 0.0;
  double initial_cost_baseline = 0.0;
  double final_cost_reproj = 0.0;
  double final_cost_baseline = 0.0;
  double final_total_cost = 0.0;
};

// Anchors the gauge: the first reconstructed rig pair's camera A pose is
// held constant and the distance between that pair's centers is frozen at
// its current value (the B center moves on a sphere), removing the 7
// similarity freedoms. Requires >= 2 posed images and a reconstructed pair.
GaugeConfig fix_gauge(RigProblem& problem);

// Sparse Levenberg-Marquardt on the combined objective. Baseline residuals
// are scaled by sqrt(lambda * N_p / N_t). Parameters are updated in place;
// accepted steps never increase the total weighted cost. Throws
// NumericalFailure when damping escalation cannot produce a solvable
// system; returns with converged=false when max_iterations is reached.
SolveReport solve(RigProblem& problem, const SolverOptions& options);

// The final pass over the fully reconstructed problem: computes the average
// relative orientation, switches every pair to its per-pair weight, and
// solves with per-pair sqrt(lambda_i) scaling. Throws PreconditionError if
// any pair is not reconstructed.
SolveReport final_full_iteration(RigProblem& problem, const SolverOptions& options);

enum class GrowStatus {
  kAdded,
  kInsufficientOverlap,
  kAlreadyPresent,
  kUnknownTimeIndex,
};

struct GrowResult {
  GrowStatus status = GrowStatus::kUnknownTimeIndex;
  int n_new_landmarks = 0;
  int n_new_observations = 0;
  double resection_rms_a = 0.0;  // pixels
  double resection_rms_b = 0.0;
  SolveReport solve_report;
};

// Adds the rig pair at time_index from the dataset into the active problem:
// resects both new poses from 2D-3D matches against the active landmarks
// (initial guesses taken from the dataset poses), triangulates newly
// covisible landmarks from their two widest-baseline views, then runs a
// constrained solve with the updated global weight. Returns
// kInsufficientOverlap (and leaves the problem untouched) when either image
// shares fewer than 6 landmarks with the reconstructed set.
GrowResult grow_problem(RigProblem& active, const RigProblem& dataset,
                        int time_index, const SolverOptions& options);

struct Correspondence2D3D {
  Vec2 pixel;
  Vec3 point;
};

// Dense 6-parameter LM refinement of a single pose against fixed points.
// Returns the final RMS reprojection error in pixels.
double refine_pose_resection(CameraPose& pose,
                             std::span<const Correspondence2D3D> matches,
                             const Intrinsics& k, int max_iterations = 50);

// Linear two-view triangulation on undistorted normalized coordinates.
// Empty when the point fails cheirality in either view or the system is
// numerically unusable.
std::optional<Vec3> triangulate_two_view(const CameraPose& pose_a,
                                         const Intrinsics& k_a, const Vec2& pixel_a,
                                         const CameraPose& pose_b,
                                         const Intrinsics& k_b, const Vec2& pixel_b);

// Introspection used by the structure audit: the free parameter blocks in
// column order and the parameter blocks each residual block touches.
struct ParameterBlockInfo {
  std::string label;  // "pose:<image>", "landmark:<id>", "intrinsics:<stream>"
  int offset = 0;
  int size = 0;
};

std::vector<ParameterBlockInfo> describe_parameter_blocks(
    const RigProblem& problem, const SolverOptions& options);

struct ResidualBlockStructure {
  enum class Kind { kReprojection, kBaseline };
  Kind kind;
  std::vector<std::string> parameter_blocks;
};

std::vector<ResidualBlockStructure> audit_structure(const RigProblem& problem,
                                                    const SolverOptions& options);

// Undamped normal matrix over the free parameters at the current state
// (global weighting). Exposed for rank/conditioning checks.
Eigen::SparseMatrix<double> assemble_normal_matrix(const RigProblem& problem,
                                                   const SolverOptions& options);

}  // namespace rigba
