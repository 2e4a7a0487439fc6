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
#include <string>
#include <utility>
#include <vector>

#include "rigba/eval.hpp"
#include "rigba/sim.hpp"
#include "rigba/solver.hpp"

namespace rigba {

// Every experiment setting in one flat record: scene, noise, solver,
// constraint weights and run mode. Loadable from a flat JSON file; CLI
// flags override file values.
struct ExperimentConfig {
  // Rig geometry (camera B relative to camera A, camera-A frame).
  double rig_baseline_x = 0.4;
  double rig_baseline_y = 0.0;
  double rig_baseline_z = 0.0;
  double rig_rotation_x = 0.0;
  double rig_rotation_y = 0.2;
  double rig_rotation_z = 0.0;
  double focal = 1000.0;
  double image_width = 2000.0;
  double image_height = 1500.0;
  double k1 = -0.02;
  double k2 = 0.004;
  // Trajectory and landmark field.
  std::string trajectory_shape = "loop";  // loop | straight | arc
  int n_time_steps = 40;
  double step_length = 1.0;
  double heading_offset_rad = 1.0;
  double arc_angle_rad = 1.5707963267948966;
  double trajectory_height = 1.5;
  int n_landmarks = 1000;
  int covisibility_window = 10;
  bool loop_closure = false;
  int cross_anchor_period = 1;
  // Noise injection.
  double pixel_sigma = 1.0;
  double pose_rotation_sigma = 0.002;
  double pose_center_sigma = 0.02;
  double landmark_sigma = 0.05;
  bool accumulate_pose_noise = true;
  std::uint64_t seed = 1;
  // Solver.
  int max_iterations = 100;
  int grow_max_iterations = 15;
  double initial_damping = 1e-4;
  double gradient_tolerance = 1e-10;
  double parameter_tolerance = 1e-10;
  double cost_tolerance = 1e-12;
  bool refine_intrinsics = true;
  double huber_delta = 1.0;
  // Constraint weights.
  double lambda = 500.0;
  double lambda_low = 250.0;
  double outlier_factor = 5.0;
  // Run.
  std::string mode = "constrained";  // constrained | traditional
  std::string out_dir = "out";
  int seeds = 10;
};

// Throws ConfigError on unreadable files, unknown keys or bad values.
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& config);
std::string config_to_json(const ExperimentConfig& config);

SceneSpec scene_spec_from_config(const ExperimentConfig& config);
SolverOptions solver_options_from_config(const ExperimentConfig& config);
ConstraintWeights weights_from_config(const ExperimentConfig& config);

// One incremental reconstruction run: grows the problem pair by pair
// (skipped indices are retried once), then runs the final full pass
// (constrained mode) or a plain full solve (traditional mode).
struct PipelineResult {
  RigProblem solved;
  std::vector<std::pair<std::string, IterationRecord>> trace;  // phase, record
  SolveReport final_report;
  std::vector<int> skipped_time_indices;  // still missing after the retry
  int total_new_landmarks = 0;
};

PipelineResult run_pipeline(const RigProblem& dataset, const ExperimentConfig& config);

struct SeedComparison {
  std::uint64_t seed = 0;
  DriftReport traditional;
  DriftReport constrained;
};

struct CompareSummary {
  std::vector<SeedComparison> per_seed;
  // Means over seeds.
  double traditional_mad = 0.0, constrained_mad = 0.0;
  double traditional_mad_std = 0.0, constrained_mad_std = 0.0;
  double traditional_endpoint = 0.0, constrained_endpoint = 0.0;
  double traditional_spread = 0.0, constrained_spread = 0.0;
  // Improvements of the aggregated means, 100 * (trad - cons) / trad.
  double mad_improvement = 0.0;
  double endpoint_improvement = 0.0;
  double spread_improvement = 0.0;
  // Per-seed endpoint statistics.
  int endpoint_wins = 0;  // seeds where constrained < traditional
  double median_endpoint_reduction = 0.0;
  int spread_wins = 0;
};

// Runs both modes on identical scenes across consecutive seeds starting at
// base.seed.
CompareSummary run_compare(const ExperimentConfig& base, int n_seeds);

std::string compare_to_csv(const CompareSummary& summary);
std::string compare_to_json(const CompareSummary& summary);
std::string compare_to_table(const CompareSummary& summary);

std::string pipeline_trace_to_csv(const PipelineResult& result);
std::string pipeline_report_to_json(const PipelineResult& result);

void write_text_file(const std::string& path, const std::string& content);
void write_ply(const std::string& path, std::span<const Vec3> points);

}  // namespace rigba
