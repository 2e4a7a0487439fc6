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

#include "rigba/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rigba/errors.hpp"
#include "rigba/io.hpp"

namespace rigba {

namespace {

using nlohmann::json;

// Keep declaration order in sync with ExperimentConfig.
template <typename Fn>
void for_each_config_field(ExperimentConfig& c, Fn&& fn) {
  fn("rig_baseline_x", c.rig_baseline_x);
  fn("rig_baseline_y", c.rig_baseline_y);
  fn("rig_baseline_z", c.rig_baseline_z);
  fn("rig_rotation_x", c.rig_rotation_x);
  fn("rig_rotation_y", c.rig_rotation_y);
  fn("rig_rotation_z", c.rig_rotation_z);
  fn("focal", c.focal);
  fn("image_width", c.image_width);
  fn("image_height", c.image_height);
  fn("k1", c.k1);
  fn("k2", c.k2);
  fn("trajectory_shape", c.trajectory_shape);
  fn("n_time_steps", c.n_time_steps);
  fn("step_length", c.step_length);
  fn("heading_offset_rad", c.heading_offset_rad);
  fn("arc_angle_rad", c.arc_angle_rad);
  fn("trajectory_height", c.trajectory_height);
  fn("n_landmarks", c.n_landmarks);
  fn("covisibility_window", c.covisibility_window);
  fn("loop_closure", c.loop_closure);
  fn("cross_anchor_period", c.cross_anchor_period);
  fn("pixel_sigma", c.pixel_sigma);
  fn("pose_rotation_sigma", c.pose_rotation_sigma);
  fn("pose_center_sigma", c.pose_center_sigma);
  fn("landmark_sigma", c.landmark_sigma);
  fn("accumulate_pose_noise", c.accumulate_pose_noise);
  fn("seed", c.seed);
  fn("max_iterations", c.max_iterations);
  fn("grow_max_iterations", c.grow_max_iterations);
  fn("initial_damping", c.initial_damping);
  fn("gradient_tolerance", c.gradient_tolerance);
  fn("parameter_tolerance", c.parameter_tolerance);
  fn("cost_tolerance", c.cost_tolerance);
  fn("refine_intrinsics", c.refine_intrinsics);
  fn("huber_delta", c.huber_delta);
  fn("lambda", c.lambda);
  fn("lambda_low", c.lambda_low);
  fn("outlier_factor", c.outlier_factor);
  fn("mode", c.mode);
  fn("out_dir", c.out_dir);
  fn("seeds", c.seeds);
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in '" + path + "': " + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("config must be a flat JSON object");
  }

  ExperimentConfig config;
  std::vector<std::string> known;
  for_each_config_field(config, [&](const char* key, auto& field) {
    known.push_back(key);
    if (!doc.contains(key)) return;
    try {
      field = doc.at(key).get<std::decay_t<decltype(field)>>();
    } catch (const json::exception&) {
      throw ConfigError(std::string("bad value for config key '") + key + "'");
    }
  });
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  validate_config(config);
  return config;
}

void validate_config(const ExperimentConfig& config) {
  if (config.mode != "constrained" && config.mode != "traditional") {
    throw ConfigError("mode must be 'constrained' or 'traditional'");
  }
  if (config.trajectory_shape != "loop" && config.trajectory_shape != "straight" &&
      config.trajectory_shape != "arc") {
    throw ConfigError("trajectory_shape must be loop, straight or arc");
  }
  if (config.n_time_steps < 2) throw ConfigError("n_time_steps must be >= 2");
  if (config.n_landmarks < 10) throw ConfigError("n_landmarks must be >= 10");
  if (config.covisibility_window < 1)
    throw ConfigError("covisibility_window must be >= 1");
  if (config.cross_anchor_period < 1)
    throw ConfigError("cross_anchor_period must be >= 1");
  if (config.focal <= 0.0) throw ConfigError("focal must be positive");
  if (config.huber_delta <= 0.0) throw ConfigError("huber_delta must be positive");
  if (config.lambda < config.lambda_low || config.lambda_low <= 0.0) {
    throw ConfigError("weights must satisfy lambda >= lambda_low > 0");
  }
  if (config.max_iterations < 1 || config.grow_max_iterations < 1) {
    throw ConfigError("iteration limits must be >= 1");
  }
  if (config.seeds < 1) throw ConfigError("seeds must be >= 1");
}

std::string config_to_json(const ExperimentConfig& config) {
  ExperimentConfig copy = config;
  json doc = json::object();
  for_each_config_field(copy, [&](const char* key, auto& field) {
    doc[key] = field;
  });
  return doc.dump(2) + "\n";
}

SceneSpec scene_spec_from_config(const ExperimentConfig& config) {
  SceneSpec spec;
  spec.rig.relative = RelativePose::from_parts(
      Vec3(config.rig_rotation_x, config.rig_rotation_y, config.rig_rotation_z),
      Vec3(config.rig_baseline_x, config.rig_baseline_y, config.rig_baseline_z));
  Intrinsics k;
  k.focal = config.focal;
  k.principal_point = Vec2(config.image_width / 2.0, config.image_height / 2.0);
  k.radial = Vec2(config.k1, config.k2);
  spec.rig.intrinsics_a = k;
  spec.rig.intrinsics_b = k;
  spec.rig.image_width = config.image_width;
  spec.rig.image_height = config.image_height;

  if (config.trajectory_shape == "loop") {
    spec.trajectory.shape = TrajectoryShape::kLoop;
  } else if (config.trajectory_shape == "straight") {
    spec.trajectory.shape = TrajectoryShape::kStraight;
  } else {
    spec.trajectory.shape = TrajectoryShape::kArc;
  }
  spec.trajectory.n_time_steps = config.n_time_steps;
  spec.trajectory.step_length = config.step_length;
  spec.trajectory.heading_offset_rad = config.heading_offset_rad;
  spec.trajectory.arc_angle_rad = config.arc_angle_rad;
  spec.trajectory.height = config.trajectory_height;

  spec.n_landmarks = config.n_landmarks;
  spec.covisibility_window = config.covisibility_window;
  spec.loop_closure_covisibility = config.loop_closure;
  spec.cross_anchor_period = config.cross_anchor_period;

  spec.noise.pixel_sigma = config.pixel_sigma;
  spec.noise.pose_rotation_sigma = config.pose_rotation_sigma;
  spec.noise.pose_center_sigma = config.pose_center_sigma;
  spec.noise.landmark_sigma = config.landmark_sigma;
  spec.noise.accumulate_pose_noise = config.accumulate_pose_noise;
  spec.noise.seed = config.seed;
  return spec;
}

SolverOptions solver_options_from_config(const ExperimentConfig& config) {
  SolverOptions options;
  options.max_iterations = config.max_iterations;
  options.initial_damping = config.initial_damping;
  options.gradient_tolerance = config.gradient_tolerance;
  options.parameter_tolerance = config.parameter_tolerance;
  options.cost_tolerance = config.cost_tolerance;
  options.refine_intrinsics = config.refine_intrinsics;
  return options;
}

ConstraintWeights weights_from_config(const ExperimentConfig& config) {
  ConstraintWeights weights;
  weights.lambda = config.lambda;
  weights.lambda_low = config.lambda_low;
  weights.outlier_factor = config.outlier_factor;
  return weights;
}

PipelineResult run_pipeline(const RigProblem& dataset_in,
                            const ExperimentConfig& config) {
  RigProblem dataset = dataset_in;
  dataset.rebuild_index();
  dataset.weights = weights_from_config(config);
  dataset.weights.n_total_pairs = static_cast<int>(dataset.pairs.size());
  dataset.loss.huber_delta = config.huber_delta;
  const bool traditional = config.mode == "traditional";
  if (traditional) {
    dataset.weights.lambda = 0.0;
  }
  refresh_pair_counts(dataset);

  SolverOptions grow_options = solver_options_from_config(config);
  grow_options.max_iterations = config.grow_max_iterations;
  const SolverOptions final_options = solver_options_from_config(config);

  PipelineResult out;
  RigProblem active;

  std::vector<int> pending;
  for (const RigPair& pair : dataset.pairs) pending.push_back(pair.time_index);

  // Grow in time order; indices skipped for insufficient overlap get one
  // retry after the sweep, when more landmarks exist.
  for (int round = 0; round < 2 && !pending.empty(); ++round) {
    std::vector<int> next_pending;
    for (const int t : pending) {
      GrowResult grown = grow_problem(active, dataset, t, grow_options);
      if (grown.status == GrowStatus::kInsufficientOverlap) {
        next_pending.push_back(t);
        continue;
      }
      if (grown.status == GrowStatus::kAdded) {
        out.total_new_landmarks += grown.n_new_landmarks;
        const std::string phase = "grow:" + std::to_string(t);
        for (const IterationRecord& record : grown.solve_report.iterations) {
          out.trace.emplace_back(phase, record);
        }
      }
    }
    pending = std::move(next_pending);
  }
  out.skipped_time_indices = pending;

  refresh_pair_counts(active);
  if (traditional) {
    out.final_report = solve(active, final_options);
  } else {
    out.final_report = final_full_iteration(active, final_options);
  }
  for (const IterationRecord& record : out.final_report.iterations) {
    out.trace.emplace_back("final", record);
  }
  out.solved = std::move(active);
  return out;
}

CompareSummary run_compare(const ExperimentConfig& base, int n_seeds) {
  if (n_seeds < 1) {
    throw ConfigError("run_compare: need at least one seed");
  }
  CompareSummary summary;
  std::vector<double> endpoint_reductions;

  for (int i = 0; i < n_seeds; ++i) {
    ExperimentConfig config = base;
    config.seed = base.seed + static_cast<std::uint64_t>(i);

    const SceneBundle bundle = generate(scene_spec_from_config(config));

    SeedComparison row;
    row.seed = config.seed;

    config.mode = "traditional";
    row.traditional =
        evaluate_drift(run_pipeline(bundle.initial, config).solved, bundle.ground_truth);
    config.mode = "constrained";
    row.constrained =
        evaluate_drift(run_pipeline(bundle.initial, config).solved, bundle.ground_truth);
    row.constrained.improvement_percent =
        improvement_percent(row.traditional.mad_mean, row.constrained.mad_mean);

    summary.traditional_mad += row.traditional.mad_mean;
    summary.constrained_mad += row.constrained.mad_mean;
    summary.traditional_mad_std += row.traditional.mad_std;
    summary.constrained_mad_std += row.constrained.mad_std;
    summary.traditional_endpoint += row.traditional.endpoint.norm;
    summary.constrained_endpoint += row.constrained.endpoint.norm;
    summary.traditional_spread += row.traditional.spread.rms;
    summary.constrained_spread += row.constrained.spread.rms;
    if (row.constrained.endpoint.norm < row.traditional.endpoint.norm) {
      ++summary.endpoint_wins;
    }
    if (row.constrained.spread.rms < row.traditional.spread.rms) {
      ++summary.spread_wins;
    }
    endpoint_reductions.push_back(
        improvement_percent(row.traditional.endpoint.norm, row.constrained.endpoint.norm));
    summary.per_seed.push_back(std::move(row));
  }

  const double n = static_cast<double>(n_seeds);
  summary.traditional_mad /= n;
  summary.constrained_mad /= n;
  summary.traditional_mad_std /= n;
  summary.constrained_mad_std /= n;
  summary.traditional_endpoint /= n;
  summary.constrained_endpoint /= n;
  summary.traditional_spread /= n;
  summary.constrained_spread /= n;
  summary.mad_improvement =
      improvement_percent(summary.traditional_mad, summary.constrained_mad);
  summary.endpoint_improvement =
      improvement_percent(summary.traditional_endpoint, summary.constrained_endpoint);
  summary.spread_improvement =
      improvement_percent(summary.traditional_spread, summary.constrained_spread);

  std::sort(endpoint_reductions.begin(), endpoint_reductions.end());
  const std::size_t mid = endpoint_reductions.size() / 2;
  summary.median_endpoint_reduction =
      endpoint_reductions.size() % 2 == 1
          ? endpoint_reductions[mid]
          : 0.5 * (endpoint_reductions[mid - 1] + endpoint_reductions[mid]);
  return summary;
}

std::string compare_to_csv(const CompareSummary& summary) {
  std::ostringstream out;
  out << "seed,mode,mad_mean,mad_std,endpoint_norm,endpoint_horizontal,"
         "endpoint_vertical,spread_rms,spread_max_deviation\n";
  const auto emit = [&](std::uint64_t seed, const char* mode, const DriftReport& r) {
    out << seed << ',' << mode << ',' << format_double(r.mad_mean) << ','
        << format_double(r.mad_std) << ',' << format_double(r.endpoint.norm) << ','
        << format_double(r.endpoint.horizontal) << ','
        << format_double(r.endpoint.vertical) << ',' << format_double(r.spread.rms)
        << ',' << format_double(r.spread.max_abs_deviation) << '\n';
  };
  for (const SeedComparison& row : summary.per_seed) {
    emit(row.seed, "traditional", row.traditional);
    emit(row.seed, "constrained", row.constrained);
  }
  return out.str();
}

std::string compare_to_json(const CompareSummary& summary) {
  json doc;
  json rows = json::array();
  for (const SeedComparison& row : summary.per_seed) {
    json seed_doc;
    seed_doc["seed"] = row.seed;
    for (const auto& [mode, report] :
         std::vector<std::pair<std::string, const DriftReport*>>{
             {"traditional", &row.traditional}, {"constrained", &row.constrained}}) {
      json r;
      r["mad_mean"] = report->mad_mean;
      r["mad_std"] = report->mad_std;
      r["endpoint_norm"] = report->endpoint.norm;
      r["endpoint_horizontal"] = report->endpoint.horizontal;
      r["endpoint_vertical"] = report->endpoint.vertical;
      r["spread_rms"] = report->spread.rms;
      r["spread_max_deviation"] = report->spread.max_abs_deviation;
      seed_doc[mode] = r;
    }
    rows.push_back(seed_doc);
  }
  doc["per_seed"] = rows;
  doc["summary"] = {
      {"traditional_mad", summary.traditional_mad},
      {"constrained_mad", summary.constrained_mad},
      {"traditional_mad_std", summary.traditional_mad_std},
      {"constrained_mad_std", summary.constrained_mad_std},
      {"traditional_endpoint", summary.traditional_endpoint},
      {"constrained_endpoint", summary.constrained_endpoint},
      {"traditional_spread", summary.traditional_spread},
      {"constrained_spread", summary.constrained_spread},
      {"mad_improvement_percent", summary.mad_improvement},
      {"endpoint_improvement_percent", summary.endpoint_improvement},
      {"spread_improvement_percent", summary.spread_improvement},
      {"endpoint_wins", summary.endpoint_wins},
      {"spread_wins", summary.spread_wins},
      {"median_endpoint_reduction_percent", summary.median_endpoint_reduction},
  };
  return doc.dump(2) + "\n";
}

std::string compare_to_table(const CompareSummary& summary) {
  std::ostringstream out;
  out << "BA mode      | mad mean | mad std  | endpoint | spread\n";
  out << "-------------+----------+----------+----------+--------\n";
  const auto line = [&](const char* name, double mad, double mad_std,
                        double endpoint, double spread) {
    char buffer[128];
    std::snprintf(buffer, sizeof(buffer), "%-12s | %8.4f | %8.4f | %8.4f | %7.5f\n",
                  name, mad, mad_std, endpoint, spread);
    out << buffer;
  };
  line("traditional", summary.traditional_mad, summary.traditional_mad_std,
       summary.traditional_endpoint, summary.traditional_spread);
  line("constrained", summary.constrained_mad, summary.constrained_mad_std,
       summary.constrained_endpoint, summary.constrained_spread);
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer),
                "improvement  | %7.2f%% |          | %7.2f%% | %6.2f%%\n",
                summary.mad_improvement, summary.endpoint_improvement,
                summary.spread_improvement);
  out << buffer;
  std::snprintf(buffer, sizeof(buffer),
                "endpoint wins: %d/%zu, median endpoint reduction: %.2f%%\n",
                summary.endpoint_wins, summary.per_seed.size(),
                summary.median_endpoint_reduction);
  out << buffer;
  return out.str();
}

std::string pipeline_trace_to_csv(const PipelineResult& result) {
  std::ostringstream out;
  out << "phase,iteration,e_reproj,e_baseline,effective_weight,damping,step_norm,"
         "accepted\n";
  for (const auto& [phase, record] : result.trace) {
    out << phase << ',' << record.iteration << ',' << format_double(record.cost_reproj)
        << ',' << format_double(record.cost_baseline) << ','
        << format_double(record.effective_weight) << ','
        << format_double(record.damping) << ',' << format_double(record.step_norm)
        << ',' << (record.accepted ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string pipeline_report_to_json(const PipelineResult& result) {
  json doc;
  doc["termination"] = termination_reason_name(result.final_report.termination);
  doc["converged"] = result.final_report.converged;
  doc["n_accepted_steps"] = result.final_report.n_accepted_steps;
  doc["dropped_observations"] = result.final_report.dropped_observations;
  doc["initial_cost_reproj"] = result.final_report.initial_cost_reproj;
  doc["initial_cost_baseline"] = result.final_report.initial_cost_baseline;
  doc["final_cost_reproj"] = result.final_report.final_cost_reproj;
  doc["final_cost_baseline"] = result.final_report.final_cost_baseline;
  doc["final_total_cost"] = result.final_report.final_total_cost;
  doc["skipped_time_indices"] = result.skipped_time_indices;
  doc["n_images"] = result.solved.images.size();
  doc["n_landmarks"] = result.solved.landmarks.size();
  doc["n_observations"] = result.solved.observations.size();
  doc["n_pairs"] = result.solved.pairs.size();
  return doc.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open '" + path + "' for writing");
  }
  out << content;
}

void write_ply(const std::string& path, std::span<const Vec3> points) {
  std::ostringstream out;
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  for (const Vec3& p : points) {
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' '
        << format_double(p.z()) << '\n';
  }
  write_text_file(path, out.str());
}

}  // namespace rigba
