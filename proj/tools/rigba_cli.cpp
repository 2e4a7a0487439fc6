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

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rigba/errors.hpp"
#include "rigba/experiment.hpp"
#include "rigba/io.hpp"

namespace {

namespace fs = std::filesystem;
using namespace rigba;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitParse = 3;
constexpr int kExitSolver = 4;
constexpr int kExitEval = 5;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<double> lambda;
  std::optional<std::string> out_dir;
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config_path, "experiment config file (JSON)");
  cmd->add_option("--seed", flags->seed, "override the scene seed");
  cmd->add_option("--mode", flags->mode, "traditional | constrained")
      ->check(CLI::IsMember({"traditional", "constrained"}));
  cmd->add_option("--lambda", flags->lambda, "override the constraint weight");
  cmd->add_option("--out", flags->out_dir, "output directory");
}

// Config file first, then explicit flags on top.
ExperimentConfig resolve_config(const CommonFlags& flags) {
  ExperimentConfig config;
  if (!flags.config_path.empty()) {
    config = load_config(flags.config_path);
  }
  if (flags.seed) config.seed = *flags.seed;
  if (flags.mode) config.mode = *flags.mode;
  if (flags.lambda) config.lambda = *flags.lambda;
  if (flags.out_dir) config.out_dir = *flags.out_dir;
  validate_config(config);
  return config;
}

fs::path prepare_out_dir(const ExperimentConfig& config) {
  fs::path dir(config.out_dir);
  fs::create_directories(dir);
  return dir;
}

int cmd_generate(const CommonFlags& flags) {
  const ExperimentConfig config = resolve_config(flags);
  const fs::path dir = prepare_out_dir(config);
  const SceneBundle bundle = generate(scene_spec_from_config(config));

  write_problem(bundle.ground_truth, (dir / "scene_gt.rigba").string());
  write_problem(bundle.initial, (dir / "scene_init.rigba").string());
  write_text_file((dir / "scene_meta.json").string(), config_to_json(config));

  std::cout << "wrote " << (dir / "scene_gt.rigba").string() << " and "
            << (dir / "scene_init.rigba").string() << "\n"
            << "images: " << bundle.ground_truth.images.size()
            << ", landmarks: " << bundle.ground_truth.landmarks.size()
            << ", observations: " << bundle.ground_truth.observations.size()
            << ", pairs: " << bundle.ground_truth.pairs.size() << "\n";
  return kExitOk;
}

int cmd_solve(const std::string& problem_path, const CommonFlags& flags) {
  const ExperimentConfig config = resolve_config(flags);
  const RigProblem dataset = read_problem(problem_path);
  const fs::path dir = prepare_out_dir(config);

  const PipelineResult result = run_pipeline(dataset, config);

  write_problem(result.solved, (dir / "solved.rigba").string());
  write_text_file((dir / "trace.csv").string(), pipeline_trace_to_csv(result));
  write_text_file((dir / "solve_report.json").string(),
                  pipeline_report_to_json(result));

  std::cout << "mode: " << config.mode
            << ", final E_reproj: " << result.final_report.final_cost_reproj
            << ", final E_baseline: " << result.final_report.final_cost_baseline
            << ", termination: "
            << termination_reason_name(result.final_report.termination) << "\n";
  if (!result.skipped_time_indices.empty()) {
    std::cout << "skipped time indices:";
    for (const int t : result.skipped_time_indices) std::cout << ' ' << t;
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_eval(const std::string& solved_path, const std::string& truth_path,
             const CommonFlags& flags) {
  const ExperimentConfig config = resolve_config(flags);
  const RigProblem solved = read_problem(solved_path);
  const RigProblem truth = read_problem(truth_path);
  const fs::path dir = prepare_out_dir(config);

  const DriftReport report = evaluate_drift(solved, truth);
  write_text_file((dir / "report.json").string(), drift_report_to_json(report));
  write_text_file((dir / "report.csv").string(), drift_report_to_csv(report));

  std::vector<Vec3> est_points, truth_points;
  for (const LandmarkRecord& lm : solved.landmarks) {
    est_points.push_back(lm.landmark.position);
    truth_points.push_back(truth.find_landmark(lm.id)->landmark.position);
  }
  const SimilarityTransform t = umeyama_align(est_points, truth_points);
  write_ply((dir / "landmarks_aligned.ply").string(),
            apply_similarity(t, est_points));
  write_ply((dir / "landmarks_reference.ply").string(), truth_points);

  std::cout << "mad_mean: " << report.mad_mean << ", mad_std: " << report.mad_std
            << ", endpoint drift: " << report.endpoint.norm
            << ", spread rms: " << report.spread.rms << "\n";
  return kExitOk;
}

int cmd_compare(const CommonFlags& flags, int n_seeds_flag) {
  ExperimentConfig config = resolve_config(flags);
  if (n_seeds_flag > 0) config.seeds = n_seeds_flag;
  const fs::path dir = prepare_out_dir(config);

  const CompareSummary summary = run_compare(config, config.seeds);
  write_text_file((dir / "compare.csv").string(), compare_to_csv(summary));
  write_text_file((dir / "compare.json").string(), compare_to_json(summary));
  std::cout << compare_to_table(summary);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained bundle adjustment for a two-camera rig: synthetic "
               "scene generation, incremental solving and drift evaluation"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string problem_path, solved_path, truth_path;
  int n_seeds = 0;

  CLI::App* generate_cmd =
      app.add_subcommand("generate", "generate a synthetic rig scene");
  add_common_flags(generate_cmd, &flags);

  CLI::App* solve_cmd =
      app.add_subcommand("solve", "incrementally solve a problem file");
  solve_cmd->add_option("problem", problem_path, "input problem file")->required();
  add_common_flags(solve_cmd, &flags);

  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate a solved problem against ground truth");
  eval_cmd->add_option("solved", solved_path, "solved problem file")->required();
  eval_cmd->add_option("truth", truth_path, "ground-truth problem file")->required();
  add_common_flags(eval_cmd, &flags);

  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "run traditional vs constrained across seeds and summarize");
  add_common_flags(compare_cmd, &flags);
  compare_cmd->add_option("--seeds", n_seeds, "number of seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (generate_cmd->parsed()) return cmd_generate(flags);
    if (solve_cmd->parsed()) return cmd_solve(problem_path, flags);
    if (eval_cmd->parsed()) return cmd_eval(solved_path, truth_path, flags);
    if (compare_cmd->parsed()) return cmd_compare(flags, n_seeds);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const rigba::Error& e) {
    if (eval_cmd->parsed()) {
      std::cerr << "evaluation error: " << e.what() << "\n";
      return kExitEval;
    }
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitUsage;
}
