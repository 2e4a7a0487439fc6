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

#include <cstdio>
#include <fstream>

#include <doctest.h>

#include "rigba/errors.hpp"
#include "rigba/experiment.hpp"
#include "rigba/io.hpp"

using namespace rigba;

TEST_SUITE_BEGIN("experiment");

namespace {

// A scaled-down configuration that keeps pipeline tests fast.
ExperimentConfig small_config() {
  ExperimentConfig config;
  config.n_time_steps = 8;
  config.n_landmarks = 160;
  config.covisibility_window = 6;
  config.heading_offset_rad = 0.9;
  config.grow_max_iterations = 10;
  config.max_iterations = 40;
  return config;
}

std::string write_temp_config(const std::string& body) {
  const std::string path = "/tmp/rigba_test_config.json";
  std::ofstream out(path);
  out << body;
  out.close();
  return path;
}

}  // namespace

TEST_CASE("config: file values override defaults, unknown keys rejected") {
  const std::string path = write_temp_config(
      "{\"lambda\": 300.0, \"n_time_steps\": 12, \"mode\": \"traditional\"}");
  const ExperimentConfig config = load_config(path);
  CHECK(config.lambda == 300.0);
  CHECK(config.n_time_steps == 12);
  CHECK(config.mode == "traditional");
  CHECK(config.lambda_low == 250.0);  // untouched default

  CHECK_THROWS_AS(load_config(write_temp_config("{\"lamda\": 1.0}")), ConfigError);
  CHECK_THROWS_AS(load_config(write_temp_config("{\"mode\": \"weird\"}")), ConfigError);
  CHECK_THROWS_AS(load_config(write_temp_config("not json")), ConfigError);
  CHECK_THROWS_AS(load_config(write_temp_config("{\"lambda\": \"high\"}")),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/tmp/definitely_missing_rigba.json"), ConfigError);
  std::remove("/tmp/rigba_test_config.json");
}

TEST_CASE("config: json round trip preserves every field") {
  ExperimentConfig config = small_config();
  config.lambda = 321.0;
  config.mode = "traditional";
  config.seed = 99;
  const std::string path = write_temp_config(config_to_json(config));
  const ExperimentConfig reread = load_config(path);
  CHECK(config_to_json(reread) == config_to_json(config));
  std::remove("/tmp/rigba_test_config.json");
}

TEST_CASE("generation is deterministic; seeds change noise, not structure") {
  const ExperimentConfig config = small_config();
  const SceneBundle once = generate(scene_spec_from_config(config));
  const SceneBundle twice = generate(scene_spec_from_config(config));
  CHECK(problem_to_string(once.initial) == problem_to_string(twice.initial));
  CHECK(problem_to_string(once.ground_truth) == problem_to_string(twice.ground_truth));

  ExperimentConfig other = config;
  other.seed = config.seed + 1;
  const SceneBundle different = generate(scene_spec_from_config(other));
  CHECK(different.ground_truth.images.size() == once.ground_truth.images.size());
  CHECK(different.ground_truth.landmarks.size() ==
        once.ground_truth.landmarks.size());
  CHECK(different.ground_truth.pairs.size() == once.ground_truth.pairs.size());
  CHECK(problem_to_string(different.initial) != problem_to_string(once.initial));
}

TEST_CASE("run_pipeline: both modes reconstruct everything and converge") {
  ExperimentConfig config = small_config();
  const SceneBundle bundle = generate(scene_spec_from_config(config));

  for (const char* mode : {"traditional", "constrained"}) {
    config.mode = mode;
    PipelineResult result = run_pipeline(bundle.initial, config);
    CHECK(result.skipped_time_indices.empty());
    CHECK(result.final_report.converged);
    CHECK(result.solved.images.size() == bundle.initial.images.size());
    refresh_pair_counts(result.solved);
    CHECK(result.solved.weights.n_reconstructed_pairs ==
          static_cast<int>(bundle.initial.pairs.size()));
  }
}

TEST_CASE("run_pipeline: traditional trace never weights the baseline") {
  ExperimentConfig config = small_config();
  config.mode = "traditional";
  const SceneBundle bundle = generate(scene_spec_from_config(config));
  const PipelineResult result = run_pipeline(bundle.initial, config);
  for (const auto& [phase, record] : result.trace) {
    CHECK(record.effective_weight == 0.0);
  }
}

TEST_CASE("run_pipeline: constrained trace weights grow with Np/Nt, end per-pair") {
  ExperimentConfig config = small_config();
  config.mode = "constrained";
  const SceneBundle bundle = generate(scene_spec_from_config(config));
  const PipelineResult result = run_pipeline(bundle.initial, config);

  double last_grow_weight = 0.0;
  bool saw_final = false;
  for (const auto& [phase, record] : result.trace) {
    if (phase.rfind("grow:", 0) == 0) {
      CHECK(record.effective_weight >= last_grow_weight - 1e-12);
      last_grow_weight = record.effective_weight;
    } else {
      saw_final = true;
      CHECK(record.effective_weight >= config.lambda_low);
      CHECK(record.effective_weight <= config.lambda);
    }
  }
  CHECK(last_grow_weight == doctest::Approx(config.lambda).epsilon(1e-12));
  CHECK(saw_final);
}

TEST_CASE("noise-free compare: both modes report (near) zero metrics") {
  ExperimentConfig config = small_config();
  config.pixel_sigma = 0.0;
  config.pose_rotation_sigma = 0.0;
  config.pose_center_sigma = 0.0;
  config.landmark_sigma = 0.0;
  const CompareSummary summary = run_compare(config, 1);
  REQUIRE(summary.per_seed.size() == 1);
  CHECK(summary.traditional_mad < 1e-8);
  CHECK(summary.constrained_mad < 1e-8);
  CHECK(summary.traditional_endpoint < 1e-8);
  CHECK(summary.constrained_endpoint < 1e-8);
}

TEST_CASE("compare summary: improvement columns follow the definition") {
  ExperimentConfig config = small_config();
  config.pixel_sigma = 0.8;
  const CompareSummary summary = run_compare(config, 2);
  CHECK(summary.mad_improvement ==
        doctest::Approx(100.0 * (summary.traditional_mad - summary.constrained_mad) /
                        summary.traditional_mad)
            .epsilon(1e-12));
  CHECK(summary.endpoint_improvement ==
        doctest::Approx(100.0 *
                        (summary.traditional_endpoint - summary.constrained_endpoint) /
                        summary.traditional_endpoint)
            .epsilon(1e-12));
  const std::string csv = compare_to_csv(summary);
  CHECK(csv.find("traditional") != std::string::npos);
  CHECK(csv.find("constrained") != std::string::npos);
  CHECK(compare_to_json(summary).find("median_endpoint_reduction_percent") !=
        std::string::npos);
}

TEST_CASE("ply export is well-formed") {
  const std::vector<Vec3> points = {Vec3(1, 2, 3), Vec3(-0.5, 0, 4)};
  write_ply("/tmp/rigba_test_points.ply", points);
  std::ifstream in("/tmp/rigba_test_points.ply");
  std::string line;
  std::getline(in, line);
  CHECK(line == "ply");
  std::string all((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  CHECK(all.find("element vertex 2") != std::string::npos);
  CHECK(all.find("end_header") != std::string::npos);
  std::remove("/tmp/rigba_test_points.ply");
}

TEST_SUITE_END();
