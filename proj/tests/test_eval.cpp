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

#include <doctest.h>

#include "oracles.hpp"
#include "rigba/errors.hpp"
#include "rigba/eval.hpp"
#include "rigba/sim.hpp"

using namespace rigba;

TEST_SUITE_BEGIN("eval");

namespace {

std::vector<Vec3> random_cloud(oracle::ConfigSampler& sampler, int n) {
  std::vector<Vec3> cloud;
  for (int i = 0; i < n; ++i) cloud.push_back(sampler.vec3(-10.0, 10.0));
  return cloud;
}

}  // namespace

TEST_CASE("umeyama: identical sets give the identity") {
  oracle::ConfigSampler sampler(601);
  const std::vector<Vec3> cloud = random_cloud(sampler, 20);
  const SimilarityTransform t = umeyama_align(cloud, cloud);
  CHECK(t.scale == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.rotation.angle() < 1e-10);
  CHECK(t.translation.norm() < 1e-10);
  CHECK(alignment_rms(t, cloud, cloud) < 1e-12);
}

TEST_CASE("umeyama: recovers a known injected similarity") {
  oracle::ConfigSampler sampler(602);
  for (int trial = 0; trial < 30; ++trial) {
    const std::vector<Vec3> source = random_cloud(sampler, 25);
    SimilarityTransform truth;
    truth.scale = sampler.uniform(0.2, 5.0);
    truth.rotation = sampler.rotation();
    truth.translation = sampler.vec3(-8.0, 8.0);
    const std::vector<Vec3> target = apply_similarity(truth, source);

    const SimilarityTransform recovered = umeyama_align(source, target);
    CHECK(std::abs(recovered.scale - truth.scale) < 1e-10 * truth.scale);
    CHECK(compose(recovered.rotation, inverse(truth.rotation)).angle() < 1e-10);
    CHECK((recovered.translation - truth.translation).norm() < 1e-9);
    CHECK(alignment_rms(recovered, source, target) < 1e-10);
  }
}

TEST_CASE("umeyama: mirrored reference still yields a proper rotation") {
  oracle::ConfigSampler sampler(603);
  const std::vector<Vec3> source = random_cloud(sampler, 30);
  std::vector<Vec3> mirrored;
  for (const Vec3& p : source) mirrored.push_back(Vec3(p.x(), p.y(), -p.z()));

  const SimilarityTransform t = umeyama_align(source, mirrored);
  CHECK(t.rotation.matrix().determinant() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.scale > 0.0);
  CHECK(alignment_rms(t, source, mirrored) > 1e-3);  // a mirror cannot be reached
}

TEST_CASE("umeyama: degenerate configurations are rejected") {
  std::vector<Vec3> two = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  CHECK_THROWS_AS(umeyama_align(two, two), DegenerateConfiguration);

  std::vector<Vec3> collinear, target;
  for (int i = 0; i < 10; ++i) {
    collinear.push_back(Vec3(i, 2.0 * i, -i));
    target.push_back(Vec3(i, 0, 0));
  }
  CHECK_THROWS_AS(umeyama_align(collinear, target), DegenerateConfiguration);

  std::vector<Vec3> coincident(5, Vec3(1, 2, 3));
  CHECK_THROWS_AS(umeyama_align(coincident, coincident), DegenerateConfiguration);
}

TEST_CASE("umeyama: residual invariant under pre-applied similarities") {
  oracle::ConfigSampler sampler(604);
  const std::vector<Vec3> estimate = random_cloud(sampler, 40);
  std::vector<Vec3> reference = estimate;
  for (Vec3& p : reference) p += sampler.vec3(-0.1, 0.1);  // imperfect match

  const double base_rms =
      alignment_rms(umeyama_align(estimate, reference), estimate, reference);

  for (int trial = 0; trial < 10; ++trial) {
    SimilarityTransform warp;
    warp.scale = sampler.uniform(0.1, 10.0);
    warp.rotation = sampler.rotation();
    warp.translation = sampler.vec3(-20.0, 20.0);
    const std::vector<Vec3> warped = apply_similarity(warp, estimate);
    const double rms =
        alignment_rms(umeyama_align(warped, reference), warped, reference);
    CHECK(std::abs(rms - base_rms) < 1e-9 * std::max(1.0, base_rms));
  }
}

TEST_CASE("mean_absolute_distance: identical clouds give (0, 0)") {
  oracle::ConfigSampler sampler(605);
  const std::vector<Vec3> cloud = random_cloud(sampler, 15);
  const auto [mean, stddev] = mean_absolute_distance(cloud, cloud);
  CHECK(mean == 0.0);
  CHECK(stddev == 0.0);
}

TEST_CASE("mean_absolute_distance: uniform offset against a coarse grid") {
  // Reference on a grid with spacing 5 >> offset 0.5: nearest neighbor is
  // always the point's own grid partner.
  std::vector<Vec3> reference, estimated;
  for (int x = 0; x < 4; ++x) {
    for (int y = 0; y < 4; ++y) {
      for (int z = 0; z < 4; ++z) {
        reference.push_back(Vec3(5.0 * x, 5.0 * y, 5.0 * z));
        estimated.push_back(Vec3(5.0 * x + 0.5, 5.0 * y, 5.0 * z));
      }
    }
  }
  const auto [mean, stddev] = mean_absolute_distance(estimated, reference);
  CHECK(mean == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(stddev == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mean_absolute_distance: empty sets are errors; adding references helps") {
  oracle::ConfigSampler sampler(606);
  const std::vector<Vec3> cloud = random_cloud(sampler, 10);
  CHECK_THROWS_AS(mean_absolute_distance({}, cloud), PreconditionError);
  CHECK_THROWS_AS(mean_absolute_distance(cloud, {}), PreconditionError);

  std::vector<Vec3> reference = random_cloud(sampler, 5);
  const auto [before, ignored] = mean_absolute_distance(cloud, reference);
  reference.push_back(cloud[0]);  // a perfect match can only shrink distances
  const auto [after, ignored2] = mean_absolute_distance(cloud, reference);
  CHECK(after <= before);
}

TEST_CASE("improvement arithmetic") {
  // 2.028 -> 1.432 is the 29.38% headline case.
  CHECK(improvement_percent(2.028, 1.432) == doctest::Approx(29.38).epsilon(5e-4));
  CHECK(improvement_percent(3.5, 3.5) == 0.0);
  CHECK(improvement_percent(2.0, 3.0) == doctest::Approx(-50.0));
}

namespace {

SceneSpec eval_scene_spec() {
  SceneSpec spec;
  spec.rig.relative = RelativePose::from_parts(Vec3(0, 0.2, 0), Vec3(0.4, 0, 0.05));
  Intrinsics k;
  k.focal = 1000.0;
  k.principal_point = Vec2(1000, 750);
  spec.rig.intrinsics_a = k;
  spec.rig.intrinsics_b = k;
  spec.trajectory.n_time_steps = 10;
  spec.trajectory.heading_offset_rad = 0.9;
  spec.n_landmarks = 150;
  spec.covisibility_window = 8;
  return spec;
}

}  // namespace

TEST_CASE("relative_pose_spread: zero for a rigid estimate, scripted otherwise") {
  const SceneBundle bundle = generate(eval_scene_spec());
  const SpreadReport rigid = relative_pose_spread(bundle.ground_truth);
  CHECK(rigid.per_component_std.norm() < 1e-12);
  CHECK(rigid.max_abs_deviation < 1e-12);

  // Corrupt one pair and compare against the explicit formula.
  RigProblem corrupted = bundle.ground_truth;
  corrupted.find_image(corrupted.pairs[3].image_b)->pose.center += Vec3(0.3, 0, 0);
  const std::vector<RelativePose> rels = reconstructed_relative_poses(corrupted);
  const int n = static_cast<int>(rels.size());
  Vec6 mean = Vec6::Zero();
  for (const RelativePose& r : rels) mean += r.p;
  mean /= n;
  Vec6 variance = Vec6::Zero();
  double max_dev = 0.0;
  for (const RelativePose& r : rels) {
    variance += (r.p - mean).cwiseProduct(r.p - mean);
    max_dev = std::max(max_dev, (r.p - mean).cwiseAbs().maxCoeff());
  }
  variance /= n;

  const SpreadReport spread = relative_pose_spread(corrupted);
  CHECK((spread.per_component_std - variance.cwiseSqrt()).norm() < 1e-12);
  CHECK(spread.max_abs_deviation == doctest::Approx(max_dev).epsilon(1e-12));

  RigProblem single = bundle.ground_truth;
  single.pairs.resize(1);
  CHECK_THROWS_AS(relative_pose_spread(single), PreconditionError);
}

TEST_CASE("endpoint_drift: exact cases") {
  std::vector<Vec3> truth = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
  CHECK(endpoint_drift(truth, truth, SimilarityTransform{}).norm == 0.0);

  std::vector<Vec3> estimated = truth;
  estimated.back() += Vec3(3, 0, 4);
  const EndpointDrift drift = endpoint_drift(estimated, truth, SimilarityTransform{});
  CHECK(drift.horizontal == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(drift.vertical == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(drift.norm == doctest::Approx(5.0).epsilon(1e-12));

  estimated.pop_back();
  CHECK_THROWS_AS(endpoint_drift(estimated, truth, SimilarityTransform{}),
                  PreconditionError);
}

TEST_CASE("evaluate_drift: ground truth against itself is an all-zero report") {
  const SceneBundle bundle = generate(eval_scene_spec());
  const DriftReport report = evaluate_drift(bundle.ground_truth, bundle.ground_truth);
  CHECK(report.mad_mean < 1e-10);
  CHECK(report.mad_std < 1e-10);
  CHECK(report.endpoint.norm < 1e-10);
  CHECK(report.spread.rms < 1e-12);
  CHECK(report.alignment_rms < 1e-10);
}

TEST_CASE("evaluate_drift: missing landmark ids are reported") {
  const SceneBundle bundle = generate(eval_scene_spec());
  RigProblem truncated_truth = bundle.ground_truth;
  truncated_truth.landmarks.pop_back();
  truncated_truth.rebuild_index();
  CHECK_THROWS_WITH_AS(evaluate_drift(bundle.ground_truth, truncated_truth),
                       doctest::Contains("149"), PreconditionError);
}

TEST_CASE("drift report serialization carries every metric") {
  DriftReport report;
  report.mad_mean = 1.25;
  report.mad_std = 0.5;
  report.endpoint.displacement = Vec3(3, 0, 4);
  report.endpoint.horizontal = 3;
  report.endpoint.vertical = 4;
  report.endpoint.norm = 5;
  report.improvement_percent = 29.38;
  const std::string json = drift_report_to_json(report);
  CHECK(json.find("\"mad_mean\": 1.25") != std::string::npos);
  CHECK(json.find("\"improvement_percent\": 29.38") != std::string::npos);
  const std::string csv = drift_report_to_csv(report);
  CHECK(csv.find("endpoint_norm,5") != std::string::npos);
  CHECK(csv.find("improvement_percent,29.38") != std::string::npos);
}

TEST_SUITE_END();
