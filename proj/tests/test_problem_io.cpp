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
#include "rigba/io.hpp"
#include "rigba/sim.hpp"

using namespace rigba;

TEST_SUITE_BEGIN("problem_io");

namespace {

SceneSpec small_scene_spec(std::uint64_t seed) {
  SceneSpec spec;
  spec.rig.relative =
      RelativePose::from_parts(Vec3(0, 0.15, 0), Vec3(0.4, 0.0, 0.05));
  Intrinsics k;
  k.focal = 1000.0;
  k.principal_point = Vec2(1000, 750);
  k.radial = Vec2(-0.02, 0.004);
  spec.rig.intrinsics_a = k;
  spec.rig.intrinsics_b = k;
  spec.trajectory.n_time_steps = 8;
  spec.trajectory.heading_offset_rad = 0.8;
  spec.n_landmarks = 120;
  spec.covisibility_window = 6;
  spec.noise.seed = seed;
  spec.noise.pixel_sigma = 0.7;
  spec.noise.pose_rotation_sigma = 1e-3;
  spec.noise.pose_center_sigma = 1e-2;
  spec.noise.landmark_sigma = 1e-2;
  return spec;
}

}  // namespace

TEST_CASE("round trip is the identity on generated scenes") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const SceneBundle bundle = generate(small_scene_spec(seed));
    for (const RigProblem* problem : {&bundle.ground_truth, &bundle.initial}) {
      const std::string text = problem_to_string(*problem);
      const RigProblem reread = problem_from_string(text);
      CHECK(problems_equal(*problem, reread));
      // Stable fixed point: writing again produces identical bytes.
      CHECK(problem_to_string(reread) == text);
    }
  }
}

TEST_CASE("hand-written minimal file: residual matches the projection oracle") {
  // One landmark 4 units in front of camera A, observed at a known offset.
  const std::string text =
      "RIGBA 1\n"
      "# two cameras, one landmark\n"
      "STREAM 0 1000 500 500 0 0\n"
      "STREAM 1 1000 500 500 0 0\n"
      "IMAGE 10 0 0 0 0 0 0 0 0\n"
      "IMAGE 11 1 0 0 0 0 0.5 0 0\n"
      "LANDMARK 7 0.2 -0.1 4\n"
      "OBS 10 7 551 474\n"
      "RIG_PAIR 0 10 11\n";
  const RigProblem problem = problem_from_string(text);
  REQUIRE(problem.images.size() == 2);
  REQUIRE(problem.landmarks.size() == 1);
  REQUIRE(problem.observations.size() == 1);
  CHECK(problem.weights.n_total_pairs == 1);
  CHECK(problem.weights.n_reconstructed_pairs == 1);

  Vec2 expected_projection;
  REQUIRE(oracle::pinhole_project(1000, 500, 500, 0, 0, Mat3::Identity(),
                                  Vec3::Zero(), Vec3(0.2, -0.1, 4),
                                  &expected_projection));
  const Vec2 residual = reprojection_residual(
      problem.observations[0], problem.images[0].pose,
      problem.landmarks[0].landmark, problem.streams[0].intrinsics);
  const Vec2 by_hand = Vec2(551, 474) - expected_projection;
  CHECK((residual - by_hand).norm() < 1e-12);
}

TEST_CASE("records may appear in any order") {
  const std::string text =
      "RIGBA 1\n"
      "OBS 10 7 551 474\n"
      "RIG_PAIR 0 10 11\n"
      "LANDMARK 7 0.2 -0.1 4\n"
      "IMAGE 10 0 0 0 0 0 0 0 0\n"
      "IMAGE 11 1 0 0 0 0 0.5 0 0\n"
      "STREAM 0 1000 500 500 0 0\n"
      "STREAM 1 1000 500 500 0 0\n";
  CHECK_NOTHROW(problem_from_string(text));
}

namespace {

void expect_parse_error(const std::string& text, int line, const std::string& kind) {
  try {
    problem_from_string(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line_number() == line);
    CHECK(e.record_kind() == kind);
  }
}

}  // namespace

TEST_CASE("malformed files raise ParseError with line and record kind") {
  const std::string base =
      "RIGBA 1\n"
      "STREAM 0 1000 500 500 0 0\n"
      "STREAM 1 1000 500 500 0 0\n"
      "IMAGE 10 0 0 0 0 0 0 0 0\n"
      "IMAGE 11 1 0 0 0 0 0.5 0 0\n";

  SUBCASE("missing header") {
    expect_parse_error("STREAM 0 1000 500 500 0 0\n", 1, "STREAM");
  }
  SUBCASE("unsupported version") { expect_parse_error("RIGBA 2\n", 1, "RIGBA"); }
  SUBCASE("unknown record kind") {
    expect_parse_error(base + "CAMERA 1 2 3\n", 6, "CAMERA");
  }
  SUBCASE("non-numeric field") {
    expect_parse_error(base + "LANDMARK 7 x 0 0\n", 6, "LANDMARK");
  }
  SUBCASE("missing fields") {
    expect_parse_error(base + "LANDMARK 7 1 2\n", 6, "LANDMARK");
  }
  SUBCASE("trailing fields") {
    expect_parse_error(base + "LANDMARK 7 1 2 3 4\n", 6, "LANDMARK");
  }
  SUBCASE("duplicate image id") {
    expect_parse_error(base + "IMAGE 10 0 1 0 0 0 0 0 0\n", 6, "IMAGE");
  }
  SUBCASE("image referencing an unknown stream") {
    expect_parse_error(base + "IMAGE 12 9 1 0 0 0 0 0 0\n", 6, "IMAGE");
  }
  SUBCASE("observation referencing a missing landmark") {
    expect_parse_error(base + "OBS 10 99 1 2\n", 6, "OBS");
  }
  SUBCASE("observation referencing a missing image") {
    expect_parse_error(base + "LANDMARK 7 1 2 3\nOBS 42 7 1 2\n", 7, "OBS");
  }
  SUBCASE("rig pair referencing a missing image") {
    expect_parse_error(base + "RIG_PAIR 0 10 99\n", 6, "RIG_PAIR");
  }
  SUBCASE("rig pair within one stream") {
    expect_parse_error(base + "IMAGE 12 0 1 0 0 0 1 0 0\nRIG_PAIR 0 10 12\n", 7,
                       "RIG_PAIR");
  }
  SUBCASE("duplicate pair time index") {
    expect_parse_error(base + "RIG_PAIR 0 10 11\nRIG_PAIR 0 11 10\n", 7, "RIG_PAIR");
  }
}

TEST_CASE("comments and blank lines are ignored") {
  const std::string text =
      "RIGBA 1\n"
      "\n"
      "# a comment\n"
      "STREAM 0 1000 500 500 0 0\n"
      "   \n"
      "STREAM 1 1000 500 500 0 0\n";
  const RigProblem problem = problem_from_string(text);
  CHECK(problem.streams.size() == 2);
}

TEST_CASE("format_double: shortest representation that round-trips") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-0.25) == "-0.25");
  const double tricky = 0.1 + 0.2;
  CHECK(std::stod(format_double(tricky)) == tricky);
}

TEST_SUITE_END();
