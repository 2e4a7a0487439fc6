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
#include "rigba/geometry.hpp"

using namespace rigba;

TEST_SUITE_BEGIN("geometry");

namespace {
Intrinsics make_intrinsics(double f, double cx, double cy, double k1, double k2) {
  Intrinsics k;
  k.focal = f;
  k.principal_point = Vec2(cx, cy);
  k.radial = Vec2(k1, k2);
  return k;
}
}  // namespace

TEST_CASE("project: optical-axis point lands on the principal point") {
  const Intrinsics k = make_intrinsics(100, 50, 50, 0, 0);
  const Vec2 pixel = project(k, CameraPose{}, Vec3(0, 0, 1));
  CHECK(pixel.x() == doctest::Approx(50.0));
  CHECK(pixel.y() == doctest::Approx(50.0));
}

TEST_CASE("project: plain pinhole point") {
  const Intrinsics k = make_intrinsics(1000, 500, 500, 0, 0);
  const Vec2 pixel = project(k, CameraPose{}, Vec3(0.1, 0, 1));
  CHECK(pixel.x() == doctest::Approx(600.0).epsilon(1e-14));
  CHECK(pixel.y() == doctest::Approx(500.0).epsilon(1e-14));
}

TEST_CASE("project: radial distortion scales the normalized point") {
  const Intrinsics k = make_intrinsics(1000, 500, 500, 0.1, 0);
  const Vec2 pixel = project(k, CameraPose{}, Vec3(0.1, 0, 1));
  // r2 = 0.01, factor = 1.001
  CHECK(pixel.x() == doctest::Approx(600.1).epsilon(1e-14));
  CHECK(pixel.y() == doctest::Approx(500.0).epsilon(1e-14));
}

TEST_CASE("project: matches the scalar oracle on random configurations") {
  oracle::ConfigSampler sampler(201);
  for (int i = 0; i < 300; ++i) {
    const oracle::RandomConfig config = sampler.valid_config();
    Vec2 expected;
    REQUIRE(oracle::pinhole_project(
        config.intrinsics.focal, config.intrinsics.principal_point.x(),
        config.intrinsics.principal_point.y(), config.intrinsics.radial.x(),
        config.intrinsics.radial.y(), config.pose.rotation.matrix(),
        config.pose.center, config.point, &expected));
    const Vec2 got = project(config.intrinsics, config.pose, config.point);
    CHECK((got - expected).norm() < 1e-9 * std::max(1.0, expected.norm()));
  }
}

TEST_CASE("project: cheirality violations are rejected") {
  const Intrinsics k = make_intrinsics(1000, 500, 500, 0, 0);
  CHECK_THROWS_AS(project(k, CameraPose{}, Vec3(0, 0, -1)), CheiralityViolation);
  CHECK_THROWS_AS(project(k, CameraPose{}, Vec3(0, 0, 0)), CheiralityViolation);
  CHECK_FALSE(try_project(k, CameraPose{}, Vec3(0, 0, 1e-12)).has_value());
  CHECK(try_project(k, CameraPose{}, Vec3(0, 0, 1e-6)).has_value());
}

TEST_CASE("project: invariant to axis-angle renormalization") {
  // A representation with angle > pi and its canonical form act identically.
  oracle::ConfigSampler sampler(202);
  const Intrinsics k = make_intrinsics(900, 480, 360, -0.05, 0.01);
  for (int i = 0; i < 100; ++i) {
    Vec3 raw = sampler.vec3(-1.0, 1.0).normalized() * sampler.uniform(M_PI, 3.0 * M_PI);
    CameraPose canonical;
    canonical.rotation = Rotation(raw);
    canonical.center = sampler.vec3(-1.0, 1.0);

    const double depth = sampler.uniform(2.0, 20.0);
    const Vec3 camera_point(sampler.uniform(-0.4, 0.4) * depth,
                            sampler.uniform(-0.4, 0.4) * depth, depth);
    const Vec3 point =
        canonical.center + rotate(inverse(canonical.rotation), camera_point);

    // Raw-representation projection via the matrix oracle.
    Vec2 expected;
    REQUIRE(oracle::pinhole_project(k.focal, k.principal_point.x(),
                                    k.principal_point.y(), k.radial.x(),
                                    k.radial.y(), oracle::rodrigues_matrix(raw),
                                    canonical.center, point, &expected));
    const Vec2 got = project(k, canonical, point);
    CHECK((got - expected).norm() < 1e-12 * std::max(1.0, expected.norm()));
  }
}

TEST_CASE("undistort inverts the distortion") {
  const Intrinsics k = make_intrinsics(1000, 500, 500, -0.1, 0.02);
  oracle::ConfigSampler sampler(203);
  for (int i = 0; i < 100; ++i) {
    const Vec2 n(sampler.uniform(-0.6, 0.6), sampler.uniform(-0.6, 0.6));
    const double factor = radial_distortion_factor(k, n.squaredNorm());
    const Vec2 pixel = k.focal * factor * n + k.principal_point;
    CHECK((undistort_to_normalized(k, pixel) - n).norm() < 1e-10);
  }
}

TEST_CASE("apply_similarity: identity and pure scaling") {
  const std::vector<Vec3> points = {Vec3(1, 1, 1), Vec3(-2, 0.5, 3)};
  const std::vector<Vec3> same = apply_similarity(SimilarityTransform{}, points);
  CHECK(same[0] == points[0]);
  CHECK(same[1] == points[1]);

  SimilarityTransform doubler;
  doubler.scale = 2.0;
  const std::vector<Vec3> scaled = apply_similarity(doubler, points);
  CHECK((scaled[0] - Vec3(2, 2, 2)).norm() < 1e-15);
}

TEST_CASE("apply_similarity: inverse round trip") {
  oracle::ConfigSampler sampler(204);
  for (int i = 0; i < 100; ++i) {
    SimilarityTransform t;
    t.scale = sampler.uniform(0.1, 10.0);
    t.rotation = sampler.rotation();
    t.translation = sampler.vec3(-5.0, 5.0);

    std::vector<Vec3> points;
    for (int j = 0; j < 10; ++j) points.push_back(sampler.vec3(-10.0, 10.0));

    const std::vector<Vec3> forward = apply_similarity(t.inverse(), points);
    const std::vector<Vec3> back = apply_similarity(t, forward);
    for (std::size_t j = 0; j < points.size(); ++j) {
      CHECK((back[j] - points[j]).norm() < 1e-10 * std::max(1.0, points[j].norm()));
    }
  }
}

TEST_CASE("similarity composition matches sequential application") {
  oracle::ConfigSampler sampler(205);
  SimilarityTransform outer, inner;
  outer.scale = 1.7;
  outer.rotation = sampler.rotation();
  outer.translation = Vec3(1, -2, 0.5);
  inner.scale = 0.4;
  inner.rotation = sampler.rotation();
  inner.translation = Vec3(-3, 0.1, 2);
  const SimilarityTransform both = compose(outer, inner);
  for (int i = 0; i < 20; ++i) {
    const Vec3 p = sampler.vec3(-4.0, 4.0);
    CHECK((both.apply(p) - outer.apply(inner.apply(p))).norm() < 1e-12);
  }
}

TEST_SUITE_END();
