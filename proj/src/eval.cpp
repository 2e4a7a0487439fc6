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

#include "rigba/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "rigba/errors.hpp"
#include "rigba/io.hpp"
#include "rigba/sim.hpp"

namespace rigba {

SimilarityTransform umeyama_align(std::span<const Vec3> estimated,
                                  std::span<const Vec3> reference) {
  if (estimated.size() != reference.size()) {
    throw PreconditionError("umeyama_align: size mismatch");
  }
  const std::size_t n = estimated.size();
  if (n < 3) {
    throw DegenerateConfiguration("umeyama_align: need at least 3 points");
  }

  Vec3 mean_src = Vec3::Zero();
  Vec3 mean_dst = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mean_src += estimated[i];
    mean_dst += reference[i];
  }
  mean_src /= static_cast<double>(n);
  mean_dst /= static_cast<double>(n);

  double src_variance = 0.0;
  Mat3 covariance = Mat3::Zero();  // sum (q - mq)(p - mp)^T / n
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = estimated[i] - mean_src;
    const Vec3 q = reference[i] - mean_dst;
    src_variance += p.squaredNorm();
    covariance += q * p.transpose();
  }
  src_variance /= static_cast<double>(n);
  covariance /= static_cast<double>(n);

  if (src_variance < 1e-24) {
    throw DegenerateConfiguration("umeyama_align: coincident source points");
  }

  Eigen::JacobiSVD<Mat3> svd(covariance, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 d = svd.singularValues();
  if (d[1] <= 1e-12 * d[0]) {
    throw DegenerateConfiguration("umeyama_align: collinear points");
  }
  Vec3 signs = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    signs[2] = -1.0;  // keep the rotation proper
  }
  const Mat3 rot =
      svd.matrixU() * signs.asDiagonal() * svd.matrixV().transpose();
  const double scale = d.dot(signs) / src_variance;

  SimilarityTransform t;
  t.scale = scale;
  t.rotation = Rotation::from_matrix(rot);
  t.translation = mean_dst - scale * (rot * mean_src);
  return t;
}

double alignment_rms(const SimilarityTransform& t, std::span<const Vec3> estimated,
                     std::span<const Vec3> reference) {
  if (estimated.size() != reference.size() || estimated.empty()) {
    throw PreconditionError("alignment_rms: invalid point sets");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    sq += (t.apply(estimated[i]) - reference[i]).squaredNorm();
  }
  return std::sqrt(sq / static_cast<double>(estimated.size()));
}

std::pair<double, double> mean_absolute_distance(std::span<const Vec3> estimated,
                                                 std::span<const Vec3> reference) {
  if (estimated.empty() || reference.empty()) {
    throw PreconditionError("mean_absolute_distance: empty point set");
  }
  std::vector<double> distances;
  distances.reserve(estimated.size());
  for (const Vec3& p : estimated) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : reference) {
      best = std::min(best, (p - q).squaredNorm());
    }
    distances.push_back(std::sqrt(best));
  }
  double mean = 0.0;
  for (const double dist : distances) mean += dist;
  mean /= static_cast<double>(distances.size());
  double variance = 0.0;
  for (const double dist : distances) variance += (dist - mean) * (dist - mean);
  variance /= static_cast<double>(distances.size());
  return {mean, std::sqrt(variance)};
}

double improvement_percent(double base, double ours) {
  return 100.0 * (base - ours) / base;
}

SpreadReport relative_pose_spread(const RigProblem& problem) {
  const std::vector<RelativePose> rels = reconstructed_relative_poses(problem);
  if (rels.size() < 2) {
    throw PreconditionError("relative_pose_spread: need at least 2 pairs");
  }
  const RelativePose avg = average_relative_pose(rels);
  SpreadReport report;
  Vec6 variance = Vec6::Zero();
  for (const RelativePose& rel : rels) {
    const Vec6 dev = rel.p - avg.p;
    variance += dev.cwiseProduct(dev);
    report.max_abs_deviation =
        std::max(report.max_abs_deviation, dev.cwiseAbs().maxCoeff());
  }
  variance /= static_cast<double>(rels.size());
  report.per_component_std = variance.cwiseSqrt();
  report.rms = report.per_component_std.norm();
  return report;
}

EndpointDrift endpoint_drift(std::span<const Vec3> estimated_trajectory,
                             std::span<const Vec3> truth_trajectory,
                             const SimilarityTransform& alignment,
                             const Vec3& up) {
  if (estimated_trajectory.size() != truth_trajectory.size()) {
    throw PreconditionError("endpoint_drift: trajectory length mismatch");
  }
  if (estimated_trajectory.empty()) {
    throw PreconditionError("endpoint_drift: empty trajectory");
  }
  EndpointDrift drift;
  drift.displacement =
      alignment.apply(estimated_trajectory.back()) - truth_trajectory.back();
  const Vec3 up_unit = up.normalized();
  const double vertical_component = drift.displacement.dot(up_unit);
  drift.vertical = std::abs(vertical_component);
  drift.horizontal = (drift.displacement - vertical_component * up_unit).norm();
  drift.norm = drift.displacement.norm();
  return drift;
}

PoseErrors pose_errors_after_alignment(const RigProblem& estimated,
                                       const RigProblem& truth) {
  std::vector<Vec3> est_centers, truth_centers;
  std::vector<const ImageRecord*> est_images;
  for (const ImageRecord& image : estimated.images) {
    const ImageRecord* twin = truth.find_image(image.id);
    if (twin == nullptr) {
      throw PreconditionError("pose_errors_after_alignment: image " +
                              std::to_string(image.id) + " missing from truth");
    }
    est_centers.push_back(image.pose.center);
    truth_centers.push_back(twin->pose.center);
    est_images.push_back(&image);
  }
  const SimilarityTransform t = umeyama_align(est_centers, truth_centers);

  PoseErrors errors;
  for (std::size_t i = 0; i < est_images.size(); ++i) {
    const ImageRecord* twin = truth.find_image(est_images[i]->id);
    // World frames differ by t; the estimated world->camera rotation maps
    // through the inverse of t's rotation part.
    const Rotation aligned =
        compose(est_images[i]->pose.rotation, inverse(t.rotation));
    const Rotation discrepancy = compose(aligned, inverse(twin->pose.rotation));
    errors.max_rotation_error =
        std::max(errors.max_rotation_error, discrepancy.angle());
    errors.max_center_error =
        std::max(errors.max_center_error,
                 (t.apply(est_images[i]->pose.center) - twin->pose.center).norm());
  }
  return errors;
}

DriftReport evaluate_drift(const RigProblem& estimated, const RigProblem& truth) {
  std::vector<Vec3> est_points, truth_points;
  for (const LandmarkRecord& lm : estimated.landmarks) {
    const LandmarkRecord* twin = truth.find_landmark(lm.id);
    if (twin == nullptr) {
      throw PreconditionError("evaluate_drift: landmark " + std::to_string(lm.id) +
                              " missing from reference");
    }
    est_points.push_back(lm.landmark.position);
    truth_points.push_back(twin->landmark.position);
  }
  if (est_points.size() < 3) {
    throw PreconditionError("evaluate_drift: too few common landmarks");
  }

  const SimilarityTransform t = umeyama_align(est_points, truth_points);

  DriftReport report;
  report.alignment_rms = alignment_rms(t, est_points, truth_points);
  const std::vector<Vec3> aligned = apply_similarity(t, est_points);
  const auto [mean, stddev] = mean_absolute_distance(aligned, truth_points);
  report.mad_mean = mean;
  report.mad_std = stddev;

  const std::vector<Vec3> est_traj = trajectory_centers(estimated, 0);
  const std::vector<Vec3> truth_traj = trajectory_centers(truth, 0);
  report.endpoint = endpoint_drift(est_traj, truth_traj, t);
  report.spread = relative_pose_spread(estimated);
  return report;
}

std::string drift_report_to_json(const DriftReport& report) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"mad_mean\": " << format_double(report.mad_mean) << ",\n";
  out << "  \"mad_std\": " << format_double(report.mad_std) << ",\n";
  out << "  \"endpoint_drift\": {\n";
  out << "    \"dx\": " << format_double(report.endpoint.displacement.x()) << ",\n";
  out << "    \"dy\": " << format_double(report.endpoint.displacement.y()) << ",\n";
  out << "    \"dz\": " << format_double(report.endpoint.displacement.z()) << ",\n";
  out << "    \"horizontal\": " << format_double(report.endpoint.horizontal) << ",\n";
  out << "    \"vertical\": " << format_double(report.endpoint.vertical) << ",\n";
  out << "    \"norm\": " << format_double(report.endpoint.norm) << "\n";
  out << "  },\n";
  out << "  \"relative_pose_spread\": {\n";
  out << "    \"per_component_std\": [";
  for (int k = 0; k < 6; ++k) {
    out << (k > 0 ? ", " : "") << format_double(report.spread.per_component_std[k]);
  }
  out << "],\n";
  out << "    \"max_abs_deviation\": " << format_double(report.spread.max_abs_deviation)
      << ",\n";
  out << "    \"rms\": " << format_double(report.spread.rms) << "\n";
  out << "  },\n";
  out << "  \"alignment_rms\": " << format_double(report.alignment_rms);
  if (report.improvement_percent) {
    out << ",\n  \"improvement_percent\": "
        << format_double(*report.improvement_percent);
  }
  out << "\n}\n";
  return out.str();
}

std::string drift_report_to_csv(const DriftReport& report) {
  std::ostringstream out;
  out << "metric,value\n";
  out << "mad_mean," << format_double(report.mad_mean) << "\n";
  out << "mad_std," << format_double(report.mad_std) << "\n";
  out << "endpoint_dx," << format_double(report.endpoint.displacement.x()) << "\n";
  out << "endpoint_dy," << format_double(report.endpoint.displacement.y()) << "\n";
  out << "endpoint_dz," << format_double(report.endpoint.displacement.z()) << "\n";
  out << "endpoint_horizontal," << format_double(report.endpoint.horizontal) << "\n";
  out << "endpoint_vertical," << format_double(report.endpoint.vertical) << "\n";
  out << "endpoint_norm," << format_double(report.endpoint.norm) << "\n";
  for (int k = 0; k < 6; ++k) {
    out << "spread_std_" << k << "," << format_double(report.spread.per_component_std[k])
        << "\n";
  }
  out << "spread_max_abs_deviation," << format_double(report.spread.max_abs_deviation)
      << "\n";
  out << "spread_rms," << format_double(report.spread.rms) << "\n";
  out << "alignment_rms," << format_double(report.alignment_rms) << "\n";
  if (report.improvement_percent) {
    out << "improvement_percent," << format_double(*report.improvement_percent) << "\n";
  }
  return out.str();
}

}  // namespace rigba
