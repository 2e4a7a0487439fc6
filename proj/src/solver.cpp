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

#include "rigba/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "rigba/cost.hpp"
#include "rigba/errors.hpp"

namespace rigba {

const char* termination_reason_name(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::kGradientTolerance: return "gradient_tolerance";
    case TerminationReason::kParameterTolerance: return "parameter_tolerance";
    case TerminationReason::kCostTolerance: return "cost_tolerance";
    case TerminationReason::kMaxIterations: return "max_iterations";
  }
  return "unknown";
}

namespace {

enum class WeightMode { kGlobal, kPerPair };

enum class CenterMode { kFree, kFixed, kSphere };

struct PoseParam {
  bool rotation_fixed = false;
  CenterMode center_mode = CenterMode::kFree;
  int offset = -1;    // first column of this pose's parameters; -1 if none
  int n_params = 0;   // 6 free, 5 sphere-center, 0 fixed
  // Sphere data for the scale-gauge center.
  Vec3 sphere_origin = Vec3::Zero();
  double sphere_radius = 0.0;
  Eigen::Matrix<double, 3, 2> tangent = Eigen::Matrix<double, 3, 2>::Zero();
};

struct Layout {
  std::vector<PoseParam> poses;        // parallel to problem.images
  std::vector<int> intrinsics_offset;  // per stream; -1 when held fixed
  std::vector<int> landmark_offset;    // per landmark
  int n_params = 0;
};

// One consecutive-pair baseline term: indices into problem.images for the
// four involved poses, plus the effective weight.
struct BaselineTerm {
  int image_a_i, image_b_i;  // pair i
  int image_a_j, image_b_j;  // pair i+1
  double weight;
};

// An unfixed gauge leaves every pose free (used only for diagnostics; solve
// validates the gauge first).
Layout build_layout(const RigProblem& problem, const SolverOptions& options) {
  Layout layout;
  layout.poses.resize(problem.images.size());
  int offset = 0;

  const int anchor_index =
      problem.gauge.fixed ? problem.image_index(problem.gauge.anchor_image) : -1;
  const int scale_index =
      problem.gauge.fixed ? problem.image_index(problem.gauge.scale_image) : -1;

  for (std::size_t i = 0; i < problem.images.size(); ++i) {
    PoseParam& pp = layout.poses[i];
    if (static_cast<int>(i) == anchor_index) {
      pp.rotation_fixed = true;
      pp.center_mode = CenterMode::kFixed;
      pp.n_params = 0;
      continue;
    }
    pp.offset = offset;
    if (static_cast<int>(i) == scale_index) {
      pp.center_mode = CenterMode::kSphere;
      pp.sphere_origin = problem.images[anchor_index].pose.center;
      pp.sphere_radius = problem.gauge.baseline_distance;
      pp.n_params = 5;  // 3 rotation + 2 sphere tangent
    } else {
      pp.n_params = 6;
    }
    offset += pp.n_params;
  }

  layout.intrinsics_offset.assign(problem.streams.size(), -1);
  if (options.refine_intrinsics) {
    for (std::size_t s = 0; s < problem.streams.size(); ++s) {
      layout.intrinsics_offset[s] = offset;
      offset += 5;
    }
  }

  layout.landmark_offset.resize(problem.landmarks.size());
  for (std::size_t l = 0; l < problem.landmarks.size(); ++l) {
    layout.landmark_offset[l] = offset;
    offset += 3;
  }
  layout.n_params = offset;
  return layout;
}

// Orthonormal tangent basis of the unit sphere at u.
Eigen::Matrix<double, 3, 2> sphere_tangent_basis(const Vec3& u) {
  int smallest = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(u[i]) < std::abs(u[smallest])) smallest = i;
  }
  const Vec3 e1 = u.cross(Vec3::Unit(smallest)).normalized();
  const Vec3 e2 = u.cross(e1);
  Eigen::Matrix<double, 3, 2> basis;
  basis.col(0) = e1;
  basis.col(1) = e2;
  return basis;
}

// Re-projects the scale-gauge center onto its sphere and refreshes the
// tangent bases used for the next linearization.
void refresh_sphere_parameterizations(RigProblem& problem, Layout& layout) {
  for (std::size_t i = 0; i < problem.images.size(); ++i) {
    PoseParam& pp = layout.poses[i];
    if (pp.center_mode != CenterMode::kSphere) continue;
    Vec3& center = problem.images[i].pose.center;
    const Vec3 u = (center - pp.sphere_origin).normalized();
    center = pp.sphere_origin + pp.sphere_radius * u;
    pp.tangent = sphere_tangent_basis(u);
  }
}

std::vector<BaselineTerm> build_baseline_terms(const RigProblem& problem,
                                               WeightMode mode,
                                               double global_term_weight) {
  std::vector<BaselineTerm> terms;
  const std::vector<const RigPair*> pairs = reconstructed_pairs(problem);
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    BaselineTerm term;
    term.image_a_i = problem.image_index(pairs[i]->image_a);
    term.image_b_i = problem.image_index(pairs[i]->image_b);
    term.image_a_j = problem.image_index(pairs[i + 1]->image_a);
    term.image_b_j = problem.image_index(pairs[i + 1]->image_b);
    term.weight = mode == WeightMode::kGlobal ? global_term_weight : pairs[i]->lambda;
    terms.push_back(term);
  }
  return terms;
}

struct Evaluation {
  double cost_reproj = 0.0;
  double cost_baseline = 0.0;  // unweighted
  double total = 0.0;          // reproj + weighted baseline
  int dropped = 0;
};

Evaluation evaluate_total(const RigProblem& problem,
                          std::span<const BaselineTerm> terms) {
  Evaluation ev;
  const ReprojectionCost rc = evaluate_reprojection_cost(problem);
  ev.cost_reproj = rc.cost;
  ev.dropped = rc.dropped_observations;
  ev.total = rc.cost;
  const Vec6& scale = problem.weights.component_scale;
  for (const BaselineTerm& term : terms) {
    const RelativePose rel_i =
        compute_relative_pose(problem.images[term.image_a_i].pose,
                              problem.images[term.image_b_i].pose);
    const RelativePose rel_j =
        compute_relative_pose(problem.images[term.image_a_j].pose,
                              problem.images[term.image_b_j].pose);
    const Vec6 diff = baseline_residual(rel_i, rel_j);
    ev.cost_baseline += 0.5 * diff.squaredNorm();
    ev.total += 0.5 * term.weight * scale.cwiseProduct(diff).squaredNorm();
  }
  return ev;
}

// Scatters w * (J_a^T J_b) over every ordered block pair and w * J^T r into
// the gradient.
struct BlockRef {
  int offset;
  Eigen::MatrixXd jacobian;  // residual_dim x block_size
};

void accumulate_blocks(const std::vector<BlockRef>& blocks, const Eigen::VectorXd& residual,
                       double weight, std::vector<Eigen::Triplet<double>>* triplets,
                       Eigen::VectorXd* gradient) {
  for (const BlockRef& a : blocks) {
    gradient->segment(a.offset, a.jacobian.cols()) +=
        weight * a.jacobian.transpose() * residual;
    for (const BlockRef& b : blocks) {
      const Eigen::MatrixXd h = weight * a.jacobian.transpose() * b.jacobian;
      for (int r = 0; r < h.rows(); ++r) {
        for (int c = 0; c < h.cols(); ++c) {
          triplets->emplace_back(a.offset + r, b.offset + c, h(r, c));
        }
      }
    }
  }
}

// Maps a residual jacobian w.r.t. a raw pose ([dtheta | dcenter]) into the
// pose's free columns under the gauge parameterization.
void append_pose_block(const PoseParam& pp, const Eigen::MatrixXd& jac_pose,
                       std::vector<BlockRef>* blocks) {
  if (pp.n_params == 0) return;
  Eigen::MatrixXd mapped(jac_pose.rows(), pp.n_params);
  mapped.leftCols<3>() = jac_pose.leftCols<3>();
  if (pp.center_mode == CenterMode::kSphere) {
    mapped.rightCols<2>() =
        jac_pose.rightCols<3>() * (pp.sphere_radius * pp.tangent);
  } else {
    mapped.rightCols<3>() = jac_pose.rightCols<3>();
  }
  blocks->push_back({pp.offset, std::move(mapped)});
}

struct AssembledSystem {
  Eigen::SparseMatrix<double> normal_matrix;
  Eigen::VectorXd gradient;
  int dropped = 0;
};

AssembledSystem assemble(const RigProblem& problem, const Layout& layout,
                         std::span<const BaselineTerm> terms) {
  AssembledSystem sys;
  sys.gradient = Eigen::VectorXd::Zero(layout.n_params);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(problem.observations.size() * 196 + terms.size() * 576 +
                   layout.n_params);

  for (const Observation& obs : problem.observations) {
    const int image_i = problem.image_index(obs.image_id);
    const int landmark_i = problem.landmark_index(obs.landmark_id);
    const ImageRecord& image = problem.images[image_i];
    const int stream_i = problem.stream_index(image.stream_id);
    const LandmarkRecord& lm = problem.landmarks[landmark_i];
    const Intrinsics& k = problem.streams[stream_i].intrinsics;

    Vec2 residual;
    ReprojectionJacobians jac;
    if (!evaluate_reprojection(obs.pixel, image.pose, lm.landmark.position, k,
                               &residual, &jac)) {
      ++sys.dropped;
      continue;
    }
    const double w = huber_weight(residual.squaredNorm(), problem.loss.huber_delta);

    std::vector<BlockRef> blocks;
    append_pose_block(layout.poses[image_i], jac.pose, &blocks);
    blocks.push_back({layout.landmark_offset[landmark_i], jac.landmark});
    if (layout.intrinsics_offset[stream_i] >= 0) {
      blocks.push_back({layout.intrinsics_offset[stream_i], jac.intrinsics});
    }
    accumulate_blocks(blocks, residual, w, &triplets, &sys.gradient);
  }

  const Vec6& scale = problem.weights.component_scale;
  for (const BaselineTerm& term : terms) {
    const CameraPose& pose_a_i = problem.images[term.image_a_i].pose;
    const CameraPose& pose_b_i = problem.images[term.image_b_i].pose;
    const CameraPose& pose_a_j = problem.images[term.image_a_j].pose;
    const CameraPose& pose_b_j = problem.images[term.image_b_j].pose;

    const RelativePose rel_i = compute_relative_pose(pose_a_i, pose_b_i);
    const RelativePose rel_j = compute_relative_pose(pose_a_j, pose_b_j);
    const Vec6 residual = scale.cwiseProduct(baseline_residual(rel_i, rel_j));

    const RelativePoseJacobians jac_i = relative_pose_jacobians(pose_a_i, pose_b_i);
    const RelativePoseJacobians jac_j = relative_pose_jacobians(pose_a_j, pose_b_j);

    std::vector<BlockRef> blocks;
    append_pose_block(layout.poses[term.image_a_i],
                      scale.asDiagonal() * jac_i.pose_a, &blocks);
    append_pose_block(layout.poses[term.image_b_i],
                      scale.asDiagonal() * jac_i.pose_b, &blocks);
    append_pose_block(layout.poses[term.image_a_j],
                      -(scale.asDiagonal() * jac_j.pose_a), &blocks);
    append_pose_block(layout.poses[term.image_b_j],
                      -(scale.asDiagonal() * jac_j.pose_b), &blocks);
    accumulate_blocks(blocks, residual, term.weight, &triplets, &sys.gradient);
  }

  // Structurally present diagonal so damping can always be applied.
  for (int i = 0; i < layout.n_params; ++i) {
    triplets.emplace_back(i, i, 0.0);
  }

  sys.normal_matrix.resize(layout.n_params, layout.n_params);
  sys.normal_matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

// Snapshot of every mutable parameter, for rejected-step rollback.
struct ParameterState {
  std::vector<CameraPose> poses;
  std::vector<Vec3> landmarks;
  std::vector<Intrinsics> intrinsics;
};

ParameterState save_state(const RigProblem& problem) {
  ParameterState s;
  s.poses.reserve(problem.images.size());
  for (const ImageRecord& im : problem.images) s.poses.push_back(im.pose);
  s.landmarks.reserve(problem.landmarks.size());
  for (const LandmarkRecord& lm : problem.landmarks)
    s.landmarks.push_back(lm.landmark.position);
  s.intrinsics.reserve(problem.streams.size());
  for (const CameraStream& st : problem.streams) s.intrinsics.push_back(st.intrinsics);
  return s;
}

void restore_state(RigProblem& problem, const ParameterState& s) {
  for (std::size_t i = 0; i < problem.images.size(); ++i)
    problem.images[i].pose = s.poses[i];
  for (std::size_t i = 0; i < problem.landmarks.size(); ++i)
    problem.landmarks[i].landmark.position = s.landmarks[i];
  for (std::size_t i = 0; i < problem.streams.size(); ++i)
    problem.streams[i].intrinsics = s.intrinsics[i];
}

void apply_step(RigProblem& problem, const Layout& layout,
                const Eigen::VectorXd& delta) {
  for (std::size_t i = 0; i < problem.images.size(); ++i) {
    const PoseParam& pp = layout.poses[i];
    if (pp.n_params == 0) continue;
    CameraPose& pose = problem.images[i].pose;
    const Vec3 dtheta = delta.segment<3>(pp.offset);
    pose.rotation = compose(Rotation(dtheta), pose.rotation);
    if (pp.center_mode == CenterMode::kSphere) {
      const Eigen::Vector2d dt = delta.segment<2>(pp.offset + 3);
      const Vec3 u = (pose.center - pp.sphere_origin).normalized();
      const Vec3 u_new = (u + pp.tangent * dt).normalized();
      pose.center = pp.sphere_origin + pp.sphere_radius * u_new;
    } else {
      pose.center += delta.segment<3>(pp.offset + 3);
    }
  }
  for (std::size_t s = 0; s < problem.streams.size(); ++s) {
    if (layout.intrinsics_offset[s] < 0) continue;
    Intrinsics& k = problem.streams[s].intrinsics;
    const int off = layout.intrinsics_offset[s];
    k.focal += delta[off];
    k.principal_point.x() += delta[off + 1];
    k.principal_point.y() += delta[off + 2];
    k.radial.x() += delta[off + 3];
    k.radial.y() += delta[off + 4];
  }
  for (std::size_t l = 0; l < problem.landmarks.size(); ++l) {
    problem.landmarks[l].landmark.position +=
        delta.segment<3>(layout.landmark_offset[l]);
  }
}

double parameter_norm(const RigProblem& problem) {
  double sq = 0.0;
  for (const ImageRecord& im : problem.images) {
    sq += im.pose.rotation.axis_angle().squaredNorm();
    sq += im.pose.center.squaredNorm();
  }
  for (const LandmarkRecord& lm : problem.landmarks)
    sq += lm.landmark.position.squaredNorm();
  for (const CameraStream& st : problem.streams) {
    sq += st.intrinsics.focal * st.intrinsics.focal;
    sq += st.intrinsics.principal_point.squaredNorm();
    sq += st.intrinsics.radial.squaredNorm();
  }
  return std::sqrt(sq);
}

void validate_gauge(const RigProblem& problem) {
  if (!problem.gauge.fixed) {
    throw PreconditionError("solve: gauge not fixed (call fix_gauge first)");
  }
  if (problem.find_image(problem.gauge.anchor_image) == nullptr ||
      problem.find_image(problem.gauge.scale_image) == nullptr) {
    throw PreconditionError("solve: gauge references missing images");
  }
  if (!(problem.gauge.baseline_distance > 0.0)) {
    throw PreconditionError("solve: gauge baseline distance must be positive");
  }
}

SolveReport solve_impl(RigProblem& problem, const SolverOptions& options,
                       WeightMode mode) {
  validate_gauge(problem);
  if (problem.observations.empty()) {
    throw PreconditionError("solve: problem has no observations");
  }
  refresh_pair_counts(problem);

  double global_term_weight = 0.0;
  if (mode == WeightMode::kGlobal && !options.disable_rig_constraint &&
      problem.weights.n_total_pairs > 0) {
    global_term_weight = global_weight(problem.weights);
  }
  std::vector<BaselineTerm> terms;
  const bool baseline_active =
      !options.disable_rig_constraint &&
      (mode == WeightMode::kPerPair || global_term_weight != 0.0);
  if (baseline_active) {
    terms = build_baseline_terms(problem, mode, global_term_weight);
  }
  double trace_weight = global_term_weight;
  if (mode == WeightMode::kPerPair && !terms.empty()) {
    double sum = 0.0;
    for (const BaselineTerm& t : terms) sum += t.weight;
    trace_weight = sum / static_cast<double>(terms.size());
  }

  Layout layout = build_layout(problem, options);

  SolveReport report;
  Evaluation current = evaluate_total(problem, terms);
  report.initial_cost_reproj = current.cost_reproj;
  report.initial_cost_baseline = current.cost_baseline;

  double damping = options.initial_damping;
  bool relinearize = true;
  AssembledSystem sys;
  report.termination = TerminationReason::kMaxIterations;

  int iteration = 0;
  while (iteration < options.max_iterations) {
    ++iteration;
    if (relinearize) {
      refresh_sphere_parameterizations(problem, layout);
      sys = assemble(problem, layout, terms);
      if (sys.gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
        report.termination = TerminationReason::kGradientTolerance;
        report.converged = true;
        break;
      }
    }

    // Marquardt scaling: damp with the clamped diagonal of the normal matrix.
    Eigen::VectorXd diag = sys.normal_matrix.diagonal().cwiseMax(1e-12);
    Eigen::VectorXd delta;
    while (true) {
      Eigen::SparseMatrix<double> damped = sys.normal_matrix;
      for (int i = 0; i < layout.n_params; ++i) {
        damped.coeffRef(i, i) += damping * diag[i];
      }
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(damped);
      if (ldlt.info() == Eigen::Success) {
        delta = ldlt.solve(-sys.gradient);
        if (ldlt.info() == Eigen::Success && delta.allFinite()) {
          break;
        }
      }
      damping *= options.damping_increase;
      if (damping > options.max_damping) {
        throw NumericalFailure(
            "normal-equations solve failed after damping escalation");
      }
    }

    const double step_norm = delta.norm();
    const double pnorm_before = parameter_norm(problem);
    const ParameterState backup = save_state(problem);
    apply_step(problem, layout, delta);
    const Evaluation candidate = evaluate_total(problem, terms);

    IterationRecord record;
    record.iteration = iteration;
    record.cost_reproj = candidate.cost_reproj;
    record.cost_baseline = candidate.cost_baseline;
    record.effective_weight = trace_weight;
    record.damping = damping;
    record.step_norm = step_norm;
    record.accepted = candidate.total <= current.total;
    report.iterations.push_back(record);

    if (record.accepted) {
      const double cost_change = current.total - candidate.total;
      current = candidate;
      ++report.n_accepted_steps;
      damping *= options.damping_decrease;
      relinearize = true;
      if (cost_change <= options.cost_tolerance * (1.0 + current.total)) {
        report.termination = TerminationReason::kCostTolerance;
        report.converged = true;
        break;
      }
      if (step_norm <=
          options.parameter_tolerance * (pnorm_before + options.parameter_tolerance)) {
        report.termination = TerminationReason::kParameterTolerance;
        report.converged = true;
        break;
      }
    } else {
      restore_state(problem, backup);
      // A rejected step too small to change the parameters means the
      // quadratic model cannot improve on the current point.
      if (step_norm <=
          options.parameter_tolerance * (pnorm_before + options.parameter_tolerance)) {
        report.termination = TerminationReason::kParameterTolerance;
        report.converged = true;
        break;
      }
      damping *= options.damping_increase;
      if (damping > options.max_damping) {
        throw NumericalFailure("no acceptable step below maximum damping");
      }
      relinearize = false;
    }
  }

  const Evaluation final_eval = evaluate_total(problem, terms);
  report.final_cost_reproj = final_eval.cost_reproj;
  report.final_cost_baseline = final_eval.cost_baseline;
  report.final_total_cost = final_eval.total;
  report.dropped_observations = final_eval.dropped;
  return report;
}

}  // namespace

GaugeConfig fix_gauge(RigProblem& problem) {
  if (problem.images.size() < 2) {
    throw PreconditionError("fix_gauge: need at least 2 posed images");
  }
  const std::vector<const RigPair*> pairs = reconstructed_pairs(problem);
  if (pairs.empty()) {
    throw PreconditionError("fix_gauge: no reconstructed rig pair to anchor");
  }
  const RigPair& first = *pairs.front();
  const Vec3 center_a = problem.find_image(first.image_a)->pose.center;
  const Vec3 center_b = problem.find_image(first.image_b)->pose.center;
  const double distance = (center_b - center_a).norm();
  if (!(distance > 0.0)) {
    throw DegenerateConfiguration("fix_gauge: coincident first-pair centers");
  }
  problem.gauge.fixed = true;
  problem.gauge.anchor_image = first.image_a;
  problem.gauge.scale_image = first.image_b;
  problem.gauge.baseline_distance = distance;
  return problem.gauge;
}

SolveReport solve(RigProblem& problem, const SolverOptions& options) {
  return solve_impl(problem, options, WeightMode::kGlobal);
}

SolveReport final_full_iteration(RigProblem& problem, const SolverOptions& options) {
  refresh_pair_counts(problem);
  if (problem.weights.n_reconstructed_pairs < problem.weights.n_total_pairs) {
    throw PreconditionError(
        "final_full_iteration: all pairs must be reconstructed (N_p = N_t)");
  }
  const std::vector<RelativePose> rels = reconstructed_relative_poses(problem);
  if (rels.empty()) {
    throw PreconditionError("final_full_iteration: no reconstructed pairs");
  }
  const RelativePose avg = average_relative_pose(rels);
  std::size_t rel_index = 0;
  for (RigPair& pair : problem.pairs) {
    if (problem.find_image(pair.image_a) == nullptr ||
        problem.find_image(pair.image_b) == nullptr) {
      continue;
    }
    pair.lambda = per_pair_weight(rels[rel_index], avg, problem.weights);
    ++rel_index;
  }
  return solve_impl(problem, options, WeightMode::kPerPair);
}

double refine_pose_resection(CameraPose& pose,
                             std::span<const Correspondence2D3D> matches,
                             const Intrinsics& k, int max_iterations) {
  if (matches.size() < 3) {
    throw PreconditionError("refine_pose_resection: need at least 3 matches");
  }

  const auto evaluate_cost = [&](const CameraPose& p) {
    double cost = 0.0;
    for (const Correspondence2D3D& m : matches) {
      Vec2 residual;
      if (evaluate_reprojection(m.pixel, p, m.point, k, &residual, nullptr)) {
        cost += 0.5 * residual.squaredNorm();
      } else {
        cost += 1e12;  // behind the camera: strongly reject
      }
    }
    return cost;
  };

  double damping = 1e-6;
  double cost = evaluate_cost(pose);
  for (int iter = 0; iter < max_iterations; ++iter) {
    Mat6 h = Mat6::Zero();
    Vec6 g = Vec6::Zero();
    for (const Correspondence2D3D& m : matches) {
      Vec2 residual;
      ReprojectionJacobians jac;
      if (!evaluate_reprojection(m.pixel, pose, m.point, k, &residual, &jac)) {
        continue;
      }
      h += jac.pose.transpose() * jac.pose;
      g += jac.pose.transpose() * residual;
    }
    if (g.lpNorm<Eigen::Infinity>() < 1e-12) break;

    bool stepped = false;
    for (int attempt = 0; attempt < 24 && !stepped; ++attempt) {
      Mat6 damped = h;
      damped.diagonal() += damping * h.diagonal().cwiseMax(1e-12);
      const Vec6 delta = damped.ldlt().solve(-g);
      CameraPose candidate = pose;
      candidate.rotation = compose(Rotation(delta.head<3>()), candidate.rotation);
      candidate.center += delta.tail<3>();
      const double candidate_cost = evaluate_cost(candidate);
      if (candidate_cost <= cost && delta.allFinite()) {
        const double change = cost - candidate_cost;
        pose = candidate;
        cost = candidate_cost;
        damping = std::max(damping * 0.5, 1e-12);
        stepped = true;
        if (change <= 1e-14 * (1.0 + cost)) {
          iter = max_iterations;  // converged
        }
      } else {
        damping *= 10.0;
      }
    }
    if (!stepped) break;
  }
  return std::sqrt(2.0 * cost / static_cast<double>(matches.size()));
}

std::optional<Vec3> triangulate_two_view(const CameraPose& pose_a,
                                         const Intrinsics& k_a, const Vec2& pixel_a,
                                         const CameraPose& pose_b,
                                         const Intrinsics& k_b, const Vec2& pixel_b) {
  const Vec2 n_a = undistort_to_normalized(k_a, pixel_a);
  const Vec2 n_b = undistort_to_normalized(k_b, pixel_b);
  const Mat3 rot_a = pose_a.rotation.matrix();
  const Mat3 rot_b = pose_b.rotation.matrix();

  Eigen::Matrix<double, 4, 3> a;
  Eigen::Vector4d rhs;
  a.row(0) = rot_a.row(0) - n_a.x() * rot_a.row(2);
  a.row(1) = rot_a.row(1) - n_a.y() * rot_a.row(2);
  a.row(2) = rot_b.row(0) - n_b.x() * rot_b.row(2);
  a.row(3) = rot_b.row(1) - n_b.y() * rot_b.row(2);
  rhs[0] = a.row(0).dot(pose_a.center);
  rhs[1] = a.row(1).dot(pose_a.center);
  rhs[2] = a.row(2).dot(pose_b.center);
  rhs[3] = a.row(3).dot(pose_b.center);

  const Vec3 point = a.colPivHouseholderQr().solve(rhs);
  if (!point.allFinite()) {
    return std::nullopt;
  }
  if (pose_a.to_camera(point).z() <= kDepthEpsilon ||
      pose_b.to_camera(point).z() <= kDepthEpsilon) {
    return std::nullopt;
  }
  return point;
}

GrowResult grow_problem(RigProblem& active, const RigProblem& dataset,
                        int time_index, const SolverOptions& options) {
  GrowResult result;

  const RigPair* pair = nullptr;
  for (const RigPair& candidate : dataset.pairs) {
    if (candidate.time_index == time_index) {
      pair = &candidate;
      break;
    }
  }
  if (pair == nullptr) {
    result.status = GrowStatus::kUnknownTimeIndex;
    return result;
  }
  if (active.find_image(pair->image_a) != nullptr &&
      active.find_image(pair->image_b) != nullptr) {
    result.status = GrowStatus::kAlreadyPresent;
    return result;
  }

  const ImageRecord* source_a = dataset.find_image(pair->image_a);
  const ImageRecord* source_b = dataset.find_image(pair->image_b);
  const bool bootstrap = active.images.empty();

  if (bootstrap) {
    active.streams = dataset.streams;
    active.weights = dataset.weights;
    active.weights.n_total_pairs = static_cast<int>(dataset.pairs.size());
    active.loss = dataset.loss;
    active.rebuild_index();
  }

  ImageRecord image_a = *source_a;
  ImageRecord image_b = *source_b;

  if (!bootstrap) {
    // 2D-3D matches against the landmarks already reconstructed.
    std::vector<Correspondence2D3D> matches_a, matches_b;
    for (const Observation& obs : dataset.observations) {
      if (obs.image_id != image_a.id && obs.image_id != image_b.id) continue;
      const LandmarkRecord* lm = active.find_landmark(obs.landmark_id);
      if (lm == nullptr) continue;
      if (obs.image_id == image_a.id) {
        matches_a.push_back({obs.pixel, lm->landmark.position});
      } else {
        matches_b.push_back({obs.pixel, lm->landmark.position});
      }
    }

    // An image short on 2D-3D matches may still enter if it brings enough
    // landmarks that become two-view triangulable once it is added; its
    // dataset pose is used unrefined.
    const auto triangulable_count = [&](const ImageRecord& image) {
      std::unordered_set<LandmarkId> observed_by_image;
      std::unordered_map<LandmarkId, int> co_views;
      for (const Observation& obs : dataset.observations) {
        if (active.find_landmark(obs.landmark_id) != nullptr) continue;
        const bool relevant = obs.image_id == image.id ||
                              active.find_image(obs.image_id) != nullptr ||
                              obs.image_id == image_a.id ||
                              obs.image_id == image_b.id;
        if (!relevant) continue;
        co_views[obs.landmark_id]++;
        if (obs.image_id == image.id) observed_by_image.insert(obs.landmark_id);
      }
      int count = 0;
      for (const LandmarkId id : observed_by_image) {
        if (co_views[id] >= 2) ++count;
      }
      return count;
    };

    const bool a_resectable = matches_a.size() >= 6;
    const bool b_resectable = matches_b.size() >= 6;
    if ((!a_resectable && triangulable_count(image_a) < 6) ||
        (!b_resectable && triangulable_count(image_b) < 6)) {
      result.status = GrowStatus::kInsufficientOverlap;
      return result;
    }
    if (a_resectable) {
      const Intrinsics& k_a = active.find_stream(image_a.stream_id)->intrinsics;
      result.resection_rms_a = refine_pose_resection(image_a.pose, matches_a, k_a);
    }
    if (b_resectable) {
      const Intrinsics& k_b = active.find_stream(image_b.stream_id)->intrinsics;
      result.resection_rms_b = refine_pose_resection(image_b.pose, matches_b, k_b);
    }
  }

  active.add_image(image_a);
  active.add_image(image_b);
  active.add_pair({pair->time_index, pair->image_a, pair->image_b, 0.0});

  // Observations of the two new images against already-active landmarks.
  for (const Observation& obs : dataset.observations) {
    if ((obs.image_id == image_a.id || obs.image_id == image_b.id) &&
        active.find_landmark(obs.landmark_id) != nullptr) {
      active.add_observation(obs);
      ++result.n_new_observations;
    }
  }

  // Landmarks that just became triangulable: initialize from their two
  // widest-baseline active views.
  std::unordered_map<LandmarkId, std::vector<const Observation*>> views;
  for (const Observation& obs : dataset.observations) {
    if (active.find_landmark(obs.landmark_id) != nullptr) continue;
    if (active.find_image(obs.image_id) == nullptr) continue;
    views[obs.landmark_id].push_back(&obs);
  }
  std::vector<LandmarkId> candidates;
  candidates.reserve(views.size());
  for (const auto& [lm_id, obs_list] : views) {
    if (obs_list.size() >= 2) candidates.push_back(lm_id);
  }
  std::sort(candidates.begin(), candidates.end());

  for (const LandmarkId lm_id : candidates) {
    const std::vector<const Observation*>& obs_list = views[lm_id];
    const Observation* best_u = nullptr;
    const Observation* best_v = nullptr;
    double best_baseline = -1.0;
    for (std::size_t u = 0; u < obs_list.size(); ++u) {
      for (std::size_t v = u + 1; v < obs_list.size(); ++v) {
        const Vec3 cu = active.find_image(obs_list[u]->image_id)->pose.center;
        const Vec3 cv = active.find_image(obs_list[v]->image_id)->pose.center;
        const double baseline = (cu - cv).norm();
        if (baseline > best_baseline) {
          best_baseline = baseline;
          best_u = obs_list[u];
          best_v = obs_list[v];
        }
      }
    }
    const ImageRecord* view_u = active.find_image(best_u->image_id);
    const ImageRecord* view_v = active.find_image(best_v->image_id);
    std::optional<Vec3> point = triangulate_two_view(
        view_u->pose, active.find_stream(view_u->stream_id)->intrinsics,
        best_u->pixel, view_v->pose,
        active.find_stream(view_v->stream_id)->intrinsics, best_v->pixel);
    if (!point) {
      // Fall back to the dataset's initial value when it is usable.
      const Vec3 fallback = dataset.find_landmark(lm_id)->landmark.position;
      if (view_u->pose.to_camera(fallback).z() > kDepthEpsilon &&
          view_v->pose.to_camera(fallback).z() > kDepthEpsilon) {
        point = fallback;
      }
    }
    if (!point) continue;  // may triangulate once later frames arrive

    active.add_landmark({lm_id, Landmark{*point}});
    ++result.n_new_landmarks;
    for (const Observation* obs : obs_list) {
      active.add_observation(*obs);
      ++result.n_new_observations;
    }
  }

  refresh_pair_counts(active);
  if (!active.gauge.fixed) {
    fix_gauge(active);
  }
  result.solve_report = solve(active, options);
  result.status = GrowStatus::kAdded;
  return result;
}

std::vector<ParameterBlockInfo> describe_parameter_blocks(
    const RigProblem& problem, const SolverOptions& options) {
  const Layout layout = build_layout(problem, options);
  std::vector<ParameterBlockInfo> blocks;
  for (std::size_t i = 0; i < problem.images.size(); ++i) {
    if (layout.poses[i].n_params == 0) continue;
    blocks.push_back({"pose:" + std::to_string(problem.images[i].id),
                      layout.poses[i].offset, layout.poses[i].n_params});
  }
  for (std::size_t s = 0; s < problem.streams.size(); ++s) {
    if (layout.intrinsics_offset[s] < 0) continue;
    blocks.push_back({"intrinsics:" + std::to_string(problem.streams[s].id),
                      layout.intrinsics_offset[s], 5});
  }
  for (std::size_t l = 0; l < problem.landmarks.size(); ++l) {
    blocks.push_back({"landmark:" + std::to_string(problem.landmarks[l].id),
                      layout.landmark_offset[l], 3});
  }
  return blocks;
}

std::vector<ResidualBlockStructure> audit_structure(const RigProblem& problem,
                                                    const SolverOptions& options) {
  std::vector<ResidualBlockStructure> out;
  for (const Observation& obs : problem.observations) {
    ResidualBlockStructure block;
    block.kind = ResidualBlockStructure::Kind::kReprojection;
    block.parameter_blocks.push_back("pose:" + std::to_string(obs.image_id));
    block.parameter_blocks.push_back("landmark:" + std::to_string(obs.landmark_id));
    const ImageRecord* image = problem.find_image(obs.image_id);
    if (options.refine_intrinsics) {
      block.parameter_blocks.push_back("intrinsics:" +
                                       std::to_string(image->stream_id));
    }
    out.push_back(std::move(block));
  }
  const std::vector<const RigPair*> pairs = reconstructed_pairs(problem);
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    ResidualBlockStructure block;
    block.kind = ResidualBlockStructure::Kind::kBaseline;
    block.parameter_blocks.push_back("pose:" + std::to_string(pairs[i]->image_a));
    block.parameter_blocks.push_back("pose:" + std::to_string(pairs[i]->image_b));
    block.parameter_blocks.push_back("pose:" + std::to_string(pairs[i + 1]->image_a));
    block.parameter_blocks.push_back("pose:" + std::to_string(pairs[i + 1]->image_b));
    out.push_back(std::move(block));
  }
  return out;
}

Eigen::SparseMatrix<double> assemble_normal_matrix(const RigProblem& problem,
                                                   const SolverOptions& options) {
  RigProblem copy = problem;
  copy.rebuild_index();
  refresh_pair_counts(copy);
  double weight = 0.0;
  if (!options.disable_rig_constraint && copy.weights.n_total_pairs > 0) {
    weight = global_weight(copy.weights);
  }
  std::vector<BaselineTerm> terms;
  if (!options.disable_rig_constraint && weight != 0.0) {
    terms = build_baseline_terms(copy, WeightMode::kGlobal, weight);
  }
  Layout layout = build_layout(copy, options);
  refresh_sphere_parameterizations(copy, layout);
  const AssembledSystem sys = assemble(copy, layout, terms);
  return sys.normal_matrix;
}

}  // namespace rigba
