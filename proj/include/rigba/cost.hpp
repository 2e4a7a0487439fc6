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

#include "rigba/geometry.hpp"
#include "rigba/types.hpp"

namespace rigba {

class RigProblem;

// Huber loss applied to a squared residual norm s:
//   rho(s) = s                        for s <= delta^2
//   rho(s) = 2*delta*sqrt(s) - delta^2 for s >  delta^2
// Value and first derivative are continuous at the switch. Throws
// std::domain_error for s < 0 or delta <= 0.
double huber_rho(double s, double delta);

// d rho / d s; the IRLS weight of a residual block.
double huber_weight(double s, double delta);

// x_ij - pi(R_j (X_i - c_j)). Throws CheiralityViolation.
Vec2 reprojection_residual(const Observation& obs, const CameraPose& pose,
                           const Landmark& landmark, const Intrinsics& k);

// Partial derivatives of the 2-vector reprojection residual in the solver's
// local parameterization: pose columns are [dtheta(3) | dcenter(3)] with the
// rotation updated as exp(dtheta) * R; intrinsics columns are
// [focal, cx, cy, k1, k2].
struct ReprojectionJacobians {
  Eigen::Matrix<double, 2, 6> pose;
  Eigen::Matrix<double, 2, 3> landmark;
  Eigen::Matrix<double, 2, 5> intrinsics;
};

// Evaluates the residual and, when jacobians is non-null, its analytic
// derivatives. Returns false on a cheirality violation (outputs untouched).
bool evaluate_reprojection(const Vec2& pixel, const CameraPose& pose,
                           const Vec3& point, const Intrinsics& k,
                           Vec2* residual, ReprojectionJacobians* jacobians);

struct ReprojectionCost {
  double cost = 0.0;
  int dropped_observations = 0;  // cheirality-violating, excluded from cost
};

// E_reproj = 1/2 sum rho(||residual||^2) over all observations that pass
// cheirality at the current parameters.
ReprojectionCost evaluate_reprojection_cost(const RigProblem& problem);

}  // namespace rigba
