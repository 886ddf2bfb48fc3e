// Copyright 2026 The tplvm Authors.
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

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace tplvm {

struct AscentOptions {
  int max_iters = 2000;
  /// Converged once the objective gain per step stays below tol * max(1, |f|)
  /// for two consecutive accepted steps.
  double tol = 1e-8;
  /// Number of curvature pairs kept for the quasi-Newton direction.
  int history = 8;
};

struct ObjectiveEval {
  double value;
  Eigen::VectorXd grad;
};

/// An objective may throw tplvm::NumericalError at points where it cannot be
/// evaluated; the line search treats those as rejected trial points.
using Objective = std::function<ObjectiveEval(const Eigen::VectorXd&)>;

struct AscentResult {
  Eigen::VectorXd x;
  double value = 0.0;
  std::vector<double> trace;  // objective after each accepted step, starting at x0
  bool converged = false;
  int iterations = 0;
};

/// Deterministic gradient ascent with limited-memory quasi-Newton directions
/// and Armijo backtracking. Every accepted step strictly increases the
/// objective, so `trace` is non-decreasing. Throws InputError if the
/// objective is not finite at x0.
AscentResult maximize(const Objective& objective, Eigen::VectorXd x0, const AscentOptions& options);

}  // namespace tplvm
