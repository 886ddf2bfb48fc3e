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

#include "tplvm/optimize.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "tplvm/errors.hpp"

namespace tplvm {
namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

struct CurvaturePair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

// Two-loop recursion on the minimization problem -f. Returns a descent
// direction for -f, i.e. an ascent direction for f.
Eigen::VectorXd lbfgs_direction(const std::deque<CurvaturePair>& memory, const Eigen::VectorXd& neg_grad) {
  Eigen::VectorXd q = -neg_grad;  // gradient of -f
  std::vector<double> alpha(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    alpha[k] = memory[k].rho * memory[k].s.dot(q);
    q -= alpha[k] * memory[k].y;
  }
  if (!memory.empty()) {
    const auto& last = memory.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const double beta = memory[k].rho * memory[k].y.dot(q);
    q += (alpha[k] - beta) * memory[k].s;
  }
  return -q;
}

bool try_eval(const Objective& objective, const Eigen::VectorXd& x, ObjectiveEval& out) {
  try {
    out = objective(x);
  } catch (const NumericalError&) {
    return false;
  }
  return std::isfinite(out.value) && out.grad.allFinite();
}

}  // namespace

AscentResult maximize(const Objective& objective, Eigen::VectorXd x0, const AscentOptions& options) {
  ObjectiveEval current = objective(x0);
  if (!std::isfinite(current.value) || !current.grad.allFinite()) {
    throw InputError("objective is not finite at the initial point");
  }

  AscentResult result;
  result.x = std::move(x0);
  result.value = current.value;
  result.trace.push_back(current.value);

  std::deque<CurvaturePair> memory;
  int small_steps = 0;

  for (int iter = 0; iter < options.max_iters; ++iter) {
    Eigen::VectorXd dir = lbfgs_direction(memory, current.grad);
    double slope = dir.dot(current.grad);
    if (!(slope > 0.0) || !dir.allFinite()) {
      memory.clear();
      dir = current.grad;
      slope = dir.squaredNorm();
    }
    if (slope == 0.0) {
      result.converged = true;
      break;
    }

    double step = memory.empty() ? std::min(1.0, 1.0 / dir.lpNorm<Eigen::Infinity>()) : 1.0;
    ObjectiveEval trial;
    Eigen::VectorXd x_trial;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_trial = result.x + step * dir;
      if (try_eval(objective, x_trial, trial) && trial.value > current.value &&
          trial.value >= current.value + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }

    if (!accepted) {
      if (!memory.empty()) {
        // Retry from plain steepest ascent before giving up.
        memory.clear();
        --iter;
        continue;
      }
      // No increase is possible along the gradient at machine precision.
      result.converged = true;
      break;
    }

    const Eigen::VectorXd s = x_trial - result.x;
    const Eigen::VectorXd y = current.grad - trial.grad;  // gradient change of -f
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      memory.push_back({s, y, 1.0 / sy});
      if (static_cast<int>(memory.size()) > options.history) memory.pop_front();
    }

    const double gain = trial.value - current.value;
    result.x = std::move(x_trial);
    current = std::move(trial);
    result.value = current.value;
    result.trace.push_back(current.value);
    result.iterations = iter + 1;

    if (gain <= options.tol * std::max(1.0, std::abs(current.value))) {
      if (++small_steps >= 2) {
        result.converged = true;
        break;
      }
    } else {
      small_steps = 0;
    }
  }
  return result;
}

}  // namespace tplvm
