// Copyright 2026 The gecal Authors.
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

#include "gecal/optim.hpp"

#include <cmath>
#include <string>

#include "gecal/error.hpp"

namespace gecal {

SolveReport minimize_convex(const ObjectiveOracle& oracle, const Vector& start,
                            double grad_tol, int max_iter) {
  if (!(grad_tol > 0.0)) fail(ErrorCode::kConfig, "grad_tol must be positive");
  if (!oracle.feasible_at(start)) {
    fail(ErrorCode::kInfeasibleStart, "starting point is outside the objective domain");
  }

  SolveReport report;
  Vector x = start;
  double f = oracle.value_at(x);
  Vector grad = oracle.gradient_at(x);
  double grad_norm = sup_norm(grad);

  while (true) {
    if (grad_norm <= grad_tol) {
      report.converged = true;
      break;
    }
    if (report.iterations >= max_iter) break;

    const Matrix hess = oracle.hessian_at(x);
    SymmetricSolve newton = solve_symmetric(hess, Vector(-grad));
    Vector dir = std::isfinite(newton.shift) ? newton.solution : Vector(-grad);
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      dir = -grad;
      slope = -grad.squaredNorm();
    }

    double step = 1.0;
    int halvings = 0;
    Vector trial;
    double f_trial = 0.0;
    Vector grad_trial;
    while (true) {
      trial = x + step * dir;
      if (trial == x) {
        fail(ErrorCode::kLineSearchStall,
             "step fell below floating-point resolution (gradient norm " +
                 std::to_string(grad_norm) + ")");
      }
      if (oracle.feasible_at(trial)) {
        f_trial = oracle.value_at(trial);
        if (f_trial <= f + kArmijoConstant * step * slope) {
          grad_trial = oracle.gradient_at(trial);
          break;
        }
        // Near the optimum the predicted decrease drops below the rounding
        // noise of f; accept the step if it is flat to rounding and the
        // gradient shrinks.
        if (std::abs(f_trial - f) <= 1e-13 * std::max(1.0, std::abs(f))) {
          grad_trial = oracle.gradient_at(trial);
          if (sup_norm(grad_trial) < grad_norm) break;
        }
      } else {
        ++report.infeasible_halvings_total;
      }
      step *= 0.5;
      ++halvings;
      ++report.step_halvings_total;
      if (halvings > kMaxHalvings) {
        fail(ErrorCode::kLineSearchStall,
             "no sufficient decrease after " + std::to_string(kMaxHalvings) +
                 " halvings (gradient norm " + std::to_string(grad_norm) + ")");
      }
    }

    x = std::move(trial);
    f = f_trial;
    grad = std::move(grad_trial);
    grad_norm = sup_norm(grad);
    ++report.iterations;
  }

  report.solution = std::move(x);
  report.final_gradient_norm = grad_norm;
  return report;
}

}  // namespace gecal
