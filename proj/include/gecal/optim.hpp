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

#ifndef GECAL_OPTIM_HPP
#define GECAL_OPTIM_HPP

#include <functional>

#include "gecal/linalg.hpp"

namespace gecal {

// Smooth convex objective restricted to an open domain. `feasible_at` must be
// checked before any of the other callbacks is evaluated at a point.
struct ObjectiveOracle {
  std::function<double(const Vector&)> value_at;
  std::function<Vector(const Vector&)> gradient_at;
  std::function<Matrix(const Vector&)> hessian_at;
  std::function<bool(const Vector&)> feasible_at = [](const Vector&) { return true; };
};

struct SolveReport {
  Vector solution;
  int iterations = 0;
  double final_gradient_norm = 0.0;  // sup norm
  bool converged = false;
  int step_halvings_total = 0;
  int infeasible_halvings_total = 0;
};

inline constexpr double kArmijoConstant = 1e-4;
inline constexpr int kMaxHalvings = 60;

// Damped Newton with Armijo backtracking (halving), extra halvings on
// infeasible trial points and a Levenberg shift when H is not positive
// definite. Stops when ||grad||_inf <= grad_tol. Throws InfeasibleStart and
// LineSearchStall; running out of iterations returns converged = false.
SolveReport minimize_convex(const ObjectiveOracle& oracle, const Vector& start,
                            double grad_tol, int max_iter);

}  // namespace gecal

#endif  // GECAL_OPTIM_HPP
