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

#ifndef GECAL_CALIBRATION_HPP
#define GECAL_CALIBRATION_HPP

#include <optional>

#include "gecal/entropy.hpp"
#include "gecal/linalg.hpp"
#include "gecal/optim.hpp"

namespace gecal {

// Calibration of respondent weights: minimize sum_i delta_i G(w_i) subject to
//   sum_i delta_i w_i b_i = sum_i b_i            (balancing)
//   sum_i delta_i w_i g(1/pi_i) = sum_i g(1/pi_i)  (debiasing)
// and optionally sum_i delta_i w_i = N (normalization).
struct CalibrationProblem {
  Vector delta;          // 0/1, length N
  Matrix b;              // N x q_b balancing covariates, may have 0 columns
  Vector pi_hat;         // propensities in (0, 1]
  EntropyKind entropy = EntropyKind::kET;
  bool include_normalization = false;
  double debias_scale = 1.0;
};

// Respondent Gram matrices worse conditioned than this are rejected.
inline constexpr double kMaxRespondentCondition = 1e12;

struct WeightSolution {
  Vector lambda;
  Vector weights;               // length N; zero for nonrespondents
  Vector constraint_residuals;  // (1/N)(sum delta w s - sum s), per column
  SolveReport report;
};

struct CalibrationSettings {
  double lambda_tol = 1e-9;
  int max_iter = 100;
};

// Columns: [1 if normalized | b columns | debias_scale * g(1/pi)].
Matrix build_covariates(const CalibrationProblem& problem);

bool dual_feasible(const CalibrationProblem& problem, const Matrix& s, const Vector& lambda);
double dual_value(const CalibrationProblem& problem, const Matrix& s, const Vector& lambda);
Vector dual_gradient(const CalibrationProblem& problem, const Matrix& s, const Vector& lambda);
Matrix dual_hessian(const CalibrationProblem& problem, const Matrix& s, const Vector& lambda);

// Weights g^-1(lambda' s_i) for respondents, zero elsewhere.
Vector weights_at(const CalibrationProblem& problem, const Matrix& s, const Vector& lambda);

// Default dual starting point: zero for SQ/ET, unit multiplier on the debias
// column for EL/HD (where the debias covariate is negative).
Vector default_start(const CalibrationProblem& problem, Eigen::Index dim);

WeightSolution solve_weights(const CalibrationProblem& problem,
                             const CalibrationSettings& settings = {},
                             const std::optional<Vector>& warm_start = std::nullopt);

// Same, on precomputed covariates.
WeightSolution solve_weights(const CalibrationProblem& problem, const Matrix& s,
                             const CalibrationSettings& settings = {},
                             const std::optional<Vector>& warm_start = std::nullopt);

}  // namespace gecal

#endif  // GECAL_CALIBRATION_HPP
