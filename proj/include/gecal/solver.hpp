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

#ifndef GECAL_SOLVER_HPP
#define GECAL_SOLVER_HPP

#include <optional>

#include "gecal/calibration.hpp"
#include "gecal/data.hpp"
#include "gecal/estimand.hpp"

namespace gecal {

struct GecConfig {
  EntropyKind entropy = EntropyKind::kET;
  double theta_tol = 1e-6;
  double lambda_tol = 1e-9;
  int max_outer = 100;
  bool normalization = false;
  double fd_step = 1e-5;
  double debias_scale = 1.0;
};

void validate(const GecConfig& config);

struct GecResult {
  Vector theta_hat;
  WeightSolution weight_solution;
  double ee_residual_norm = 0.0;
  int outer_iterations = 0;
  // Calibration problem and covariates at theta_hat.
  CalibrationProblem problem;
  Matrix s;
};

// Weighted estimating-equation residual (1/N) sum delta w U(theta; z).
Vector weighted_ee_residual(const EstimatingFunction& ef, const Matrix& z_resp,
                            const Vector& w_resp, const Vector& theta, Eigen::Index n);

GecResult gec_profile(const MissingData& data, const EstimatingFunction& ef, const Matrix& m_hat,
                      const Vector& pi_hat, const GecConfig& config,
                      const std::optional<Vector>& theta0 = std::nullopt);

GecResult gec_direct(const MissingData& data, const EstimatingFunction& ef, const Matrix& b,
                     const Vector& pi_hat, const GecConfig& config);

}  // namespace gecal

#endif  // GECAL_SOLVER_HPP
