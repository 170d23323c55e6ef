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

#ifndef GECAL_APPS_HPP
#define GECAL_APPS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gecal/baselines.hpp"
#include "gecal/predict.hpp"
#include "gecal/solver.hpp"

namespace gecal {

enum class SeMethod { kSandwich, kBootstrap, kNone };
SeMethod parse_se_method(std::string_view token);  // sandwich | bootstrap
std::string se_method_token(SeMethod method);

enum class Mechanism { kMar, kMcar };
Mechanism parse_mechanism(std::string_view token);  // mar | mcar

struct AppConfig {
  EntropyKind entropy = EntropyKind::kET;
  int folds = 4;
  std::uint64_t seed = 20240901;
  std::optional<PredictorFamily> family;  // unset: per-application default
  PredictorOptions predictor;
  double ps_truncation = 0.0;
  std::optional<bool> normalization;  // unset: on for ATE, off elsewhere
  SeMethod se = SeMethod::kSandwich;
  int bootstrap_b = 500;
  bool misscov_ps_uses_outcome = true;
  GecConfig solver;  // tolerances; entropy and normalization come from above
};

// One row per coefficient in the tabular output.
struct EstimateResult {
  std::string target;
  std::vector<std::string> coef_names;
  Vector estimate;
  Vector se;
  std::string entropy;
  std::size_t n = 0;
  std::size_t n_respondents = 0;
};

struct AteResult {
  double theta1 = 0.0;
  double theta0 = 0.0;
  double ate = 0.0;
  double se_ate = 0.0;
  double se1 = 0.0;
  double se0 = 0.0;
  std::array<GecResult, 2> per_arm;  // index 1 treated, 0 control
  std::array<Vector, 2> predictions;
  Vector pi_hat;  // P(T = 1 | X)

  EstimateResult summary(EntropyKind entropy) const;
};

AteResult ate_estimate(const Matrix& x, const Vector& t, const Vector& y, const AppConfig& config);

// Baseline ATE (CC, IPW or AIPW per arm) built on the same propensity fit
// and predictions as ate_estimate.
double ate_baseline(const Matrix& x, const Vector& t, const Vector& y, BaselineKind kind,
                    const AppConfig& config);

struct RegressionResult {
  GecResult gec;
  Vector se;
  std::vector<std::string> coef_names;
  std::size_t n = 0;
  std::size_t n_respondents = 0;
  Vector pi_hat;
  Vector predictions;

  EstimateResult summary(const std::string& target, EntropyKind entropy) const;
};

RegressionResult ssl_estimate(const Matrix& x_labeled, const Vector& y_labeled,
                              const Matrix& x_unlabeled, Mechanism mechanism,
                              const AppConfig& config);

Vector ssl_baseline(const Matrix& x_labeled, const Vector& y_labeled, const Matrix& x_unlabeled,
                    Mechanism mechanism, BaselineKind kind, const AppConfig& config);

// x2 carries NaN where it is missing.
RegressionResult misscov_estimate(const Matrix& x1, const Vector& x2, const Vector& y,
                                  const AppConfig& config);

// kFull needs the complete x2 column.
Vector misscov_baseline(const Matrix& x1, const Vector& x2, const Vector& y, BaselineKind kind,
                        const AppConfig& config, const Vector* x2_full = nullptr);

struct WeightsResult {
  Vector delta;
  Vector pi_hat;
  Vector weights;
  WeightSolution solution;
};

// Calibrates respondents to the full-sample totals of the given covariates.
WeightsResult weights_estimate(const Matrix& covariates, const Vector& delta,
                               const AppConfig& config);

}  // namespace gecal

#endif  // GECAL_APPS_HPP
