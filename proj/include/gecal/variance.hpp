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

#ifndef GECAL_VARIANCE_HPP
#define GECAL_VARIANCE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gecal/data.hpp"
#include "gecal/estimand.hpp"
#include "gecal/psmodel.hpp"
#include "gecal/solver.hpp"

namespace gecal {

// Fitted propensity model, needed for the phi-estimation correction.
struct PsModelRef {
  const PropensityLink* link = nullptr;
  Vector phi;
};

struct InfluenceParts {
  Matrix gamma_hat;  // q x dim(s)
  Matrix kappa_hat;  // q x r, empty when the propensity is known
  Matrix d;          // N x q
  Matrix tau1_hat;   // q x q
  bool kappa_singular = false;
};

Matrix gamma_fit(const Matrix& u_resp, const Matrix& s_resp, const Vector& lambda,
                 EntropyKind entropy);

struct KappaInputs {
  CalibrationProblem problem;  // at theta_hat
  Vector lambda;
  Matrix gamma;
  Matrix u;  // N x q; rows of nonrespondents are ignored
  PsModelRef ps;
};

struct KappaFit {
  Matrix kappa;
  Matrix a;  // q x r derivative of the weighted bracket
  Matrix b;  // r x r derivative of the propensity score equation
  bool singular = false;
};

KappaFit kappa_fit(const KappaInputs& in);

InfluenceParts influence_parts(const MissingData& data, const EstimatingFunction& ef,
                               const GecResult& result, const std::optional<PsModelRef>& ps);

// Rows psi_i^T = -(tau1^-1 (d_i - dbar))^T, so Cov(theta_hat) = psi^T psi / N^2.
Matrix influence_functions(const InfluenceParts& parts);

struct SandwichEstimate {
  Vector se;
  Matrix cov;
};

SandwichEstimate sandwich_se(const InfluenceParts& parts);

struct BootstrapEstimate {
  Vector se;
  int successes = 0;
  int failures = 0;
};

using ResampleEstimator = std::function<Vector(const std::vector<std::size_t>& units)>;

BootstrapEstimate bootstrap_se(std::size_t n_units, const ResampleEstimator& estimator, int b,
                               std::uint64_t seed);

}  // namespace gecal

#endif  // GECAL_VARIANCE_HPP
