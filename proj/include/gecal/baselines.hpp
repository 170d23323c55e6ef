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

#ifndef GECAL_BASELINES_HPP
#define GECAL_BASELINES_HPP

#include <string>
#include <string_view>

#include "gecal/data.hpp"
#include "gecal/estimand.hpp"

namespace gecal {

enum class BaselineKind { kFull, kCC, kIPW, kAIPW };

std::string baseline_name(BaselineKind kind);

// Newton root of sum_i w_i U(theta; z_i) = 0. Weights may be negative.
Vector ee_root(const EstimatingFunction& ef, const Matrix& z, const Vector& w,
               const Vector& theta0, double tol = 1e-12, int max_iter = 100);

// Infeasible oracle: every m must be observed.
Vector full_estimate(const MissingData& data, const EstimatingFunction& ef);

Vector cc_estimate(const MissingData& data, const EstimatingFunction& ef);

// Unnormalized inverse-propensity weighting: sum delta/pi U = 0.
Vector ipw_estimate(const MissingData& data, const EstimatingFunction& ef, const Vector& pi_hat);

// sum [delta U(z)/pi - (delta - pi)/pi U(o, m_hat)] = 0.
Vector aipw_estimate(const MissingData& data, const EstimatingFunction& ef,
                     const Vector& pi_hat, const Matrix& m_hat);

}  // namespace gecal

#endif  // GECAL_BASELINES_HPP
