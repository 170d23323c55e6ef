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

#ifndef GECAL_PSMODEL_HPP
#define GECAL_PSMODEL_HPP

#include <string>
#include <vector>

#include "gecal/linalg.hpp"

namespace gecal {

// Logistic propensity fit. `phi` is ordered like the design columns, which
// by convention start with the intercept.
struct PsFit {
  Vector phi;
  std::vector<std::string> design_columns;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
};

// |linear predictor| beyond which expit saturates in double precision.
inline constexpr double kSeparationThreshold = 30.0;

double expit(double eta);

// Prepends a column of ones.
Matrix with_intercept(const Matrix& x);

// Bernoulli maximum likelihood by damped Newton (gradient tolerance 1e-8).
// Throws OneClassError when delta is constant and SeparationError when the
// classes are (numerically) separable.
PsFit fit_logistic(const Matrix& design, const Vector& delta,
                   std::vector<std::string> column_names = {});

Vector predict_pi(const PsFit& fit, const Matrix& design);

// Clamps to [eps, 1 - eps]; eps = 0 leaves the input untouched.
Vector truncate_probabilities(const Vector& pi, double eps);

// h(phi) = (1 - pi)^-1 d pi / d phi, which is pi * x for the logistic link.
Vector h_vector(const PsFit& fit, const Vector& x_row);

// Logistic propensity as a function of phi, optionally for the complementary
// outcome (P(T = 0 | x) = 1 - expit(x'phi), used by the control arm).
class PropensityLink {
 public:
  PropensityLink(Matrix design, bool complement = false, double truncation = 0.0)
      : design_(std::move(design)), complement_(complement), truncation_(truncation) {}

  Vector pi(const Vector& phi) const;
  // Row i holds h_i(phi)^T.
  Matrix h(const Vector& phi) const;
  // (1/N) sum_i (delta_i / pi_i - 1) h_i(phi).
  Vector score(const Vector& phi, const Vector& delta) const;

  const Matrix& design() const { return design_; }
  bool complement() const { return complement_; }

 private:
  Matrix design_;
  bool complement_;
  double truncation_;
};

}  // namespace gecal

#endif  // GECAL_PSMODEL_HPP
