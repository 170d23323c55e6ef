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

#ifndef GECAL_PREDICT_HPP
#define GECAL_PREDICT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gecal/linalg.hpp"

namespace gecal {

// Random K-fold partition. Fold ids are 0-based.
struct FoldAssignment {
  std::vector<int> fold_of;
  int K = 0;
  std::uint64_t seed = 0;
};

FoldAssignment make_folds(std::size_t n, int k, std::uint64_t seed);

enum class PredictorFamily { kLinear, kLogistic, kSplineAdditive };

PredictorFamily parse_family(std::string_view token);  // linear | logistic | spline
std::string family_token(PredictorFamily family);

// Natural cubic spline basis of one covariate: boundary knots at the training
// range and interior knots at training quantiles. Yields interior + 1
// columns (the linear term plus one per interior knot).
struct SplineBasis {
  std::vector<double> knots;  // sorted, boundary knots included

  Eigen::Index size() const { return knots.size() < 2 ? 1 : static_cast<Eigen::Index>(knots.size()) - 1; }
  void evaluate(double x, double* out) const;
};

SplineBasis make_spline_basis(const Vector& column, int interior_knots);

struct PredictorOptions {
  int spline_knots = 5;
};

struct Predictor {
  PredictorFamily family = PredictorFamily::kLinear;
  Vector coefficients;                  // intercept first
  std::vector<SplineBasis> basis_spec;  // spline family only
  bool ridge_used = false;

  Vector predict(const Matrix& o) const;
  Matrix design(const Matrix& o) const;
};

Predictor fit_predictor(PredictorFamily family, const Matrix& o_train, const Vector& m_train,
                        const PredictorOptions& options = {});

// Out-of-fold predictions for every unit. For fold k the model is trained on
// units with delta = 1 outside fold k and applied to all units inside it.
Vector cross_fit_predictions(const Matrix& o, const Vector& m, const Vector& delta,
                             PredictorFamily family, const FoldAssignment& folds,
                             const PredictorOptions& options = {});

}  // namespace gecal

#endif  // GECAL_PREDICT_HPP
