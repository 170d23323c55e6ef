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

#include "gecal/predict.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gecal/error.hpp"
#include "gecal/psmodel.hpp"

namespace gecal {

FoldAssignment make_folds(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    fail(ErrorCode::kConfig, "fold count " + std::to_string(k) + " must lie in [2, " +
                                 std::to_string(n) + "]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  FoldAssignment folds;
  folds.K = k;
  folds.seed = seed;
  folds.fold_of.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j) folds.fold_of[order[j]] = static_cast<int>(j % k);
  return folds;
}

PredictorFamily parse_family(std::string_view token) {
  if (token == "linear") return PredictorFamily::kLinear;
  if (token == "logistic") return PredictorFamily::kLogistic;
  if (token == "spline") return PredictorFamily::kSplineAdditive;
  fail(ErrorCode::kConfig, "unknown predictor family '" + std::string(token) +
                               "'; use linear, logistic or spline");
}

std::string family_token(PredictorFamily family) {
  switch (family) {
    case PredictorFamily::kLinear: return "linear";
    case PredictorFamily::kLogistic: return "logistic";
    case PredictorFamily::kSplineAdditive: return "spline";
  }
  return "?";
}

SplineBasis make_spline_basis(const Vector& column, int interior_knots) {
  std::vector<double> sorted(column.data(), column.data() + column.size());
  std::sort(sorted.begin(), sorted.end());
  SplineBasis basis;
  if (sorted.empty() || sorted.front() == sorted.back()) return basis;

  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  basis.knots.push_back(sorted.front());
  for (int j = 1; j <= interior_knots; ++j) {
    basis.knots.push_back(quantile(static_cast<double>(j) / (interior_knots + 1)));
  }
  basis.knots.push_back(sorted.back());
  // Ties (discrete covariates) collapse; a two-valued column keeps only the
  // linear term.
  basis.knots.erase(std::unique(basis.knots.begin(), basis.knots.end()), basis.knots.end());
  return basis;
}

void SplineBasis::evaluate(double x, double* out) const {
  if (knots.size() < 2) {
    out[0] = x;
    return;
  }
  // Truncated power form of the natural cubic spline on the unit-scaled axis.
  const double lo = knots.front();
  const double scale = knots.back() - lo;
  const std::size_t m = knots.size();
  auto u = [&](double v) { return (v - lo) / scale; };
  const double xu = u(x);
  auto cube_plus = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
  auto d = [&](std::size_t k) {
    const double kk = u(knots[k]);
    const double kl = u(knots[m - 1]);
    return (cube_plus(xu - kk) - cube_plus(xu - kl)) / (kl - kk);
  };
  out[0] = xu;
  const double d_last = d(m - 2);
  for (std::size_t k = 0; k + 2 < m; ++k) out[k + 1] = d(k) - d_last;
}

Matrix Predictor::design(const Matrix& o) const {
  if (family != PredictorFamily::kSplineAdditive) return with_intercept(o);
  Eigen::Index cols = 1;
  for (const auto& b : basis_spec) cols += b.size();
  Matrix out(o.rows(), cols);
  out.col(0).setOnes();
  std::vector<double> buf;
  for (Eigen::Index i = 0; i < o.rows(); ++i) {
    Eigen::Index c = 1;
    for (std::size_t j = 0; j < basis_spec.size(); ++j) {
      buf.resize(basis_spec[j].size());
      basis_spec[j].evaluate(o(i, static_cast<Eigen::Index>(j)), buf.data());
      for (double v : buf) out(i, c++) = v;
    }
  }
  return out;
}

Vector Predictor::predict(const Matrix& o) const {
  const Matrix x = design(o);
  if (x.cols() != coefficients.size()) {
    fail(ErrorCode::kDimensionMismatch, "predictor expects " +
                                            std::to_string(coefficients.size()) + " columns");
  }
  Vector eta = x * coefficients;
  if (family == PredictorFamily::kLogistic) {
    return eta.unaryExpr([](double e) { return expit(e); });
  }
  return eta;
}

Predictor fit_predictor(PredictorFamily family, const Matrix& o_train, const Vector& m_train,
                        const PredictorOptions& options) {
  if (o_train.rows() != m_train.size()) {
    fail(ErrorCode::kDimensionMismatch, "training covariates and targets differ in length");
  }
  Predictor pred;
  pred.family = family;
  if (family == PredictorFamily::kSplineAdditive) {
    for (Eigen::Index j = 0; j < o_train.cols(); ++j) {
      pred.basis_spec.push_back(make_spline_basis(o_train.col(j), options.spline_knots));
    }
  }
  const Matrix x = pred.design(o_train);

  if (family == PredictorFamily::kLogistic) {
    for (Eigen::Index i = 0; i < m_train.size(); ++i) {
      if (m_train[i] != 0.0 && m_train[i] != 1.0) {
        fail(ErrorCode::kConfig, "logistic predictor needs a binary target");
      }
    }
    pred.coefficients = fit_logistic(x, m_train).phi;
    return pred;
  }

  if (x.rows() < x.cols()) {
    fail(ErrorCode::kDimensionMismatch, "only " + std::to_string(x.rows()) +
                                            " training rows for " + std::to_string(x.cols()) +
                                            " coefficients");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() == x.cols()) {
    pred.coefficients = qr.solve(m_train);
  } else {
    Matrix gram = x.transpose() * x;
    const double ridge = 1e-8 * gram.trace() / static_cast<double>(gram.cols());
    gram.diagonal().array() += ridge;
    pred.coefficients = gram.ldlt().solve(x.transpose() * m_train);
    pred.ridge_used = true;
  }
  return pred;
}

Vector cross_fit_predictions(const Matrix& o, const Vector& m, const Vector& delta,
                             PredictorFamily family, const FoldAssignment& folds,
                             const PredictorOptions& options) {
  const Eigen::Index n = o.rows();
  if (m.size() != n || delta.size() != n || static_cast<Eigen::Index>(folds.fold_of.size()) != n) {
    fail(ErrorCode::kDimensionMismatch, "cross-fit inputs differ in length");
  }
  Vector out = Vector::Zero(n);
  for (int k = 0; k < folds.K; ++k) {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> target;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (folds.fold_of[i] == k) {
        target.push_back(i);
      } else if (delta[i] != 0.0) {
        train.push_back(i);
      }
    }
    if (train.empty()) {
      fail(ErrorCode::kEmptyTrainingFold, "no complete cases outside fold " + std::to_string(k));
    }
    if (target.empty()) continue;
    Matrix o_train(static_cast<Eigen::Index>(train.size()), o.cols());
    Vector m_train(static_cast<Eigen::Index>(train.size()));
    for (std::size_t r = 0; r < train.size(); ++r) {
      o_train.row(r) = o.row(train[r]);
      m_train[r] = m[train[r]];
    }
    const Predictor pred = fit_predictor(family, o_train, m_train, options);
    Matrix o_target(static_cast<Eigen::Index>(target.size()), o.cols());
    for (std::size_t r = 0; r < target.size(); ++r) o_target.row(r) = o.row(target[r]);
    const Vector fitted = pred.predict(o_target);
    for (std::size_t r = 0; r < target.size(); ++r) out[target[r]] = fitted[r];
  }
  return out;
}

}  // namespace gecal
