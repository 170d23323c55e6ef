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

#include "gecal/psmodel.hpp"

#include <cmath>
#include <string>

#include "gecal/error.hpp"
#include "gecal/optim.hpp"

namespace gecal {

namespace {

double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

bool strictly_separates(const Vector& eta, const Vector& delta) {
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (delta[i] != 0.0 && !(eta[i] > 0.0)) return false;
    if (delta[i] == 0.0 && !(eta[i] < 0.0)) return false;
  }
  return true;
}

}  // namespace

double expit(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

Matrix with_intercept(const Matrix& x) {
  Matrix out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

PsFit fit_logistic(const Matrix& design, const Vector& delta,
                   std::vector<std::string> column_names) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (delta.size() != n) {
    fail(ErrorCode::kDimensionMismatch, "design has " + std::to_string(n) +
                                            " rows but delta has " + std::to_string(delta.size()));
  }
  if (n < p + 1) {
    fail(ErrorCode::kDimensionMismatch, "need at least p + 1 = " + std::to_string(p + 1) +
                                            " rows for a logistic fit, got " + std::to_string(n));
  }
  const double positives = delta.sum();
  if (positives == 0.0 || positives == static_cast<double>(n)) {
    fail(ErrorCode::kOneClass, "response indicator has a single class");
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  Vector last_point = Vector::Zero(p);
  ObjectiveOracle oracle;
  oracle.value_at = [&](const Vector& phi) {
    last_point = phi;
    const Vector eta = design * phi;
    double nll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) nll += softplus(eta[i]) - delta[i] * eta[i];
    return nll * inv_n;
  };
  oracle.gradient_at = [&](const Vector& phi) {
    const Vector eta = design * phi;
    Vector resid(n);
    for (Eigen::Index i = 0; i < n; ++i) resid[i] = expit(eta[i]) - delta[i];
    return Vector(design.transpose() * resid * inv_n);
  };
  oracle.hessian_at = [&](const Vector& phi) {
    const Vector eta = design * phi;
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pi = expit(eta[i]);
      w[i] = pi * (1.0 - pi);
    }
    return Matrix(design.transpose() * w.asDiagonal() * design * inv_n);
  };

  SolveReport report;
  try {
    report = minimize_convex(oracle, Vector::Zero(p), 1e-8, 100);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kLineSearchStall &&
        sup_norm(design * last_point) > kSeparationThreshold) {
      fail(ErrorCode::kSeparation, "propensity fit diverges; classes appear separable");
    }
    throw;
  }

  const Vector eta = design * report.solution;
  if (!report.converged && sup_norm(eta) > kSeparationThreshold) {
    fail(ErrorCode::kSeparation, "linear predictor exceeds " +
                                     std::to_string(kSeparationThreshold) +
                                     " before convergence; classes appear separable");
  }
  if (strictly_separates(eta, delta)) {
    fail(ErrorCode::kSeparation, "fitted propensity classifies every unit perfectly; "
                                 "the likelihood has no finite maximizer");
  }

  PsFit fit;
  fit.phi = report.solution;
  fit.design_columns = std::move(column_names);
  fit.loglik = -oracle.value_at(report.solution) * static_cast<double>(n);
  fit.converged = report.converged;
  fit.iterations = report.iterations;
  return fit;
}

Vector predict_pi(const PsFit& fit, const Matrix& design) {
  if (design.cols() != fit.phi.size()) {
    fail(ErrorCode::kDimensionMismatch, "design has " + std::to_string(design.cols()) +
                                            " columns, fit has " + std::to_string(fit.phi.size()));
  }
  const Vector eta = design * fit.phi;
  return eta.unaryExpr([](double e) { return expit(e); });
}

Vector truncate_probabilities(const Vector& pi, double eps) {
  if (eps <= 0.0) return pi;
  return pi.cwiseMax(eps).cwiseMin(1.0 - eps);
}

Vector h_vector(const PsFit& fit, const Vector& x_row) {
  if (x_row.size() != fit.phi.size()) {
    fail(ErrorCode::kDimensionMismatch, "covariate row has " + std::to_string(x_row.size()) +
                                            " entries, fit has " + std::to_string(fit.phi.size()));
  }
  return expit(x_row.dot(fit.phi)) * x_row;
}

Vector PropensityLink::pi(const Vector& phi) const {
  const Vector eta = design_ * phi;
  Vector out(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    out[i] = complement_ ? expit(-eta[i]) : expit(eta[i]);
  }
  return truncate_probabilities(out, truncation_);
}

Matrix PropensityLink::h(const Vector& phi) const {
  // treated: (1 - pi)^-1 pi (1 - pi) x = pi x
  // control: pi0 = 1 - expit, d pi0 = -expit (1 - expit) x, so h = -pi0 x
  const Vector eta = design_ * phi;
  Matrix out(design_.rows(), design_.cols());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double coef = complement_ ? -expit(-eta[i]) : expit(eta[i]);
    out.row(i) = coef * design_.row(i);
  }
  return out;
}

Vector PropensityLink::score(const Vector& phi, const Vector& delta) const {
  const Vector p = pi(phi);
  const Matrix hm = h(phi);
  Vector weights(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) weights[i] = delta[i] / p[i] - 1.0;
  return hm.transpose() * weights / static_cast<double>(p.size());
}

}  // namespace gecal
