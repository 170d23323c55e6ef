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

#include "gecal/calibration.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "gecal/error.hpp"

namespace gecal {

namespace {

void validate(const CalibrationProblem& problem) {
  const Eigen::Index n = problem.delta.size();
  if (problem.pi_hat.size() != n || (problem.b.cols() > 0 && problem.b.rows() != n)) {
    fail(ErrorCode::kDimensionMismatch, "calibration inputs differ in length");
  }
  if (problem.delta.sum() < 1.0) {
    fail(ErrorCode::kTooFewRespondents, "calibration needs at least one respondent");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(problem.pi_hat[i] > 0.0 && problem.pi_hat[i] <= 1.0)) {
      fail(ErrorCode::kDomain, "propensity of unit " + std::to_string(i) + " outside (0, 1]");
    }
  }
  if (!(problem.debias_scale != 0.0 && std::isfinite(problem.debias_scale))) {
    fail(ErrorCode::kConfig, "debias_scale must be a nonzero finite number");
  }
}

bool in_nu_domain(EntropyKind kind, double nu) {
  if (!entropy_spec(kind).nu_domain.contains(nu)) return false;
  return kind != EntropyKind::kET || nu <= kExpOverflowGuard;
}

double inv_n(const CalibrationProblem& problem) {
  return 1.0 / static_cast<double>(problem.delta.size());
}

}  // namespace

Matrix build_covariates(const CalibrationProblem& problem) {
  validate(problem);
  const Eigen::Index n = problem.delta.size();
  const Eigen::Index offset = problem.include_normalization ? 1 : 0;
  const Eigen::Index dim = offset + problem.b.cols() + 1;
  Matrix s(n, dim);
  if (offset == 1) s.col(0).setOnes();
  if (problem.b.cols() > 0) s.middleCols(offset, problem.b.cols()) = problem.b;
  for (Eigen::Index i = 0; i < n; ++i) {
    s(i, dim - 1) = problem.debias_scale * debias_covariate(problem.entropy, problem.pi_hat[i]);
  }

  if (problem.delta.sum() == static_cast<double>(n) && !problem.include_normalization) return s;

  // A column that vanishes for every unit is a vacuous constraint.
  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < dim; ++j)
    if (s.col(j).cwiseAbs().maxCoeff() > 0.0) live.push_back(j);
  const Matrix resp = select_rows(Matrix(s(Eigen::all, live)), problem.delta);
  const Matrix gram = resp.transpose() * resp;
  // Compare on the correlation scale so column units do not matter.
  const Vector d = gram.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const double cond = condition_number(d.asDiagonal() * gram * d.asDiagonal());
  if (!(cond <= kMaxRespondentCondition)) {
    std::ostringstream msg;
    msg << "calibration covariates are collinear among respondents (condition number "
        << cond << ")";
    fail(ErrorCode::kRankDeficientRespondents, msg.str());
  }
  return s;
}

bool dual_feasible(const CalibrationProblem& problem, const Matrix& s, const Vector& lambda) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    if (problem.delta[i] == 0.0) continue;
    if (!in_nu_domain(problem.entropy, s.row(i).dot(lambda))) return false;
  }
  return true;
}

double dual_value(const CalibrationProblem& problem, const Matrix& s, const Vector& lambda) {
  if (!dual_feasible(problem, s, lambda)) {
    fail(ErrorCode::kInfeasibleLambda, "multiplier outside the dual domain");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double nu = s.row(i).dot(lambda);
    if (problem.delta[i] != 0.0) total += F_value(problem.entropy, nu);
    total -= nu;
  }
  return total * inv_n(problem);
}

Vector weights_at(const CalibrationProblem& problem, const Matrix& s, const Vector& lambda) {
  Vector w = Vector::Zero(s.rows());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    if (problem.delta[i] != 0.0) w[i] = g_inverse(problem.entropy, s.row(i).dot(lambda));
  }
  return w;
}

Vector dual_gradient(const CalibrationProblem& problem, const Matrix& s, const Vector& lambda) {
  if (!dual_feasible(problem, s, lambda)) {
    fail(ErrorCode::kInfeasibleLambda, "multiplier outside the dual domain");
  }
  const Vector w = weights_at(problem, s, lambda);
  return (s.transpose() * (w - Vector::Ones(s.rows()))) * inv_n(problem);
}

Matrix dual_hessian(const CalibrationProblem& problem, const Matrix& s, const Vector& lambda) {
  if (!dual_feasible(problem, s, lambda)) {
    fail(ErrorCode::kInfeasibleLambda, "multiplier outside the dual domain");
  }
  Vector fprime = Vector::Zero(s.rows());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    if (problem.delta[i] != 0.0) {
      fprime[i] = g_inverse_derivative(problem.entropy, s.row(i).dot(lambda));
    }
  }
  Matrix h = s.transpose() * fprime.asDiagonal() * s * inv_n(problem);
  return 0.5 * (h + h.transpose());
}

Vector default_start(const CalibrationProblem& problem, Eigen::Index dim) {
  Vector start = Vector::Zero(dim);
  if (problem.entropy == EntropyKind::kEL || problem.entropy == EntropyKind::kHD) {
    // debias covariate is negative, so lambda' s_i = scale * g_i < 0
    start[dim - 1] = problem.debias_scale > 0.0 ? 1.0 : -1.0;
  }
  return start;
}

WeightSolution solve_weights(const CalibrationProblem& problem,
                             const CalibrationSettings& settings,
                             const std::optional<Vector>& warm_start) {
  return solve_weights(problem, build_covariates(problem), settings, warm_start);
}

WeightSolution solve_weights(const CalibrationProblem& problem, const Matrix& s,
                             const CalibrationSettings& settings,
                             const std::optional<Vector>& warm_start) {
  const Eigen::Index n = s.rows();
  const Eigen::Index dim = s.cols();
  WeightSolution out;

  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < dim; ++j)
    if (s.col(j).cwiseAbs().maxCoeff() > 0.0) live.push_back(j);
  if (static_cast<Eigen::Index>(live.size()) < dim && !live.empty()) {
    // Vacuous constraints keep a zero multiplier.
    std::optional<Vector> warm_live;
    if (warm_start && warm_start->size() == dim) warm_live = Vector((*warm_start)(live));
    out = solve_weights(problem, Matrix(s(Eigen::all, live)), settings, warm_live);
    Vector lambda = Vector::Zero(dim);
    lambda(live) = out.lambda;
    out.lambda = lambda;
    out.report.solution = lambda;
    out.constraint_residuals = (s.transpose() * (out.weights - Vector::Ones(n))) / static_cast<double>(n);
    return out;
  }

  const double respondents = problem.delta.sum();
  if (respondents == static_cast<double>(n) && !problem.include_normalization) {
    out.weights = Vector::Ones(n);
    out.lambda = Vector::Zero(dim);
    out.constraint_residuals = Vector::Zero(dim);
    out.report.solution = out.lambda;
    out.report.converged = true;
    return out;
  }

  // Respondent rows only; nonrespondents enter through the column totals.
  const Matrix resp = select_rows(s, problem.delta);
  const Vector totals = s.colwise().sum().transpose();
  const double scale = inv_n(problem);
  const EntropyKind kind = problem.entropy;

  ObjectiveOracle oracle;
  oracle.feasible_at = [&](const Vector& lambda) {
    for (Eigen::Index i = 0; i < resp.rows(); ++i) {
      if (!in_nu_domain(kind, resp.row(i).dot(lambda))) return false;
    }
    return true;
  };
  oracle.value_at = [&](const Vector& lambda) {
    const Vector nu = resp * lambda;
    double total = 0.0;
    for (Eigen::Index i = 0; i < nu.size(); ++i) total += F_value(kind, nu[i]);
    return (total - lambda.dot(totals)) * scale;
  };
  oracle.gradient_at = [&](const Vector& lambda) {
    const Vector nu = resp * lambda;
    Vector w(nu.size());
    for (Eigen::Index i = 0; i < nu.size(); ++i) w[i] = g_inverse(kind, nu[i]);
    return Vector((resp.transpose() * w - totals) * scale);
  };
  oracle.hessian_at = [&](const Vector& lambda) {
    const Vector nu = resp * lambda;
    Vector fp(nu.size());
    for (Eigen::Index i = 0; i < nu.size(); ++i) fp[i] = g_inverse_derivative(kind, nu[i]);
    Matrix h = resp.transpose() * fp.asDiagonal() * resp * scale;
    return Matrix(0.5 * (h + h.transpose()));
  };

  std::optional<Vector> start;
  if (warm_start && warm_start->size() == dim && oracle.feasible_at(*warm_start)) {
    start = *warm_start;
  } else {
    Vector candidate = default_start(problem, dim);
    for (int k = 0; k < 12 && !start; ++k) {
      if (oracle.feasible_at(candidate)) start = candidate;
      candidate[dim - 1] *= 2.0;
      if (candidate[dim - 1] == 0.0) break;
    }
  }
  if (!start) {
    fail(ErrorCode::kInfeasibleStart, "no feasible dual starting point for the " +
                                          entropy_token(kind) + " entropy");
  }

  out.report = minimize_convex(oracle, *start, settings.lambda_tol, settings.max_iter);
  out.lambda = out.report.solution;
  out.weights = weights_at(problem, s, out.lambda);
  out.constraint_residuals = (s.transpose() * (out.weights - Vector::Ones(n))) * scale;
  return out;
}

}  // namespace gecal
