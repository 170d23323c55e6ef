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

#include "gecal/solver.hpp"

#include <cmath>
#include <string>
#include <iostream>

#include "gecal/baselines.hpp"
#include "gecal/error.hpp"

namespace gecal {

namespace {

constexpr int kMaxOuterHalvings = 30;

CalibrationSettings inner_settings(const GecConfig& config) {
  CalibrationSettings settings;
  settings.lambda_tol = std::min(config.lambda_tol, config.theta_tol * 1e-2);
  return settings;
}

CalibrationProblem base_problem(const MissingData& data, const Vector& pi_hat,
                                const GecConfig& config) {
  CalibrationProblem problem;
  problem.delta = data.delta;
  problem.pi_hat = pi_hat;
  problem.entropy = config.entropy;
  problem.include_normalization = config.normalization;
  problem.debias_scale = config.debias_scale;
  return problem;
}

Vector respondent_weights(const WeightSolution& sol, const Vector& delta) {
  return select_rows(sol.weights, delta);
}

// Balancing columns that are rounding noise next to the debias column, or
// that repeat other constraints among respondents, are zeroed so the dual
// stays well posed. Returns the original values of the collinear columns,
// whose constraints must still hold once the weights are solved.
struct DroppedBalance {
  bool any = false;
  std::vector<std::pair<Eigen::Index, Vector>> collinear;
};

DroppedBalance drop_redundant_balance(CalibrationProblem& problem) {
  const Eigen::Index n = problem.delta.size();
  Vector debias(n);
  for (Eigen::Index i = 0; i < n; ++i)
    debias[i] = problem.debias_scale * debias_covariate(problem.entropy, problem.pi_hat[i]);
  const double ref = debias.norm();

  DroppedBalance dropped;
  std::vector<Vector> basis;  // orthonormal, respondent rows
  auto residual_ratio = [&](Vector v) {
    const double before = v.norm();
    if (before == 0.0) return 0.0;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& e : basis) v -= e.dot(v) * e;
    const double after = v.norm();
    if (after > 1e-7 * before) basis.push_back(v / after);
    return after / before;
  };
  if (problem.include_normalization) residual_ratio(select_rows(Vector(Vector::Ones(n)), problem.delta));
  residual_ratio(select_rows(debias, problem.delta));
  for (Eigen::Index j = 0; j < problem.b.cols(); ++j) {
    const Vector col = problem.b.col(j);
    const bool negligible = col.norm() <= 1e-10 * ref;
    if (negligible || residual_ratio(select_rows(col, problem.delta)) <= 1e-7) {
      if (!negligible) dropped.collinear.emplace_back(j, col);
      problem.b.col(j).setZero();
      dropped.any = true;
    }
  }
  return dropped;
}

class ProfileState {
 public:
  ProfileState(const MissingData& data, const EstimatingFunction& ef, const Matrix& m_hat,
               const Vector& pi_hat, const GecConfig& config)
      : ef_(ef),
        n_(data.n()),
        delta_(data.delta),
        problem_(base_problem(data, pi_hat, config)),
        settings_(inner_settings(config)) {
    z_resp_ = assemble_rows(ef, select_rows(data.o, data.delta), select_rows(data.m, data.delta));
    z_hat_ = assemble_rows(ef, data.o, m_hat);
  }

  struct Eval {
    Vector theta;
    CalibrationProblem problem;
    Matrix s;
    WeightSolution sol;
    Vector residual;
  };

  Eval evaluate(const Vector& theta, const std::optional<Vector>& warm) const {
    Eval e;
    e.theta = theta;
    e.problem = problem_;
    e.problem.b = ef_.u_rows(theta, z_hat_);
    DroppedBalance dropped;
    try {
      e.s = build_covariates(e.problem);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kRankDeficientRespondents) throw;
      dropped = drop_redundant_balance(e.problem);
      if (!dropped.any) throw;
      e.s = build_covariates(e.problem);
    }
    e.sol = solve_weights(e.problem, e.s, settings_, warm);
    if (!e.sol.report.converged) {
      fail(ErrorCode::kMaxIterations, "inner calibration solve did not converge");
    }
    for (const auto& [j, col] : dropped.collinear) {
      const double gap = (e.sol.weights - Vector::Ones(n_)).dot(col) / static_cast<double>(n_);
      const double scale = col.norm() / std::sqrt(static_cast<double>(n_));
      if (!(std::abs(gap) <= 1e-6 * std::max(scale, 1e-300))) {
        fail(ErrorCode::kRankDeficientRespondents,
             "balancing constraint " + std::to_string(j) +
                 " is collinear with the others among respondents but not in the full sample");
      }
    }
    e.residual = weighted_ee_residual(ef_, z_resp_, respondent_weights(e.sol, delta_), theta, n_);
    return e;
  }

 private:
  const EstimatingFunction& ef_;
  Eigen::Index n_;
  Vector delta_;
  CalibrationProblem problem_;
  CalibrationSettings settings_;
  Matrix z_resp_;
  Matrix z_hat_;
};

}  // namespace

void validate(const GecConfig& config) {
  if (!(config.theta_tol > 0.0) || !(config.lambda_tol > 0.0) || !(config.fd_step > 0.0)) {
    fail(ErrorCode::kConfig, "solver tolerances must be positive");
  }
  if (config.max_outer < 1) fail(ErrorCode::kConfig, "max_outer must be at least 1");
}

Vector weighted_ee_residual(const EstimatingFunction& ef, const Matrix& z_resp,
                            const Vector& w_resp, const Vector& theta, Eigen::Index n) {
  Vector r = Vector::Zero(ef.q());
  for (Eigen::Index i = 0; i < z_resp.rows(); ++i) {
    r += w_resp[i] * ef.u_at(theta, z_resp.row(i).transpose());
  }
  return r / static_cast<double>(n);
}

GecResult gec_profile(const MissingData& data, const EstimatingFunction& ef, const Matrix& m_hat,
                      const Vector& pi_hat, const GecConfig& config,
                      const std::optional<Vector>& theta0) {
  validate(config);
  if (m_hat.rows() != data.n() || pi_hat.size() != data.n()) {
    fail(ErrorCode::kDimensionMismatch, "predictions and propensities need one row per unit");
  }
  const Eigen::Index q = ef.q();
  Vector theta;
  if (theta0) {
    theta = *theta0;
  } else {
    try {
      theta = aipw_estimate(data, ef, pi_hat, m_hat);
    } catch (const Error&) {
      theta = cc_estimate(data, ef);
    }
    if (!theta.allFinite()) theta = cc_estimate(data, ef);
  }

  const ProfileState state(data, ef, m_hat, pi_hat, config);
  ProfileState::Eval cur = state.evaluate(theta, std::nullopt);

  bool converged = false;
  int outer = 0;
  for (outer = 1; outer <= config.max_outer; ++outer) {
    Matrix jac(q, q);
    for (Eigen::Index j = 0; j < q; ++j) {
      const double h = config.fd_step * std::max(1.0, std::abs(cur.theta[j]));
      Vector tp = cur.theta, tm = cur.theta;
      tp[j] += h;
      tm[j] -= h;
      const Vector rp = state.evaluate(tp, cur.sol.lambda).residual;
      const Vector rm = state.evaluate(tm, cur.sol.lambda).residual;
      jac.col(j) = (rp - rm) / (2.0 * h);
    }
    Eigen::FullPivLU<Matrix> lu(jac);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
      fail(ErrorCode::kSingularJacobian, "outer Jacobian of the weighted estimating equation is singular");
    }
    const Vector step = -lu.solve(cur.residual);
    const double r_norm = sup_norm(cur.residual);

    std::optional<ProfileState::Eval> next;
    double t = 1.0;
    for (int halving = 0; halving <= kMaxOuterHalvings; ++halving, t *= 0.5) {
      try {
        ProfileState::Eval trial = state.evaluate(cur.theta + t * step, cur.sol.lambda);
        if (sup_norm(trial.residual) < r_norm || r_norm <= config.theta_tol) {
          next = std::move(trial);
          break;
        }
      } catch (const Error& e) {
        if (e.category() != ErrorCategory::kNumerical) throw;
      }
    }
    if (!next) {
      if (r_norm <= config.theta_tol) {
        converged = true;
        break;
      }
      fail(ErrorCode::kOuterDivergence, "outer update could not reduce the estimating-equation residual");
    }
    const double moved = sup_norm(next->theta - cur.theta);
    cur = std::move(*next);
    if (moved <= config.theta_tol || r_norm <= config.theta_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    fail(ErrorCode::kOuterDivergence,
         "outer loop hit max_outer = " + std::to_string(config.max_outer));
  }

  GecResult result;
  result.theta_hat = cur.theta;
  result.weight_solution = std::move(cur.sol);
  result.ee_residual_norm = sup_norm(cur.residual);
  result.outer_iterations = outer;
  result.problem = std::move(cur.problem);
  result.s = std::move(cur.s);
  return result;
}

GecResult gec_direct(const MissingData& data, const EstimatingFunction& ef, const Matrix& b,
                     const Vector& pi_hat, const GecConfig& config) {
  validate(config);
  CalibrationProblem problem = base_problem(data, pi_hat, config);
  problem.b = b;
  const Matrix s = build_covariates(problem);
  WeightSolution sol = solve_weights(problem, s, inner_settings(config));
  if (!sol.report.converged) {
    fail(ErrorCode::kMaxIterations, "calibration solve did not converge");
  }
  const Matrix z_resp =
      assemble_rows(ef, select_rows(data.o, data.delta), select_rows(data.m, data.delta));
  const Vector w_resp = respondent_weights(sol, data.delta);
  const Vector theta = ee_root(ef, z_resp, w_resp, Vector::Zero(ef.q()));

  GecResult result;
  result.theta_hat = theta;
  result.ee_residual_norm = sup_norm(weighted_ee_residual(ef, z_resp, w_resp, theta, data.n()));
  result.outer_iterations = 0;
  result.weight_solution = std::move(sol);
  result.problem = std::move(problem);
  result.s = s;
  return result;
}

}  // namespace gecal
