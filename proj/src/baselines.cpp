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

#include "gecal/baselines.hpp"

#include <cmath>
#include <vector>

#include "gecal/error.hpp"

namespace gecal {

namespace {

Matrix respondent_rows(const MissingData& data, const EstimatingFunction& ef) {
  const Matrix o = select_rows(data.o, data.delta);
  const Matrix m = select_rows(data.m, data.delta);
  return assemble_rows(ef, o, m);
}

}  // namespace

std::string baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kFull: return "Full";
    case BaselineKind::kCC: return "CC";
    case BaselineKind::kIPW: return "IPW";
    case BaselineKind::kAIPW: return "AIPW";
  }
  return "?";
}

Vector ee_root(const EstimatingFunction& ef, const Matrix& z, const Vector& w,
               const Vector& theta0, double tol, int max_iter) {
  Vector theta = theta0;
  auto residual = [&](const Vector& th) {
    Vector r = Vector::Zero(ef.q());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      if (w[i] != 0.0) r += w[i] * ef.u_at(th, z.row(i).transpose());
    }
    return r;
  };
  Vector r = residual(theta);
  for (int iter = 0; iter < max_iter; ++iter) {
    const Matrix jac = ef.weighted_jacobian(theta, z, w);
    Eigen::FullPivLU<Matrix> lu(jac);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
      fail(ErrorCode::kSingularJacobian, "estimating-equation Jacobian is singular");
    }
    const Vector step = -lu.solve(r);
    double t = 1.0;
    Vector trial = theta + step;
    Vector r_trial = residual(trial);
    for (int h = 0; h < 30 && r_trial.norm() > r.norm() && step.norm() > 0.0; ++h) {
      t *= 0.5;
      trial = theta + t * step;
      r_trial = residual(trial);
    }
    const double moved = sup_norm(trial - theta);
    theta = std::move(trial);
    r = std::move(r_trial);
    if (moved <= tol * (1.0 + sup_norm(theta))) return theta;
  }
  return theta;
}

Vector full_estimate(const MissingData& data, const EstimatingFunction& ef) {
  if (!data.m.allFinite()) {
    fail(ErrorCode::kConfig, "full-data estimator needs every missing-part value");
  }
  const Matrix z = assemble_rows(ef, data.o, data.m);
  return ee_root(ef, z, Vector::Ones(z.rows()), Vector::Zero(ef.q()));
}

Vector cc_estimate(const MissingData& data, const EstimatingFunction& ef) {
  if (data.respondents() < ef.q()) {
    fail(ErrorCode::kTooFewRespondents, "need at least " + std::to_string(ef.q()) +
                                            " respondents, got " +
                                            std::to_string(data.respondents()));
  }
  const Matrix z = respondent_rows(data, ef);
  return ee_root(ef, z, Vector::Ones(z.rows()), Vector::Zero(ef.q()));
}

Vector ipw_estimate(const MissingData& data, const EstimatingFunction& ef, const Vector& pi_hat) {
  const Matrix z = respondent_rows(data, ef);
  const Vector pi_r = select_rows(pi_hat, data.delta);
  if (!(pi_r.size() > 0 && pi_r.minCoeff() > 0.0)) {
    fail(ErrorCode::kDomain, "respondent propensities must be positive");
  }
  return ee_root(ef, z, pi_r.cwiseInverse(), Vector::Zero(ef.q()));
}

Vector aipw_estimate(const MissingData& data, const EstimatingFunction& ef,
                     const Vector& pi_hat, const Matrix& m_hat) {
  const Eigen::Index n = data.n();
  const Matrix z_resp = respondent_rows(data, ef);
  const Matrix z_hat = assemble_rows(ef, data.o, m_hat);
  const Vector pi_r = select_rows(pi_hat, data.delta);

  Matrix z(z_resp.rows() + n, z_resp.cols());
  z << z_resp, z_hat;
  Vector w(z.rows());
  w.head(z_resp.rows()) = pi_r.cwiseInverse();
  for (Eigen::Index i = 0; i < n; ++i) {
    w[z_resp.rows() + i] = -(data.delta[i] - pi_hat[i]) / pi_hat[i];
  }
  return ee_root(ef, z, w, Vector::Zero(ef.q()));
}

}  // namespace gecal
