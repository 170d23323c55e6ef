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

#include "gecal/apps.hpp"

#include <cmath>
#include <memory>

#include "gecal/error.hpp"
#include "gecal/parallel.hpp"
#include "gecal/psmodel.hpp"
#include "gecal/variance.hpp"

namespace gecal {

namespace {

GecConfig solver_config(const AppConfig& config, bool default_normalization) {
  GecConfig cfg = config.solver;
  cfg.entropy = config.entropy;
  cfg.normalization = config.normalization.value_or(default_normalization);
  return cfg;
}

Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(r) = m.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

Vector take_rows(const Vector& v, const std::vector<std::size_t>& rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out[r] = v[static_cast<Eigen::Index>(rows[r])];
  return out;
}

bool is_binary(const Vector& v, const Vector& mask) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (mask[i] != 0.0 && v[i] != 0.0 && v[i] != 1.0) return false;
  }
  return true;
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) fail(ErrorCode::kNonNumeric, std::string(what) + " must be finite");
}

// Everything the estimators of one missing-data problem share: the data,
// the target, the fitted propensity model and the cross-fitted predictions.
struct Prepared {
  MissingData data;
  std::unique_ptr<EstimatingFunction> ef;
  Matrix ps_design;  // empty when every unit responds
  std::optional<PropensityLink> link;
  Vector phi;
  Vector pi_hat;
  Matrix m_hat;

  std::optional<PsModelRef> ps_ref() const {
    if (!link) return std::nullopt;
    return PsModelRef{&*link, phi};
  }
};

void fit_nuisance(Prepared& p, const Matrix& ps_design, bool complement,
                  const Matrix& predictor_inputs, PredictorFamily family, const AppConfig& config) {
  const Eigen::Index n = p.data.n();
  if (p.data.respondents() < p.ef->q()) {
    fail(ErrorCode::kTooFewRespondents, "need at least " + std::to_string(p.ef->q()) +
                                            " complete cases, got " +
                                            std::to_string(p.data.respondents()));
  }
  if (p.data.respondents() == n) {
    p.pi_hat = Vector::Ones(n);
    p.m_hat = p.data.m;
    return;
  }
  const Vector target = complement ? Vector((1.0 - p.data.delta.array()).matrix()) : p.data.delta;
  const PsFit fit = fit_logistic(ps_design, target);
  p.ps_design = ps_design;
  p.link.emplace(p.ps_design, complement, config.ps_truncation);
  p.phi = fit.phi;
  p.pi_hat = p.link->pi(p.phi);
  const FoldAssignment folds = make_folds(static_cast<std::size_t>(n), config.folds, config.seed);
  p.m_hat = cross_fit_predictions(predictor_inputs, p.data.m.col(0), p.data.delta, family, folds,
                                  config.predictor);
}

Vector run_baseline(const Prepared& p, BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kFull: return full_estimate(p.data, *p.ef);
    case BaselineKind::kCC: return cc_estimate(p.data, *p.ef);
    case BaselineKind::kIPW: return ipw_estimate(p.data, *p.ef, p.pi_hat);
    case BaselineKind::kAIPW: return aipw_estimate(p.data, *p.ef, p.pi_hat, p.m_hat);
  }
  return {};
}

RegressionResult run_gec(const Prepared& p, const AppConfig& config, bool want_se) {
  RegressionResult out;
  out.coef_names = p.ef->coef_names();
  out.n = static_cast<std::size_t>(p.data.n());
  out.n_respondents = static_cast<std::size_t>(p.data.respondents());
  out.pi_hat = p.pi_hat;
  out.predictions = p.m_hat.col(0);
  out.gec = gec_profile(p.data, *p.ef, p.m_hat, p.pi_hat, solver_config(config, false));
  if (want_se) out.se = sandwich_se(influence_parts(p.data, *p.ef, out.gec, p.ps_ref())).se;
  return out;
}

// ---- causal ----

struct CausalInputs {
  Matrix design;
  PsFit fit;
  FoldAssignment folds;
};

CausalInputs causal_inputs(const Matrix& x, const Vector& t, const Vector& y,
                           const AppConfig& config) {
  const Eigen::Index n = x.rows();
  if (t.size() != n || y.size() != n) {
    fail(ErrorCode::kDimensionMismatch, "treatment, outcome and covariates differ in length");
  }
  require_finite(x, "covariates");
  require_finite(y, "outcome");
  double treated = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (t[i] != 0.0 && t[i] != 1.0) fail(ErrorCode::kNonNumeric, "treatment must be coded 0/1");
    treated += t[i];
  }
  if (treated == 0.0 || treated == static_cast<double>(n)) {
    fail(ErrorCode::kOneArmEmpty, treated == 0.0 ? "no treated units" : "no control units");
  }
  CausalInputs in;
  in.design = with_intercept(x);
  in.fit = fit_logistic(in.design, t);
  in.folds = make_folds(static_cast<std::size_t>(n), config.folds, config.seed);
  return in;
}

Prepared causal_arm(const Matrix& x, const Vector& t, const Vector& y, int arm,
                    const CausalInputs& in, const AppConfig& config) {
  const Eigen::Index n = x.rows();
  Prepared p;
  p.ef = mean_ef();
  p.ef->set_assemble([](const Vector&, const Vector& m) { return m; });
  p.data.o = x;
  p.data.delta = arm == 1 ? t : Vector((1.0 - t.array()).matrix());
  p.data.m = y;
  for (Eigen::Index i = 0; i < n; ++i)
    if (p.data.delta[i] == 0.0) p.data.m(i, 0) = NAN;
  p.ps_design = in.design;
  p.link.emplace(p.ps_design, arm == 0, config.ps_truncation);
  p.phi = in.fit.phi;
  p.pi_hat = p.link->pi(p.phi);
  p.m_hat = cross_fit_predictions(x, y, p.data.delta,
                                  config.family.value_or(PredictorFamily::kLinear), in.folds,
                                  config.predictor);
  return p;
}

AteResult ate_point(const Matrix& x, const Vector& t, const Vector& y, const AppConfig& config,
                    bool want_se) {
  const Eigen::Index n = x.rows();
  const CausalInputs in = causal_inputs(x, t, y, config);
  const GecConfig cfg = solver_config(config, true);

  AteResult out;
  out.pi_hat = PropensityLink(in.design, false, config.ps_truncation).pi(in.fit.phi);
  std::array<Matrix, 2> psi;
  parallel_for(2, [&](std::size_t arm) {
    const Prepared p = causal_arm(x, t, y, static_cast<int>(arm), in, config);
    out.predictions[arm] = p.m_hat.col(0);
    out.per_arm[arm] = gec_profile(p.data, *p.ef, p.m_hat, p.pi_hat, cfg);
    if (want_se) {
      psi[arm] = influence_functions(influence_parts(p.data, *p.ef, out.per_arm[arm], p.ps_ref()));
    }
  });
  out.theta1 = out.per_arm[1].theta_hat[0];
  out.theta0 = out.per_arm[0].theta_hat[0];
  out.ate = out.theta1 - out.theta0;
  if (want_se) {
    const double nn = static_cast<double>(n);
    out.se1 = psi[1].norm() / nn;
    out.se0 = psi[0].norm() / nn;
    out.se_ate = (psi[1] - psi[0]).norm() / nn;
  } else {
    out.se1 = out.se0 = out.se_ate = NAN;
  }
  return out;
}

// ---- semi-supervised ----

Prepared ssl_prepare(const Matrix& x_labeled, const Vector& y_labeled, const Matrix& x_unlabeled,
                     Mechanism mechanism, const AppConfig& config) {
  const Eigen::Index n_lab = x_labeled.rows();
  const Eigen::Index n_unl = x_unlabeled.rows();
  const Eigen::Index p = x_labeled.cols();
  if (y_labeled.size() != n_lab || (n_unl > 0 && x_unlabeled.cols() != p)) {
    fail(ErrorCode::kDimensionMismatch, "labeled and unlabeled inputs do not line up");
  }
  if (n_lab < p + 1) {
    fail(ErrorCode::kTooFewRespondents, "need at least " + std::to_string(p + 1) +
                                            " labeled rows, got " + std::to_string(n_lab));
  }
  require_finite(x_labeled, "labeled covariates");
  require_finite(x_unlabeled, "unlabeled covariates");
  require_finite(y_labeled, "labeled outcome");

  Prepared prep;
  prep.data.o.resize(n_lab + n_unl, p);
  if (n_unl > 0) {
    prep.data.o << x_labeled, x_unlabeled;
  } else {
    prep.data.o = x_labeled;
  }
  prep.data.m = Matrix::Constant(n_lab + n_unl, 1, NAN);
  prep.data.m.topRows(n_lab) = y_labeled;
  prep.data.delta = Vector::Zero(n_lab + n_unl);
  prep.data.delta.head(n_lab).setOnes();
  prep.ef = ols_ef(p, true);

  const Matrix design = mechanism == Mechanism::kMcar ? Matrix(Matrix::Ones(n_lab + n_unl, 1))
                                                      : with_intercept(prep.data.o);
  fit_nuisance(prep, design, false, prep.data.o, config.family.value_or(PredictorFamily::kLinear),
               config);
  return prep;
}

// ---- missing covariates ----

Prepared misscov_prepare(const Matrix& x1, const Vector& x2, const Vector& y,
                         const AppConfig& config) {
  const Eigen::Index n = x1.rows();
  const Eigen::Index p1 = x1.cols();
  if (x2.size() != n || y.size() != n) {
    fail(ErrorCode::kDimensionMismatch, "x1, x2 and outcome differ in length");
  }
  require_finite(x1, "x1 covariates");
  require_finite(y, "outcome");

  Prepared prep;
  prep.data.o.resize(n, p1 + 1);
  prep.data.o << x1, y;
  prep.data.m = x2;
  prep.data.delta.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) prep.data.delta[i] = std::isnan(x2[i]) ? 0.0 : 1.0;

  prep.ef = ols_ef(p1 + 1, true);
  prep.ef->set_assemble([p1](const Vector& o, const Vector& m) {
    Vector z(p1 + 2);
    z << o.head(p1), m[0], o[p1];
    return z;
  });
  const PredictorFamily family = config.family.value_or(
      is_binary(x2, prep.data.delta) ? PredictorFamily::kLogistic : PredictorFamily::kLinear);
  const Matrix ps_inputs = config.misscov_ps_uses_outcome ? prep.data.o : x1;
  fit_nuisance(prep, with_intercept(ps_inputs), false, prep.data.o, family, config);
  return prep;
}

template <class PointFn>
Vector bootstrap_rows(std::size_t n, const AppConfig& config, PointFn point) {
  return bootstrap_se(n, point, config.bootstrap_b, config.seed).se;
}

}  // namespace

SeMethod parse_se_method(std::string_view token) {
  if (token == "sandwich") return SeMethod::kSandwich;
  if (token == "bootstrap") return SeMethod::kBootstrap;
  if (token == "none") return SeMethod::kNone;
  fail(ErrorCode::kConfig, "unknown --se '" + std::string(token) + "'; use sandwich or bootstrap");
}

std::string se_method_token(SeMethod method) {
  switch (method) {
    case SeMethod::kSandwich: return "sandwich";
    case SeMethod::kBootstrap: return "bootstrap";
    case SeMethod::kNone: return "none";
  }
  return "?";
}

Mechanism parse_mechanism(std::string_view token) {
  if (token == "mar") return Mechanism::kMar;
  if (token == "mcar") return Mechanism::kMcar;
  fail(ErrorCode::kConfig, "unknown mechanism '" + std::string(token) + "'; use mar or mcar");
}

EstimateResult AteResult::summary(EntropyKind entropy) const {
  EstimateResult r;
  r.target = "ate";
  r.coef_names = {"ate", "mean1", "mean0"};
  r.estimate = (Vector(3) << ate, theta1, theta0).finished();
  r.se = (Vector(3) << se_ate, se1, se0).finished();
  r.entropy = entropy_token(entropy);
  r.n = static_cast<std::size_t>(pi_hat.size());
  r.n_respondents = r.n;
  return r;
}

EstimateResult RegressionResult::summary(const std::string& target, EntropyKind entropy) const {
  EstimateResult r;
  r.target = target;
  r.coef_names = coef_names;
  r.estimate = gec.theta_hat;
  r.se = se.size() == gec.theta_hat.size() ? se : Vector::Constant(gec.theta_hat.size(), NAN);
  r.entropy = entropy_token(entropy);
  r.n = n;
  r.n_respondents = n_respondents;
  return r;
}

AteResult ate_estimate(const Matrix& x, const Vector& t, const Vector& y, const AppConfig& config) {
  AteResult out = ate_point(x, t, y, config, config.se == SeMethod::kSandwich);
  if (config.se == SeMethod::kBootstrap) {
    const Vector se = bootstrap_rows(
        static_cast<std::size_t>(x.rows()), config, [&](const std::vector<std::size_t>& units) {
          const AteResult r = ate_point(take_rows(x, units), take_rows(t, units),
                                        take_rows(y, units), config, false);
          return Vector((Vector(3) << r.ate, r.theta1, r.theta0).finished());
        });
    out.se_ate = se[0];
    out.se1 = se[1];
    out.se0 = se[2];
  }
  return out;
}

double ate_baseline(const Matrix& x, const Vector& t, const Vector& y, BaselineKind kind,
                    const AppConfig& config) {
  const CausalInputs in = causal_inputs(x, t, y, config);
  if (kind == BaselineKind::kFull) {
    fail(ErrorCode::kConfig, "the full-data estimator needs both potential outcomes");
  }
  std::array<double, 2> theta{};
  for (int arm : {0, 1}) theta[arm] = run_baseline(causal_arm(x, t, y, arm, in, config), kind)[0];
  return theta[1] - theta[0];
}

RegressionResult ssl_estimate(const Matrix& x_labeled, const Vector& y_labeled,
                              const Matrix& x_unlabeled, Mechanism mechanism,
                              const AppConfig& config) {
  RegressionResult out = run_gec(ssl_prepare(x_labeled, y_labeled, x_unlabeled, mechanism, config),
                                 config, config.se == SeMethod::kSandwich);
  if (config.se == SeMethod::kBootstrap) {
    const Eigen::Index n_lab = x_labeled.rows();
    Matrix x_all(n_lab + x_unlabeled.rows(), x_labeled.cols());
    x_all << x_labeled, x_unlabeled;
    out.se = bootstrap_rows(
        static_cast<std::size_t>(x_all.rows()), config, [&](const std::vector<std::size_t>& units) {
          std::vector<std::size_t> lab, unl;
          for (auto u : units) (static_cast<Eigen::Index>(u) < n_lab ? lab : unl).push_back(u);
          const Prepared p = ssl_prepare(take_rows(x_all, lab), take_rows(y_labeled, lab),
                                         take_rows(x_all, unl), mechanism, config);
          return run_gec(p, config, false).gec.theta_hat;
        });
  }
  return out;
}

Vector ssl_baseline(const Matrix& x_labeled, const Vector& y_labeled, const Matrix& x_unlabeled,
                    Mechanism mechanism, BaselineKind kind, const AppConfig& config) {
  return run_baseline(ssl_prepare(x_labeled, y_labeled, x_unlabeled, mechanism, config), kind);
}

RegressionResult misscov_estimate(const Matrix& x1, const Vector& x2, const Vector& y,
                                  const AppConfig& config) {
  RegressionResult out =
      run_gec(misscov_prepare(x1, x2, y, config), config, config.se == SeMethod::kSandwich);
  if (config.se == SeMethod::kBootstrap) {
    out.se = bootstrap_rows(
        static_cast<std::size_t>(x1.rows()), config, [&](const std::vector<std::size_t>& units) {
          const Prepared p =
              misscov_prepare(take_rows(x1, units), take_rows(x2, units), take_rows(y, units), config);
          return run_gec(p, config, false).gec.theta_hat;
        });
  }
  return out;
}

Vector misscov_baseline(const Matrix& x1, const Vector& x2, const Vector& y, BaselineKind kind,
                        const AppConfig& config, const Vector* x2_full) {
  if (kind == BaselineKind::kFull) {
    if (x2_full == nullptr) fail(ErrorCode::kConfig, "the full-data estimator needs complete x2");
    Prepared p;
    p.data.o.resize(x1.rows(), x1.cols() + 1);
    p.data.o << x1, y;
    p.data.m = *x2_full;
    p.data.delta = Vector::Ones(x1.rows());
    const Eigen::Index p1 = x1.cols();
    p.ef = ols_ef(p1 + 1, true);
    p.ef->set_assemble([p1](const Vector& o, const Vector& m) {
      Vector z(p1 + 2);
      z << o.head(p1), m[0], o[p1];
      return z;
    });
    return full_estimate(p.data, *p.ef);
  }
  return run_baseline(misscov_prepare(x1, x2, y, config), kind);
}

WeightsResult weights_estimate(const Matrix& covariates, const Vector& delta,
                               const AppConfig& config) {
  const Eigen::Index n = covariates.rows();
  if (delta.size() != n) fail(ErrorCode::kDimensionMismatch, "delta and covariates differ in length");
  require_finite(covariates, "covariates");
  WeightsResult out;
  out.delta = delta;
  if (delta.sum() == static_cast<double>(n)) {
    out.pi_hat = Vector::Ones(n);
  } else {
    const Matrix design = with_intercept(covariates);
    const PsFit fit = fit_logistic(design, delta);
    out.pi_hat = PropensityLink(design, false, config.ps_truncation).pi(fit.phi);
  }
  CalibrationProblem problem;
  problem.delta = delta;
  problem.b = covariates;
  problem.pi_hat = out.pi_hat;
  problem.entropy = config.entropy;
  problem.include_normalization = config.normalization.value_or(false);
  CalibrationSettings settings;
  settings.lambda_tol = config.solver.lambda_tol;
  out.solution = solve_weights(problem, settings);
  if (!out.solution.report.converged) {
    fail(ErrorCode::kMaxIterations, "calibration solve did not converge");
  }
  out.weights = out.solution.weights;
  return out;
}

}  // namespace gecal
