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

#include <cmath>
#include <random>

#include "doctest.h"
#include "gecal/baselines.hpp"
#include "gecal/error.hpp"
#include "gecal/psmodel.hpp"
#include "gecal/solver.hpp"
#include "support.hpp"

using namespace gecal;

namespace {

struct MeanInstance {
  MissingData data;
  Vector yhat;
  Vector pi;
};

MeanInstance mean_instance(std::mt19937_64& rng, int n) {
  MeanInstance inst;
  const Matrix x = gecal::testing::normal_matrix(rng, n, 1);
  const Vector noise = gecal::testing::normal_matrix(rng, n, 1).col(0);
  Vector y = (1.0 + x.col(0).array() + noise.array()).matrix();
  inst.pi = x.col(0).unaryExpr([](double v) { return gecal::testing::expit_ref(0.3 + 0.7 * v); });
  inst.data.delta = gecal::testing::bernoulli_vector(rng, inst.pi);
  if (inst.data.delta.sum() < 4) inst.data.delta.head(4).setOnes();
  inst.yhat = (0.8 + 1.1 * x.col(0).array()).matrix();
  for (int i = 0; i < n; ++i)
    if (inst.data.delta[i] == 0) y[i] = NAN;
  inst.data.o = x;
  inst.data.m = y;
  return inst;
}

// Mean target: z = y only.
std::unique_ptr<EstimatingFunction> mean_on_m() {
  auto ef = mean_ef();
  ef->set_assemble([](const Vector&, const Vector& m) { return m; });
  return ef;
}

double residual_at(const MeanInstance& inst, const EstimatingFunction& ef, const GecConfig& cfg,
                   double theta) {
  CalibrationProblem p;
  p.delta = inst.data.delta;
  p.pi_hat = inst.pi;
  p.entropy = cfg.entropy;
  p.include_normalization = cfg.normalization;
  p.b = (inst.yhat.array() - theta).matrix();
  const WeightSolution sol = solve_weights(p);
  double r = 0.0;
  for (Eigen::Index i = 0; i < p.delta.size(); ++i) {
    if (p.delta[i] == 1) r += sol.weights[i] * ef.u_at(Vector::Constant(1, theta), inst.data.m.row(i).transpose())[0];
  }
  return r / static_cast<double>(p.delta.size());
}

}  // namespace

TEST_CASE("profile solution matches a grid and bisection root scan") {
  std::mt19937_64 rng(30);
  const auto ef = mean_on_m();
  for (EntropyKind kind : {EntropyKind::kET, EntropyKind::kEL, EntropyKind::kSQ, EntropyKind::kHD}) {
    const MeanInstance inst = mean_instance(rng, 30);
    GecConfig cfg;
    cfg.entropy = kind;
    const GecResult res = gec_profile(inst.data, *ef, inst.yhat, inst.pi, cfg);
    CHECK(res.ee_residual_norm <= 1e-6);

    const Vector yr = select_rows(Vector(inst.data.m.col(0)), inst.data.delta);
    const double lo = yr.minCoeff(), hi = yr.maxCoeff();
    double a = lo, fa = residual_at(inst, *ef, cfg, lo);
    double root = NAN;
    for (int k = 1; k <= 200; ++k) {
      const double b = lo + (hi - lo) * k / 200.0;
      const double fb = residual_at(inst, *ef, cfg, b);
      if ((fa < 0) != (fb < 0)) {
        root = gecal::testing::bisect([&](double t) { return residual_at(inst, *ef, cfg, t); }, a, b, 1e-11);
        break;
      }
      a = b;
      fa = fb;
    }
    REQUIRE(std::isfinite(root));
    CHECK(std::abs(res.theta_hat[0] - root) <= 1e-8);
  }
}

TEST_CASE("normalized mean is invariant to shifting the predictions") {
  std::mt19937_64 rng(31);
  const auto ef = mean_on_m();
  const MeanInstance inst = mean_instance(rng, 60);
  GecConfig cfg;
  cfg.normalization = true;
  const GecResult a = gec_profile(inst.data, *ef, inst.yhat, inst.pi, cfg);
  const Vector shifted = (inst.yhat.array() + 3.7).matrix();
  const GecResult b = gec_profile(inst.data, *ef, shifted, inst.pi, cfg);
  CHECK(std::abs(a.theta_hat[0] - b.theta_hat[0]) <= 1e-8);
}

TEST_CASE("direct path matches the profile path and the weighted ratio") {
  std::mt19937_64 rng(32);
  const auto ef = mean_on_m();
  const MeanInstance inst = mean_instance(rng, 30);
  GecConfig cfg;
  cfg.normalization = true;
  const GecResult prof = gec_profile(inst.data, *ef, inst.yhat, inst.pi, cfg);
  const GecResult dir = gec_direct(inst.data, *ef, inst.yhat, inst.pi, cfg);
  CHECK(std::abs(prof.theta_hat[0] - dir.theta_hat[0]) <= 1e-7);
  const Vector w = dir.weight_solution.weights;
  double num = 0, den = 0;
  for (int i = 0; i < 30; ++i) {
    if (inst.data.delta[i] == 1) {
      num += w[i] * inst.data.m(i, 0);
      den += w[i];
    }
  }
  CHECK(std::abs(dir.theta_hat[0] - num / den) <= 1e-10);
  CHECK(dir.ee_residual_norm <= 1e-10);
}

TEST_CASE("everyone responds: full-data roots") {
  std::mt19937_64 rng(33);
  const auto ols = ols_ef(2, true);
  MissingData d;
  d.o = gecal::testing::normal_matrix(rng, 50, 2);
  d.m = gecal::testing::normal_matrix(rng, 50, 1);
  d.delta = Vector::Ones(50);
  const Vector full = full_estimate(d, *ols);
  const GecResult prof = gec_profile(d, *ols, Matrix::Zero(50, 1), Vector::Ones(50), GecConfig{});
  CHECK((prof.theta_hat - full).cwiseAbs().maxCoeff() <= 1e-8);
  const GecResult dir = gec_direct(d, *ols, d.o, Vector::Ones(50), GecConfig{});
  CHECK((dir.theta_hat - full).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("debias-only calibration reduces to IPW under a logistic fit with intercept") {
  std::mt19937_64 rng(34);
  const MeanInstance inst = mean_instance(rng, 300);
  const Matrix design = with_intercept(inst.data.o);
  const PsFit fit = fit_logistic(design, inst.data.delta);
  const Vector pi = predict_pi(fit, design);
  const auto ef = mean_on_m();
  GecConfig cfg;
  cfg.entropy = EntropyKind::kEL;
  const GecResult dir = gec_direct(inst.data, *ef, Matrix::Zero(300, 0), pi, cfg);
  CHECK(std::abs(dir.theta_hat[0] - ipw_estimate(inst.data, *ef, pi)[0]) <= 1e-7);
}

TEST_CASE("OLS target through the profile loop") {
  std::mt19937_64 rng(35);
  const int n = 400;
  const auto ols = ols_ef(2, true);
  MissingData d;
  d.o = gecal::testing::normal_matrix(rng, n, 2);
  const Vector y = (1.0 + d.o.col(0).array() - 0.5 * d.o.col(1).array() +
                    gecal::testing::normal_matrix(rng, n, 1).col(0).array())
                       .matrix();
  Vector pi(n);
  for (int i = 0; i < n; ++i) pi[i] = gecal::testing::expit_ref(0.2 + 0.5 * d.o(i, 0));
  d.delta = gecal::testing::bernoulli_vector(rng, pi);
  d.m = y;
  const Vector yhat = (1.0 + d.o.col(0).array() - 0.5 * d.o.col(1).array()).matrix();
  for (EntropyKind kind : {EntropyKind::kET, EntropyKind::kHD}) {
    GecConfig cfg;
    cfg.entropy = kind;
    const GecResult res = gec_profile(d, *ols, yhat, pi, cfg);
    CHECK(res.ee_residual_norm <= 1e-6);
    CHECK(res.outer_iterations >= 1);
    CHECK(res.weight_solution.constraint_residuals.cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("configuration validation") {
  GecConfig cfg;
  cfg.theta_tol = 0;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = GecConfig{};
  cfg.max_outer = 0;
  CHECK_THROWS_AS(validate(cfg), Error);
}
