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
#include "gecal/calibration.hpp"
#include "gecal/error.hpp"
#include "gecal/optim.hpp"
#include "support.hpp"

using namespace gecal;

namespace {

ObjectiveOracle quadratic(const Matrix& a, const Vector& c) {
  ObjectiveOracle o;
  o.value_at = [a, c](const Vector& x) { return 0.5 * (x - c).dot(a * (x - c)); };
  o.gradient_at = [a, c](const Vector& x) { return Vector(a * (x - c)); };
  o.hessian_at = [a](const Vector&) { return a; };
  return o;
}

}  // namespace

TEST_CASE("quadratic converges in one Newton step") {
  const ObjectiveOracle o = quadratic(Matrix::Identity(1, 1), Vector::Constant(1, 3.0));
  const SolveReport r = minimize_convex(o, Vector::Zero(1), 1e-9, 50);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.solution[0] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("strongly convex quadratic in several dimensions") {
  std::mt19937_64 rng(1);
  const Matrix l = gecal::testing::normal_matrix(rng, 4, 4);
  const Matrix a = l * l.transpose() + Matrix::Identity(4, 4);
  const Vector c = gecal::testing::normal_matrix(rng, 4, 1).col(0);
  const SolveReport r = minimize_convex(quadratic(a, c), Vector::Zero(4), 1e-9, 50);
  CHECK(r.iterations == 1);
  CHECK((r.solution - c).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("SQ dual matches linear-solve closed form") {
  std::mt19937_64 rng(7);
  const int n = 60;
  CalibrationProblem p;
  p.entropy = EntropyKind::kSQ;
  p.pi_hat = gecal::testing::uniform_vector(rng, n, 0.2, 0.9);
  p.delta = gecal::testing::bernoulli_vector(rng, p.pi_hat);
  p.b = gecal::testing::normal_matrix(rng, n, 2);
  p.include_normalization = true;
  const Matrix s = build_covariates(p);
  const Matrix resp = select_rows(s, p.delta);
  const Vector closed = (resp.transpose() * resp).ldlt().solve(s.colwise().sum().transpose());
  const WeightSolution sol = solve_weights(p, s);
  CHECK(sol.report.converged);
  CHECK((sol.lambda - closed).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("EL dual needs feasibility halvings and matches grid search") {
  // debias-only EL: s_i = -pi_i, optimum lambda* = n_resp / sum pi
  CalibrationProblem p;
  p.entropy = EntropyKind::kEL;
  p.pi_hat = (Vector(5) << 0.3, 0.5, 0.7, 0.2, 0.9).finished();
  p.delta = (Vector(5) << 1, 1, 0, 1, 0).finished();
  const Matrix s = build_covariates(p);

  ObjectiveOracle o;
  o.value_at = [&](const Vector& l) { return dual_value(p, s, l); };
  o.gradient_at = [&](const Vector& l) { return dual_gradient(p, s, l); };
  o.hessian_at = [&](const Vector& l) { return dual_hessian(p, s, l); };
  o.feasible_at = [&](const Vector& l) { return dual_feasible(p, s, l); };

  const SolveReport r = minimize_convex(o, Vector::Constant(1, 4.0), 1e-10, 100);
  CHECK(r.converged);
  CHECK(r.infeasible_halvings_total >= 1);
  for (int i = 0; i < 5; ++i) {
    if (p.delta[i] == 1.0) CHECK(s(i, 0) * r.solution[0] < 0.0);
  }

  double best = 0.0, best_val = INFINITY;
  for (double l = 0.001; l < 10.0; l += 1e-3) {
    const double v = dual_value(p, s, Vector::Constant(1, l));
    if (v < best_val) {
      best_val = v;
      best = l;
    }
  }
  CHECK(std::abs(r.solution[0] - best) <= 1e-3);
}

TEST_CASE("monotone descent on a smooth convex function") {
  // f(x) = sum exp(x_j) - x_j * t_j
  const Vector t = (Vector(3) << 0.5, 2.0, 5.0).finished();
  ObjectiveOracle o;
  o.value_at = [&](const Vector& x) { return x.array().exp().sum() - x.dot(t); };
  o.gradient_at = [&](const Vector& x) { return Vector(x.array().exp().matrix() - t); };
  o.hessian_at = [&](const Vector& x) { return Matrix(x.array().exp().matrix().asDiagonal()); };
  double prev = INFINITY;
  Vector x = Vector::Constant(3, 4.0);
  for (int k = 1; k <= 30; ++k) {
    const SolveReport r = minimize_convex(o, Vector::Constant(3, 4.0), 1e-12, k);
    const double v = o.value_at(r.solution);
    CHECK(v <= prev + 1e-14);
    prev = v;
    x = r.solution;
  }
  CHECK((x - t.array().log().matrix()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("errors and unconverged report") {
  ObjectiveOracle o = quadratic(Matrix::Identity(1, 1), Vector::Zero(1));
  o.feasible_at = [](const Vector& x) { return x[0] > 1.0; };
  try {
    minimize_convex(o, Vector::Zero(1), 1e-9, 10);
    FAIL("expected infeasible start");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasibleStart);
  }

  // Gradient that lies about the descent direction forces a stall.
  ObjectiveOracle bad = quadratic(Matrix::Identity(1, 1), Vector::Zero(1));
  bad.gradient_at = [](const Vector& x) { return Vector(-(x.array() + 1.0).matrix()); };
  bad.hessian_at = [](const Vector&) { return Matrix::Identity(1, 1); };
  try {
    minimize_convex(bad, Vector::Constant(1, 2.0), 1e-9, 10);
    FAIL("expected a line-search stall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLineSearchStall);
  }

  ObjectiveOracle slow;
  slow.value_at = [](const Vector& x) { return std::exp(x[0]) - x[0]; };
  slow.gradient_at = [](const Vector& x) { return Vector::Constant(1, std::exp(x[0]) - 1.0); };
  slow.hessian_at = [](const Vector& x) { return Matrix::Constant(1, 1, std::exp(x[0])); };
  const SolveReport r = minimize_convex(slow, Vector::Constant(1, 30.0), 1e-12, 3);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
}

TEST_CASE("singular Hessian falls back to a Levenberg shift") {
  ObjectiveOracle o;
  // f = (x0 + x1 - 2)^2 / 2: Hessian is rank one
  o.value_at = [](const Vector& x) { return 0.5 * std::pow(x[0] + x[1] - 2.0, 2); };
  o.gradient_at = [](const Vector& x) { return Vector::Constant(2, x[0] + x[1] - 2.0); };
  o.hessian_at = [](const Vector&) { return Matrix::Ones(2, 2); };
  const SolveReport r = minimize_convex(o, Vector::Zero(2), 1e-9, 100);
  CHECK(r.converged);
  CHECK(r.solution.sum() == doctest::Approx(2.0).epsilon(1e-8));
}
